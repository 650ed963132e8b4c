#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "msflow/geometry.hpp"

namespace msflow {

// Orthonormal type-II cosine transform on the cell-centered grid. Realizes
// the even reflection across the side walls; basis vector m samples
// cos(pi m x / W) at x_j = (j+1/2) W/n.
class CosineBasis {
public:
    explicit CosineBasis(int n) : n_(n), synth_(n, n) {
        if (n < 2) throw ConfigError("cosine basis needs n >= 2");
        const double c0 = std::sqrt(1.0 / n);
        const double cm = std::sqrt(2.0 / n);
        for (int j = 0; j < n; ++j)
            for (int m = 0; m < n; ++m)
                synth_(j, m) = (m == 0 ? c0 : cm) *
                               std::cos(M_PI * m * (j + 0.5) / n);
    }

    int size() const { return n_; }

    Eigen::VectorXd forward(const Eigen::VectorXd& values) const {
        return synth_.transpose() * values;
    }

    Eigen::VectorXd inverse(const Eigen::VectorXd& coeffs) const {
        return synth_ * coeffs;
    }

    // Evaluate the mode-m basis function (unit coefficient, this basis's
    // normalization) on an n2-node grid of the same interval.
    static Eigen::VectorXd resample(const Eigen::VectorXd& values, int n_to) {
        const int n = static_cast<int>(values.size());
        // split off a constant baseline so exactly-constant inputs resample
        // to exactly the same constant (no transform round-off to amplify)
        const double base = values[0];
        CosineBasis from(n);
        Eigen::VectorXd c = from.forward(values.array() - base);
        Eigen::VectorXd out = Eigen::VectorXd::Zero(n_to);
        const int nkeep = std::min(n, n_to);
        // coefficients rescale by sqrt(n_to/n) between orthonormal bases
        const double scale = std::sqrt(static_cast<double>(n_to) / n);
        CosineBasis to(n_to);
        Eigen::VectorXd c2 = Eigen::VectorXd::Zero(n_to);
        c2.head(nkeep) = scale * c.head(nkeep);
        out = to.inverse(c2);
        out.array() += base;
        return out;
    }

private:
    int n_;
    Eigen::MatrixXd synth_;  // values = synth * coeffs
};

// Half-space Dirichlet-to-Neumann symbol of the linearized flow,
// 2 xi^2 sqrt(omega^2 + xi^2); omega is the optional shift rate.
inline double symbol_halfspace(double xi, double omega = 0.0) {
    return 2.0 * xi * xi * std::sqrt(omega * omega + xi * xi);
}

// Strip symbol for the container: a(k) = k^3 (tanh(k d+) + tanh(k d-)).
// Derived once by separation of variables and treated as a first-class
// oracle for the discrete elliptic operator.
inline double symbol_strip(double k, const ContainerGeometry& geom) {
    if (k < 0.0) throw ConfigError("symbol_strip requires k >= 0");
    return k * k * k *
           (std::tanh(k * geom.depth_plus) + std::tanh(k * geom.depth_minus));
}

// Per-mode wavenumbers k_m = pi m / W and symbol values a_m.
struct SymbolTable {
    Eigen::VectorXd k;
    Eigen::VectorXd a;

    static SymbolTable from_geometry(const ContainerGeometry& geom, int n) {
        SymbolTable t;
        t.k.resize(n);
        t.a.resize(n);
        for (int m = 0; m < n; ++m) {
            t.k[m] = M_PI * m / geom.width;
            t.a[m] = symbol_strip(t.k[m], geom);
        }
        return t;
    }
};

// Checks the scaling identity a_omega(xi) = omega^3 a_1(xi/omega) of the
// shifted half-space symbol over a sample set; returns the max relative error.
inline double scaling_identity_check(const Eigen::VectorXd& xis,
                                     const Eigen::VectorXd& omegas) {
    double worst = 0.0;
    for (int i = 0; i < xis.size(); ++i) {
        const double xi = xis[i];
        const double w = omegas[i];
        if (!(w > 0.0)) throw ConfigError("scaling check requires omega > 0");
        const double lhs = symbol_halfspace(xi, w);
        const double rhs = w * w * w * symbol_halfspace(xi / w, 1.0);
        if (lhs == 0.0 && rhs == 0.0) continue;
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
    }
    return worst;
}

// Exact per-mode solution of (d/dt + omega^3 + a_m) h_m = f_m with
// piecewise-constant forcing: decay factor plus the closed-form Duhamel term.
inline HeightField linear_propagate(const HeightField& h0, double t,
                                    double omega_shift = 0.0,
                                    const std::optional<Eigen::VectorXd>& forcing =
                                        std::nullopt) {
    if (t < 0.0) throw ConfigError("linear_propagate requires t >= 0");
    const ContainerGeometry& geom = h0.geometry();
    const int n = h0.size();
    CosineBasis basis(n);
    SymbolTable table = SymbolTable::from_geometry(geom, n);
    Eigen::VectorXd c = basis.forward(h0.values());
    const double shift = omega_shift * omega_shift * omega_shift;
    for (int m = 0; m < n; ++m) {
        const double lam = table.a[m] + shift;
        const double decay = std::exp(-lam * t);
        double duhamel = 0.0;
        if (forcing) {
            const double f = (*forcing)[m];
            duhamel = (lam > 0.0) ? f * (1.0 - decay) / lam : f * t;
        }
        c[m] = c[m] * decay + duhamel;
    }
    return HeightField(geom, basis.inverse(c));
}

} // namespace msflow
