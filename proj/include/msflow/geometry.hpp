#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "msflow/common.hpp"

namespace msflow {

// Rectangular container [0,W] x (-d_minus, d_plus) with the flat reference
// interface Sigma = [0,W] x {0}. The moving interface is the graph of a
// height function over Sigma; straight vertical walls meet Sigma at 90
// degrees, so no tangential correction is needed anywhere.
struct ContainerGeometry {
    double width;
    double depth_plus;   // distance from Sigma to the top wall
    double depth_minus;  // distance from Sigma to the bottom wall

    ContainerGeometry(double w, double dp, double dm)
        : width(w), depth_plus(dp), depth_minus(dm) {
        if (!(w > 0.0) || !(dp > 0.0) || !(dm > 0.0))
            throw ConfigError("container geometry requires W, d+, d- > 0");
    }

    // Half-width of the tube around Sigma inside which the interface may move.
    double tube_half_width() const { return std::min(depth_plus, depth_minus); }

    // Heights must stay strictly below this bound.
    double admissible_bound() const { return tube_half_width() / 5.0; }
};

// Nodal height samples at cell centers x_j = (j+1/2) W/N. The cell-centered
// layout makes the type-II cosine transform diagonalize the Neumann Laplacian
// exactly, so the 90-degree contact condition is structural.
class HeightField {
public:
    HeightField(const ContainerGeometry& geom, Eigen::VectorXd values)
        : geom_(geom), values_(std::move(values)) {
        if (values_.size() < 2)
            throw ConfigError("height field needs at least 2 nodes");
    }

    static HeightField zero(const ContainerGeometry& geom, int n) {
        return HeightField(geom, Eigen::VectorXd::Zero(n));
    }

    const ContainerGeometry& geometry() const { return geom_; }
    const Eigen::VectorXd& values() const { return values_; }
    int size() const { return static_cast<int>(values_.size()); }
    double dx() const { return geom_.width / size(); }
    double node(int j) const { return (j + 0.5) * dx(); }
    double mean() const { return values_.mean(); }
    double max_abs() const { return values_.lpNorm<Eigen::Infinity>(); }

    bool admissible() const { return max_abs() < geom_.admissible_bound(); }

    void require_admissible() const {
        if (!admissible())
            throw AdmissibilityError(max_abs(), geom_.admissible_bound());
    }

private:
    ContainerGeometry geom_;
    Eigen::VectorXd values_;
};

// Cutoff chi: chi(s) = 1 for |s| <= 1/3, chi(s) = 0 for |s| >= 2/3 and
// |chi'| <= 4 throughout. The transition ramps chi' up to its plateau value
// -4 with quintic-smoothstep ends of width 1/12, which is the narrowest C^2
// profile compatible with the slope bound.
namespace cutoff {

inline double smoothstep(double t) {  // quintic, S(0)=0, S(1)=1, S',S''=0 at ends
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

inline double smoothstep_integral(double t) {  // int_0^t S
    return t * t * t * t * (2.5 + t * (-3.0 + t));
}

inline double chi(double s) {
    const double t = std::abs(s);
    if (t <= 1.0 / 3.0) return 1.0;
    if (t >= 2.0 / 3.0) return 0.0;
    if (t <= 5.0 / 12.0) {
        const double u = (t - 1.0 / 3.0) * 12.0;
        return 1.0 - smoothstep_integral(u) / 3.0;
    }
    if (t <= 7.0 / 12.0) {
        return 5.0 / 6.0 - 4.0 * (t - 5.0 / 12.0);
    }
    const double u = (t - 7.0 / 12.0) * 12.0;
    return 1.0 / 6.0 - (u - smoothstep_integral(u)) / 3.0;
}

inline double chi_prime(double s) {
    const double t = std::abs(s);
    double d;
    if (t <= 1.0 / 3.0 || t >= 2.0 / 3.0) {
        d = 0.0;
    } else if (t <= 5.0 / 12.0) {
        d = -4.0 * smoothstep((t - 1.0 / 3.0) * 12.0);
    } else if (t <= 7.0 / 12.0) {
        d = -4.0;
    } else {
        d = -4.0 * (1.0 - smoothstep((t - 7.0 / 12.0) * 12.0));
    }
    return s >= 0.0 ? d : -d;
}

} // namespace cutoff

// First derivative on the cell-centered grid: centered interior stencil,
// second-order one-sided at the two wall cells.
inline Eigen::VectorXd gradient(const Eigen::VectorXd& h, double dx) {
    const int n = static_cast<int>(h.size());
    Eigen::VectorXd g(n);
    if (n < 3) {
        for (int j = 0; j < n; ++j) g[j] = 0.0;
        if (n == 2) g[0] = g[1] = (h[1] - h[0]) / dx;
        return g;
    }
    g[0] = (-3.0 * h[0] + 4.0 * h[1] - h[2]) / (2.0 * dx);
    for (int j = 1; j < n - 1; ++j) g[j] = (h[j + 1] - h[j - 1]) / (2.0 * dx);
    g[n - 1] = (3.0 * h[n - 1] - 4.0 * h[n - 2] + h[n - 3]) / (2.0 * dx);
    return g;
}

// Second difference with even (Neumann) ghost reflection; this is the
// operator the cosine basis diagonalizes.
inline Eigen::VectorXd second_difference(const Eigen::VectorXd& h, double dx) {
    const int n = static_cast<int>(h.size());
    Eigen::VectorXd d2(n);
    const double s = 1.0 / (dx * dx);
    for (int j = 0; j < n; ++j) {
        const double left = (j > 0) ? h[j - 1] : h[0];
        const double right = (j < n - 1) ? h[j + 1] : h[n - 1];
        d2[j] = s * (left - 2.0 * h[j] + right);
    }
    return d2;
}

// Graph curvature h'' (1 + h'^2)^{-3/2}, sign fixed so the linearization at
// h = 0 is the second derivative.
inline Eigen::VectorXd curvature(const HeightField& h) {
    h.require_admissible();
    if (h.size() < 4) throw ConfigError("curvature needs at least 4 nodes");
    const Eigen::VectorXd g = gradient(h.values(), h.dx());
    const Eigen::VectorXd d2 = second_difference(h.values(), h.dx());
    Eigen::VectorXd k(h.size());
    for (int j = 0; j < h.size(); ++j)
        k[j] = d2[j] * std::pow(1.0 + g[j] * g[j], -1.5);
    return k;
}

// K(h) = P(h) h + Q(h). In the straight container the tangential correction
// vanishes, so P(h) is the second-difference stencil scaled per node by
// (1 + h'^2)^{-3/2} and Q is identically zero.
struct CurvatureDecomposition {
    Eigen::VectorXd principal_coeff;  // per-node multiplier of the 2nd difference
    Eigen::VectorXd remainder;        // Q(h)
    double dx;

    Eigen::VectorXd apply(const Eigen::VectorXd& h) const {
        return (principal_coeff.array() * second_difference(h, dx).array()).matrix() +
               remainder;
    }
};

inline CurvatureDecomposition curvature_decomposition(const HeightField& h) {
    h.require_admissible();
    const Eigen::VectorXd g = gradient(h.values(), h.dx());
    CurvatureDecomposition d;
    d.dx = h.dx();
    d.principal_coeff = (1.0 + g.array().square()).pow(-1.5).matrix();
    d.remainder = Eigen::VectorXd::Zero(h.size());
    return d;
}

// Unit normal on the graph (from the lower phase to the upper) and the
// kinematic factor sqrt(1 + h'^2) relating dh/dt to the normal velocity.
struct NormalData {
    Eigen::MatrixX2d normal;   // row j = (n_x, n_y) at x_j
    Eigen::VectorXd factor;    // sqrt(1 + h'^2) >= 1
};

inline NormalData normal_and_velocity_factor(const HeightField& h) {
    h.require_admissible();
    const Eigen::VectorXd g = gradient(h.values(), h.dx());
    NormalData out;
    out.normal.resize(h.size(), 2);
    out.factor.resize(h.size());
    for (int j = 0; j < h.size(); ++j) {
        const double f = std::sqrt(1.0 + g[j] * g[j]);
        out.factor[j] = f;
        out.normal(j, 0) = -g[j] / f;
        out.normal(j, 1) = 1.0 / f;
    }
    return out;
}

// Vertical component of the container-specialized Hanzawa map
//   Theta_h(x, y) = (x, y - chi((y - h(x))/a) h(x)),
// which carries the graph of h onto Sigma and is the identity near the walls.
inline double hanzawa_vertical(const ContainerGeometry& geom, double h_at_x, double y) {
    const double a = geom.tube_half_width();
    return y - cutoff::chi((y - h_at_x) / a) * h_at_x;
}

// Metric coefficients of the pulled-back Laplacian on one phase rectangle,
// sampled on the (my+1) x nx reference grid; row j sits at distance j*dy
// from Sigma, measured into the phase.
struct PhaseCoefficients {
    int nx = 0, my = 0;
    double dy = 0.0, depth = 0.0;
    Eigen::MatrixXd k11, k12, k22, jphi;  // (my+1) x nx
};

struct HanzawaMap {
    ContainerGeometry geom;
    Eigen::VectorXd h;    // heights on the nx-node grid
    Eigen::VectorXd hp;   // slopes at the same nodes
    double dx = 0.0;
    double min_det = 1.0; // min over both phases of det DTheta_h
    PhaseCoefficients upper, lower;
};

namespace detail {

// Invert y - chi((y-h)/a) h = yhat for y; the map is strictly increasing in y.
inline double hanzawa_preimage(const ContainerGeometry& geom, double h, double yhat) {
    if (h == 0.0) return yhat;
    const double a = geom.tube_half_width();
    double lo = yhat - std::abs(h);
    double hi = yhat + std::abs(h);
    double y = yhat;
    for (int it = 0; it < 100; ++it) {
        const double s = (y - h) / a;
        const double f = y - cutoff::chi(s) * h - yhat;
        if (std::abs(f) < 1e-15 * (1.0 + std::abs(yhat))) return y;
        if (f > 0.0) hi = y; else lo = y;
        const double fp = 1.0 - cutoff::chi_prime(s) * h / a;
        double ynext = y - f / fp;
        if (!(ynext > lo && ynext < hi)) ynext = 0.5 * (lo + hi);
        y = ynext;
    }
    return y;
}

inline PhaseCoefficients build_phase(const ContainerGeometry& geom,
                                     const Eigen::VectorXd& h,
                                     const Eigen::VectorXd& hp,
                                     int my, double depth, int orientation,
                                     double& min_det) {
    const int nx = static_cast<int>(h.size());
    const double a = geom.tube_half_width();
    PhaseCoefficients pc;
    pc.nx = nx;
    pc.my = my;
    pc.depth = depth;
    pc.dy = depth / my;
    pc.k11.resize(my + 1, nx);
    pc.k12.resize(my + 1, nx);
    pc.k22.resize(my + 1, nx);
    pc.jphi.resize(my + 1, nx);
    for (int j = 0; j <= my; ++j) {
        const double yhat = orientation * j * pc.dy;
        for (int i = 0; i < nx; ++i) {
            const double y = hanzawa_preimage(geom, h[i], yhat);
            const double s = (y - h[i]) / a;
            const double c = cutoff::chi(s);
            const double cp = cutoff::chi_prime(s);
            const double beta = 1.0 - cp * h[i] / a;
            min_det = std::min(min_det, beta);
            const double alpha = hp[i] * (cp * h[i] / a - c);
            pc.k11(j, i) = 1.0 / beta;
            // stored in the phase-local frame (distance from Sigma increases
            // with j), which flips the mixed coefficient for the lower phase
            pc.k12(j, i) = orientation * alpha / beta;
            pc.k22(j, i) = (alpha * alpha + beta * beta) / beta;
            pc.jphi(j, i) = 1.0 / beta;
        }
    }
    return pc;
}

} // namespace detail

inline HanzawaMap build_hanzawa(const HeightField& h, int my_plus, int my_minus) {
    h.require_admissible();
    if (my_plus < 2 || my_minus < 2)
        throw ConfigError("hanzawa map needs at least 2 cells per phase");
    const ContainerGeometry& geom = h.geometry();
    HanzawaMap map{geom, h.values(), gradient(h.values(), h.dx()), h.dx(), 1.0, {}, {}};
    map.upper = detail::build_phase(geom, map.h, map.hp, my_plus,
                                    geom.depth_plus, +1, map.min_det);
    map.lower = detail::build_phase(geom, map.h, map.hp, my_minus,
                                    geom.depth_minus, -1, map.min_det);
    const double bound = 1.0 - 5.0 * h.max_abs() / geom.tube_half_width();
    if (!(map.min_det > 0.0) || map.min_det < bound - 1e-12)
        throw DegenerateMapError("hanzawa map degenerate: min det DTheta = " +
                                 std::to_string(map.min_det));
    return map;
}

// Identity map on the reference rectangles, used for all h = 0 solves.
inline HanzawaMap identity_hanzawa(const ContainerGeometry& geom, int nx,
                                   int my_plus, int my_minus) {
    return build_hanzawa(HeightField::zero(geom, nx), my_plus, my_minus);
}

} // namespace msflow
