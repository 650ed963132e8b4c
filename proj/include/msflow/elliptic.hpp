#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <optional>
#include <vector>

#include "msflow/geometry.hpp"
#include "msflow/spectral.hpp"

namespace msflow {

// Transformed chemical potential on the two fixed reference rectangles.
// Row 0 of each grid is the Sigma trace; row j of `upper` sits at height
// j*dy above Sigma, row j of `lower` at depth j*dy below.
struct PotentialField {
    Eigen::MatrixXd upper;   // (my+ + 1) x nx
    Eigen::MatrixXd lower;   // (my- + 1) x nx
    Eigen::VectorXd trace;   // Dirichlet datum on Sigma
    double dx = 0.0, dy_upper = 0.0, dy_lower = 0.0;
};

struct EllipticProblemSpec {
    HanzawaMap hanzawa;
    double shift = 0.0;                         // eta >= 0
    Eigen::VectorXd dirichlet;                  // g on Sigma, nx values
    std::optional<Eigen::MatrixXd> source_upper;  // f, same layout as the grids
    std::optional<Eigen::MatrixXd> source_lower;
};

namespace detail {

// One phase of the transformed problem: (eta Jphi - div K grad) u = Jphi f on
// the reference rectangle, Dirichlet on Sigma (j = 0), zero conormal on the
// other three walls via mirror ghosts. 9-point stencil in divergence form.
class PhaseSolver {
public:
    PhaseSolver(const PhaseCoefficients& pc, double dx, double eta)
        : pc_(pc), dx_(dx) {
        const int nx = pc.nx, my = pc.my;
        const int n = nx * my;
        const double dx2 = 1.0 / (dx_ * dx_), dy2 = 1.0 / (pc.dy * pc.dy);
        const double dxy = 1.0 / (4.0 * dx_ * pc.dy);
        std::vector<Eigen::Triplet<double>> ta, td;
        ta.reserve(static_cast<size_t>(n) * 9);

        for (int j = 1; j <= my; ++j) {
            for (int i = 0; i < nx; ++i) {
                const int row = idx(i, j);
                auto add = [&](int i2, int j2, double w) {
                    if (w == 0.0) return;
                    if (i2 < 0) i2 = -1 - i2;
                    if (i2 >= nx) i2 = 2 * nx - 1 - i2;
                    if (j2 > my) j2 = 2 * my - j2;
                    if (j2 == 0) {
                        // Dirichlet node: -w u moves to the right-hand side
                        td.emplace_back(row, i2, w);
                    } else {
                        ta.emplace_back(row, idx(i2, j2), -w);
                    }
                };

                // x fluxes
                const double ce = 0.5 * (k11(i, j) + k11(i + 1, j)) * dx2;
                const double cw = 0.5 * (k11(i - 1, j) + k11(i, j)) * dx2;
                add(i + 1, j, ce);
                add(i - 1, j, cw);
                add(i, j, -(ce + cw));
                // y fluxes
                const double cn = 0.5 * (k22(i, j) + k22(i, j + 1)) * dy2;
                const double cs = 0.5 * (k22(i, j - 1) + k22(i, j)) * dy2;
                add(i, j + 1, cn);
                add(i, j - 1, cs);
                add(i, j, -(cn + cs));
                // d/dx (K12 du/dy)
                const double ke = k12(i + 1, j) * dxy;
                const double kw = k12(i - 1, j) * dxy;
                add(i + 1, j + 1, ke);
                add(i + 1, j - 1, -ke);
                add(i - 1, j + 1, -kw);
                add(i - 1, j - 1, kw);
                // d/dy (K12 du/dx)
                const double kn = k12(i, j + 1) * dxy;
                const double ks = k12(i, j - 1) * dxy;
                add(i + 1, j + 1, kn);
                add(i - 1, j + 1, -kn);
                add(i + 1, j - 1, -ks);
                add(i - 1, j - 1, ks);
                // reaction term
                if (eta != 0.0) ta.emplace_back(row, row, eta * pc.jphi(j, i));
            }
        }
        matrix_.resize(n, n);
        matrix_.setFromTriplets(ta.begin(), ta.end());
        matrix_.makeCompressed();
        dirichlet_coupling_.resize(n, nx);
        dirichlet_coupling_.setFromTriplets(td.begin(), td.end());
        dirichlet_coupling_.makeCompressed();
        lu_.compute(matrix_);
        if (lu_.info() != Eigen::Success)
            throw SolverError("phase factorization failed");
    }

    // Solve for the interior rows given the Sigma trace and optional source;
    // returns the (my+1) x nx grid with row 0 = g.
    Eigen::MatrixXd solve(const Eigen::VectorXd& g,
                          const std::optional<Eigen::MatrixXd>& f) const {
        const int nx = pc_.nx, my = pc_.my;
        Eigen::VectorXd b = dirichlet_coupling_ * g;
        if (f) {
            if (f->rows() != my + 1 || f->cols() != nx)
                throw ConfigError("source grid shape mismatch");
            for (int j = 1; j <= my; ++j)
                for (int i = 0; i < nx; ++i)
                    b[idx(i, j)] += pc_.jphi(j, i) * (*f)(j, i);
        }
        Eigen::VectorXd u = lu_.solve(b);
        if (lu_.info() != Eigen::Success)
            throw SolverError("phase solve failed");
        const double resid = (matrix_ * u - b).norm();
        if (resid > 1e-10 * (1.0 + b.norm()))
            throw SolverError("phase solve residual too large: " +
                              std::to_string(resid));
        Eigen::MatrixXd grid(my + 1, nx);
        grid.row(0) = g.transpose();
        for (int j = 1; j <= my; ++j)
            for (int i = 0; i < nx; ++i)
                grid(j, i) = u[idx(i, j)];
        return grid;
    }

private:
    int idx(int i, int j) const { return (j - 1) * pc_.nx + i; }

    double k11(int i, int j) const { return coeff(pc_.k11, i, j, false); }
    double k22(int i, int j) const { return coeff(pc_.k22, i, j, false); }
    double k12(int i, int j) const { return coeff(pc_.k12, i, j, true); }

    double coeff(const Eigen::MatrixXd& m, int i, int j, bool odd_in_x) const {
        double sign = 1.0;
        if (i < 0) { i = -1 - i; if (odd_in_x) sign = -sign; }
        if (i >= pc_.nx) { i = 2 * pc_.nx - 1 - i; if (odd_in_x) sign = -sign; }
        if (j > pc_.my) j = 2 * pc_.my - j;
        return sign * m(j, i);
    }

    PhaseCoefficients pc_;
    double dx_ = 0.0;
    Eigen::SparseMatrix<double> matrix_;
    Eigen::SparseMatrix<double> dirichlet_coupling_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

} // namespace detail

// Two-phase solver bound to one Hanzawa map and shift; the factorizations are
// reused across right-hand sides (basis columns, repeated traces).
class TwoPhaseSolver {
public:
    TwoPhaseSolver(const HanzawaMap& map, double eta)
        : map_(map), eta_(eta) {
        if (eta < 0.0) throw ConfigError("elliptic shift must be >= 0");
        upper_ = std::make_unique<detail::PhaseSolver>(map.upper, map.dx, eta);
        lower_ = std::make_unique<detail::PhaseSolver>(map.lower, map.dx, eta);
    }

    PotentialField solve(const Eigen::VectorXd& g,
                         const std::optional<Eigen::MatrixXd>& f_upper = std::nullopt,
                         const std::optional<Eigen::MatrixXd>& f_lower = std::nullopt) const {
        if (g.size() != map_.h.size())
            throw ConfigError("dirichlet trace size mismatch");
        if (!g.allFinite()) throw ConfigError("dirichlet trace not finite");
        PotentialField pf;
        pf.trace = g;
        pf.dx = map_.dx;
        pf.dy_upper = map_.upper.dy;
        pf.dy_lower = map_.lower.dy;
        pf.upper = upper_->solve(g, f_upper);
        pf.lower = lower_->solve(g, f_lower);
        return pf;
    }

    const HanzawaMap& map() const { return map_; }

private:
    HanzawaMap map_;
    double eta_;
    std::unique_ptr<detail::PhaseSolver> upper_, lower_;
};

inline PotentialField solve_two_phase(const EllipticProblemSpec& spec) {
    TwoPhaseSolver solver(spec.hanzawa, spec.shift);
    return solver.solve(spec.dirichlet, spec.source_upper, spec.source_lower);
}

// Jump of the physical conormal derivative across the interface, sampled on
// Sigma: jump f = f(above) - f(below) in the direction of the upward normal.
// Uses second-order one-sided differences of the transformed field; the
// tangential trace derivative cancels between the phases, leaving
// sqrt(1 + h'^2) [d/dy] of the transformed potential.
inline Eigen::VectorXd jump_conormal(const PotentialField& pf, const HanzawaMap& map) {
    const int nx = static_cast<int>(pf.trace.size());
    if (pf.upper.cols() != nx || pf.lower.cols() != nx ||
        pf.upper.rows() < 3 || pf.lower.rows() < 3)
        throw ConfigError("potential field shape mismatch");
    const double trace_tol = 1e-9 * (1.0 + pf.trace.lpNorm<Eigen::Infinity>());
    if ((pf.upper.row(0).transpose() - pf.trace).lpNorm<Eigen::Infinity>() > trace_tol ||
        (pf.lower.row(0).transpose() - pf.trace).lpNorm<Eigen::Infinity>() > trace_tol)
        throw InconsistentFieldError("one-sided traces disagree with Dirichlet datum");
    Eigen::VectorXd jump(nx);
    for (int i = 0; i < nx; ++i) {
        const double g0 = pf.trace[i];
        const double dup = (-3.0 * g0 + 4.0 * pf.upper(1, i) - pf.upper(2, i)) /
                           (2.0 * pf.dy_upper);
        const double dlo = (3.0 * g0 - 4.0 * pf.lower(1, i) + pf.lower(2, i)) /
                           (2.0 * pf.dy_lower);
        const double hp = map.hp[i];
        jump[i] = std::sqrt(1.0 + hp * hp) * (dup - dlo);
    }
    return jump;
}

// Discrete linearized Mullins-Sekerka operator: compose the Neumann
// Laplacian on Sigma, the flat two-phase solve, and the conormal jump.
// Positive semi-definite under the fixed sign convention; constants are its
// kernel. Input lives on an n-node grid, the elliptic solve on a finer one.
class A0Operator {
public:
    A0Operator(const ContainerGeometry& geom, int n, int elliptic_nx,
               int elliptic_my_plus, int elliptic_my_minus)
        : geom_(geom), coarse_(n), fine_(elliptic_nx),
          map_(identity_hanzawa(geom, elliptic_nx, elliptic_my_plus,
                                elliptic_my_minus)),
          solver_(map_, 0.0) {
        dx_fine_ = geom.width / elliptic_nx;
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& g_h) const {
        const int n = coarse_.size(), nf = fine_.size();
        if (g_h.size() != n) throw ConfigError("apply_A0 input size mismatch");
        // prolong relative to a constant baseline: constants must land in
        // the kernel exactly, not up to transform round-off scaled by 1/dx^2
        const double base = g_h[0];
        Eigen::VectorXd c = coarse_.forward(g_h.array() - base);
        Eigen::VectorXd cf = Eigen::VectorXd::Zero(nf);
        cf.head(n) = std::sqrt(static_cast<double>(nf) / n) * c;
        const Eigen::VectorXd gf = fine_.inverse(cf).array() + base;
        const Eigen::VectorXd lap = second_difference(gf, dx_fine_);
        const PotentialField pf = solver_.solve(lap);
        const Eigen::VectorXd jump = jump_conormal(pf, map_);
        Eigen::VectorXd cj = fine_.forward(jump);
        return coarse_.inverse(std::sqrt(static_cast<double>(n) / nf) *
                               cj.head(n));
    }

    const ContainerGeometry& geometry() const { return geom_; }
    int modes() const { return coarse_.size(); }

private:
    ContainerGeometry geom_;
    CosineBasis coarse_, fine_;
    HanzawaMap map_;
    TwoPhaseSolver solver_;
    double dx_fine_ = 0.0;
};

inline Eigen::VectorXd apply_A0(const Eigen::VectorXd& g_h,
                                const ContainerGeometry& geom, int resolution) {
    A0Operator op(geom, static_cast<int>(g_h.size()), resolution, resolution,
                  resolution);
    return op.apply(g_h);
}

} // namespace msflow
