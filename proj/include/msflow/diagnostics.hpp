#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "msflow/elliptic.hpp"
#include "msflow/evolution.hpp"
#include "msflow/spectral.hpp"

namespace msflow {

// Discrete linearization assembled column-by-column through the full elliptic
// pipeline, expressed in the cosine basis. The analytic strip symbol is the
// independent oracle; nothing here reuses it.
inline Eigen::MatrixXd assemble_A0(const ContainerGeometry& geom, int n_modes,
                                   int elliptic_nx, int elliptic_my) {
    if (elliptic_nx < 32 || elliptic_my < 32)
        throw ConfigError("assemble_A0 needs elliptic resolution >= 32");
    A0Operator op(geom, n_modes, elliptic_nx, elliptic_my, elliptic_my);
    CosineBasis basis(n_modes);
    Eigen::MatrixXd mat(n_modes, n_modes);
    for (int m = 0; m < n_modes; ++m) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n_modes);
        e[m] = 1.0;
        mat.col(m) = basis.forward(op.apply(basis.inverse(e)));
    }
    return mat;
}

struct SpectrumReport {
    Eigen::VectorXd eigenvalues;       // of the symmetrized matrix, ascending
    int kernel_dim = 0;                // eigenvalues below 1e-6 * a_1
    double kernel_constancy = 0.0;     // max deviation of kernel vector from const
    double asymmetry = 0.0;            // ||M - M^T|| / ||M||
    double max_offdiag_leakage = 0.0;  // max |offdiag| / diag per column
    Eigen::VectorXd symbol_rel_error;  // |diag_m - a_m| / a_m, m >= 1
    int rank = 0;                      // eigenvalues above 1e-6 * a_max
    bool ok = false;
};

inline SpectrumReport spectrum_check(const Eigen::MatrixXd& mat,
                                     const ContainerGeometry& geom) {
    const int n = static_cast<int>(mat.rows());
    if (n < 2 || mat.cols() != n) throw ConfigError("spectrum_check needs square matrix");
    const SymbolTable table = SymbolTable::from_geometry(geom, n);
    SpectrumReport rep;
    rep.asymmetry = (mat - mat.transpose()).norm() / mat.norm();
    const Eigen::MatrixXd sym = 0.5 * (mat + mat.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw SolverError("eigensolver failed");
    rep.eigenvalues = es.eigenvalues();

    const double a1 = table.a[1];
    const double amax = table.a[n - 1];
    for (int i = 0; i < n; ++i) {
        if (std::abs(rep.eigenvalues[i]) < 1e-6 * a1) ++rep.kernel_dim;
        if (rep.eigenvalues[i] > 1e-6 * amax) ++rep.rank;
    }
    // kernel vector, mapped to value space: should be constant
    CosineBasis basis(n);
    const Eigen::VectorXd kv = basis.inverse(es.eigenvectors().col(0));
    rep.kernel_constancy =
        (kv.array() - kv.mean()).abs().maxCoeff() / kv.norm();

    rep.symbol_rel_error.resize(n);
    rep.symbol_rel_error[0] = std::abs(mat(0, 0));
    double leak = 0.0;
    for (int m = 0; m < n; ++m) {
        if (m >= 1)
            rep.symbol_rel_error[m] = std::abs(mat(m, m) - table.a[m]) / table.a[m];
        double off = 0.0;
        for (int l = 0; l < n; ++l)
            if (l != m) off = std::max(off, std::abs(mat(l, m)));
        if (m >= 1) leak = std::max(leak, off / std::abs(mat(m, m)));
    }
    rep.max_offdiag_leakage = leak;

    rep.ok = rep.kernel_dim == 1 && rep.rank == n - 1 &&
             rep.eigenvalues[0] > -1e-9 * amax &&
             rep.kernel_constancy < 1e-6;
    return rep;
}

struct DecayFit {
    double rate = 0.0;       // positive for decay
    double residual = 0.0;   // RMS residual of the linear fit in log space
    int samples_used = 0;
};

// Least-squares slope of log(deviation) versus t over the asymptotic tail:
// samples after the deviation first drops below 10% of its initial value,
// restricted to the last half of that window by time. Deviations below
// 1e-14 are truncated away.
inline DecayFit fit_decay_rate(const std::vector<SimulationState>& trajectory) {
    std::vector<double> t, y;
    const double initial = trajectory.empty() ? 0.0 : trajectory.front().diag.deviation;
    double t_enter = -1.0;
    for (const auto& s : trajectory) {
        if (s.diag.deviation < 0.1 * initial && t_enter < 0.0) t_enter = s.time;
    }
    if (t_enter < 0.0)
        throw ConfigError("trajectory never reaches the asymptotic regime");
    const double t_end = trajectory.back().time;
    const double t_start = 0.5 * (t_enter + t_end);
    for (const auto& s : trajectory) {
        if (s.time < t_start) continue;
        if (s.diag.deviation < 1e-14) break;
        t.push_back(s.time);
        y.push_back(std::log(s.diag.deviation));
    }
    const int n = static_cast<int>(t.size());
    if (n < 10) throw ConfigError("decay fit needs >= 10 tail samples");
    double tm = 0.0, ym = 0.0;
    for (int i = 0; i < n; ++i) { tm += t[i]; ym += y[i]; }
    tm /= n; ym /= n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (t[i] - tm) * (t[i] - tm);
        sxy += (t[i] - tm) * (y[i] - ym);
    }
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = y[i] - (ym + slope * (t[i] - tm));
        ss += r * r;
    }
    DecayFit fit;
    fit.rate = -slope;
    fit.residual = std::sqrt(ss / n);
    fit.samples_used = n;
    return fit;
}

} // namespace msflow
