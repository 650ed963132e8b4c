#pragma once

#include <cmath>
#include <cstring>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "msflow/diagnostics.hpp"
#include "msflow/elliptic.hpp"
#include "msflow/evolution.hpp"
#include "msflow/spectral.hpp"

namespace msflow {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

struct AcceptanceOptions {
    ContainerGeometry geom{1.0, 1.0, 1.0};
    int n_modes = 64;            // height modes for the operator checks
    int operator_resolution = 256;   // elliptic grid for criterion 1/2
    int run_modes = 64;          // height grid for the nonlinear run
    int run_resolution = 96;     // elliptic grid for the nonlinear run
    int order_resolution = 256;  // elliptic grid for the stepper-order check
    unsigned seed = 20240817;
};

namespace detail {

inline HeightField single_mode(const ContainerGeometry& geom, int n, int m,
                               double amplitude) {
    Eigen::VectorXd v(n);
    for (int j = 0; j < n; ++j)
        v[j] = amplitude * std::cos(M_PI * m * (j + 0.5) / n);
    return HeightField(geom, v);
}

} // namespace detail

inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                                   std::ostream& log) {
    std::vector<CriterionResult> results;
    auto record = [&](int id, const std::string& name, bool pass,
                      const std::string& detail) {
        results.push_back({id, name, pass, detail});
        log << (pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": "
            << detail << "\n";
        log.flush();
    };

    const ContainerGeometry& geom = opt.geom;
    const double a = geom.tube_half_width();
    const double a1 = symbol_strip(M_PI / geom.width, geom);

    // --- 1 & 2: assembled linearization vs the strip symbol, spectral structure
    {
        const Eigen::MatrixXd mat = assemble_A0(geom, opt.n_modes,
                                                opt.operator_resolution,
                                                opt.operator_resolution);
        const SymbolTable table = SymbolTable::from_geometry(geom, opt.n_modes);
        double max_diag_err = 0.0;
        for (int m = 1; m <= 16 && m < opt.n_modes; ++m)
            max_diag_err = std::max(
                max_diag_err, std::abs(mat(m, m) - table.a[m]) / table.a[m]);
        double leak = 0.0;
        for (int m = 1; m < opt.n_modes; ++m) {
            double off = 0.0;
            for (int l = 0; l < opt.n_modes; ++l)
                if (l != m) off = std::max(off, std::abs(mat(l, m)));
            leak = std::max(leak, off / std::abs(mat(m, m)));
        }
        ContainerGeometry deep(geom.width, 10.0 * geom.width, 10.0 * geom.width);
        double hs_err = 0.0;
        for (int m = 1; m <= 16; ++m) {
            const double k = M_PI * m / geom.width;
            hs_err = std::max(hs_err, std::abs(symbol_strip(k, deep) /
                                               (2.0 * k * k * k) - 1.0));
        }
        record(1, "symbol fidelity",
               max_diag_err <= 0.02 && leak <= 0.01 && hs_err <= 1e-4,
               "diag err " + std::to_string(max_diag_err) + " (<=0.02), leakage " +
                   std::to_string(leak) + " (<=0.01), half-space dev " +
                   std::to_string(hs_err) + " (<=1e-4)");

        const SpectrumReport rep = spectrum_check(mat, geom);
        record(2, "spectral structure",
               rep.kernel_dim == 1 && rep.rank == opt.n_modes - 1 &&
                   rep.eigenvalues[0] > -1e-9 * table.a[opt.n_modes - 1] &&
                   rep.kernel_constancy < 1e-6,
               "kernel dim " + std::to_string(rep.kernel_dim) + ", rank " +
                   std::to_string(rep.rank) + "/" +
                   std::to_string(opt.n_modes - 1) + ", min eig " +
                   std::to_string(rep.eigenvalues[0]) + ", kernel constancy " +
                   std::to_string(rep.kernel_constancy));
    }

    // --- 3-6: one nonlinear run, amplitude 0.05 a, 1000 accepted steps to 5/a1
    {
        const int n = opt.run_modes;
        const HeightField h0 = detail::single_mode(geom, n, 1, 0.05 * a);
        StepperConfig cfg;
        cfg.scheme = Scheme::ImexEuler;
        cfg.elliptic_nx = opt.run_resolution;
        cfg.elliptic_my = opt.run_resolution;
        const double t_final = 5.0 / a1;
        cfg.dt = t_final / 1000.0;
        const auto traj = run(h0, t_final, cfg, 1);

        const double vol0 = traj.front().diag.volume;
        double vol_drift = 0.0;
        int energy_violations = 0;
        for (size_t i = 0; i < traj.size(); ++i) {
            vol_drift = std::max(vol_drift,
                                 std::abs(traj[i].diag.volume - vol0));
            if (i > 0 &&
                traj[i].diag.energy > traj[i - 1].diag.energy + 1e-10)
                ++energy_violations;
        }
        const double vol_rel = vol_drift / (geom.width * a);
        record(3, "volume conservation", vol_rel <= 1e-8,
               "relative drift " + full_precision(vol_rel) + " (<=1e-8) over " +
                   std::to_string(traj.back().steps) + " steps");
        record(4, "energy dissipation", energy_violations == 0,
               std::to_string(energy_violations) +
                   " perimeter increases beyond 1e-10 slack");
        const DecayFit fit = fit_decay_rate(traj);
        record(5, "exponential convergence",
               std::abs(fit.rate - a1) / a1 <= 0.10 && fit.residual <= 1e-2,
               "rate " + std::to_string(fit.rate) + " vs a1 " +
                   std::to_string(a1) + " (rel " +
                   std::to_string(std::abs(fit.rate - a1) / a1) +
                   " <=0.1), fit residual " + full_precision(fit.residual));
        const double mean_err =
            std::abs(traj.back().h.mean() - h0.mean());
        record(6, "mean-value limit", mean_err <= 1e-6 * a,
               "|final mean - initial mean| = " + full_precision(mean_err) +
                   " (<= " + full_precision(1e-6 * a) + ")");
    }

    // --- 7: scaling identity over seeded samples
    {
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> uxi(0.05, 20.0), uw(0.05, 20.0);
        Eigen::VectorXd xis(100), oms(100);
        for (int i = 0; i < 100; ++i) { xis[i] = uxi(rng); oms[i] = uw(rng); }
        const double err = scaling_identity_check(xis, oms);
        record(7, "scaling identity", err <= 1e-12,
               "max relative error " + full_precision(err) + " (<=1e-12)");
    }

    // --- 8: shifted elliptic solve converges at second order
    {
        const double eta = 4.0;
        const double k = M_PI / geom.width;
        const double kap = std::sqrt(eta + k * k);
        std::vector<double> errs;
        std::vector<int> res = {32, 64, 128, 256};
        for (int r : res) {
            const HanzawaMap map = identity_hanzawa(geom, r, r, r);
            TwoPhaseSolver solver(map, eta);
            Eigen::VectorXd g(r);
            for (int i = 0; i < r; ++i)
                g[i] = std::cos(k * (i + 0.5) * geom.width / r);
            const PotentialField pf = solver.solve(g);
            double err = 0.0;
            for (int j = 0; j <= map.upper.my; ++j)
                for (int i = 0; i < r; ++i) {
                    const double y = j * map.upper.dy;
                    const double exact = g[i] *
                        std::cosh(kap * (geom.depth_plus - y)) /
                        std::cosh(kap * geom.depth_plus);
                    err = std::max(err, std::abs(pf.upper(j, i) - exact));
                }
            for (int j = 0; j <= map.lower.my; ++j)
                for (int i = 0; i < r; ++i) {
                    const double y = j * map.lower.dy;
                    const double exact = g[i] *
                        std::cosh(kap * (geom.depth_minus - y)) /
                        std::cosh(kap * geom.depth_minus);
                    err = std::max(err, std::abs(pf.lower(j, i) - exact));
                }
            errs.push_back(err);
        }
        const double slope =
            std::log2(errs[errs.size() - 2] / errs.back());
        record(8, "shifted elliptic formula",
               slope >= 1.7 && slope <= 2.3,
               "errors " + full_precision(errs[1]) + " -> " +
                   full_precision(errs.back()) + ", finest order " +
                   std::to_string(slope) + " (2 +/- 0.3)");
    }

    // --- 9: stepper order against the exact mode propagator
    {
        const int n = 32;
        const double eps = 1e-6 * a;
        const HeightField h0 = detail::single_mode(geom, n, 1, eps);
        const double t_final = 1.0 / a1;
        const HeightField ref = linear_propagate(h0, t_final);
        auto final_error = [&](Scheme scheme, int steps) {
            StepperConfig cfg;
            cfg.scheme = scheme;
            cfg.elliptic_nx = opt.order_resolution;
            cfg.elliptic_my = opt.order_resolution;
            cfg.dt = t_final / steps;
            const auto traj = run(h0, t_final, cfg, steps);
            return (traj.back().h.values() - ref.values())
                       .lpNorm<Eigen::Infinity>() / eps;
        };
        auto slope_for = [&](Scheme scheme) {
            const double e1 = final_error(scheme, 5);
            const double e2 = final_error(scheme, 10);
            const double e3 = final_error(scheme, 20);
            return std::make_pair(0.5 * (std::log2(e1 / e2) + std::log2(e2 / e3)),
                                  e3);
        };
        const auto [s_euler, ee] = slope_for(Scheme::ImexEuler);
        const auto [s_bdf2, eb] = slope_for(Scheme::ImexBdf2);
        record(9, "stepper order",
               s_euler >= 0.7 && s_euler <= 1.3 && s_bdf2 >= 1.7 && s_bdf2 <= 2.3,
               "euler slope " + std::to_string(s_euler) +
                   " (1 +/- 0.3), bdf2 slope " + std::to_string(s_bdf2) +
                   " (2 +/- 0.3)");
    }

    // --- 10: constants are bit-exact fixed points
    {
        const int n = 32;
        const HeightField h0(geom, Eigen::VectorXd::Constant(n, 0.05 * a));
        StepperConfig cfg;
        cfg.dt = 1e-3;
        cfg.elliptic_nx = 64;
        cfg.elliptic_my = 64;
        const auto traj = run(h0, 100 * cfg.dt, cfg, 100);
        const bool identical =
            traj.back().steps == 100 &&
            std::memcmp(traj.back().h.values().data(), h0.values().data(),
                        sizeof(double) * n) == 0;
        record(10, "equilibrium fixed points", identical,
               identical ? "constant state bit-identical after 100 steps"
                         : "constant state drifted");
    }

    return results;
}

} // namespace msflow
