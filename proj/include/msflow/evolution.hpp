#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "msflow/elliptic.hpp"
#include "msflow/geometry.hpp"
#include "msflow/spectral.hpp"

namespace msflow {

struct DiagnosticsRecord {
    double volume = 0.0;        // integral of h over Sigma
    double energy = 0.0;        // discrete perimeter sum sqrt(1+h'^2) dx
    double deviation = 0.0;     // max |h - mean|
    double inst_rate = 0.0;     // -d/dt log(deviation), from the last interval
    double mode0_rhs = 0.0;     // measured mode-0 forcing before freezing it
};

inline DiagnosticsRecord make_diagnostics(const HeightField& h) {
    DiagnosticsRecord r;
    const Eigen::VectorXd& v = h.values();
    r.volume = v.sum() * h.dx();
    const Eigen::VectorXd g = gradient(v, h.dx());
    r.energy = (1.0 + g.array().square()).sqrt().sum() * h.dx();
    r.deviation = (v.array() - v.mean()).abs().maxCoeff();
    return r;
}

struct SimulationState {
    double time = 0.0;
    HeightField h;
    long steps = 0;
    DiagnosticsRecord diag;
};

enum class Scheme { ImexEuler, ImexBdf2 };

struct StepperConfig {
    double dt = 1e-4;
    Scheme scheme = Scheme::ImexEuler;
    int elliptic_nx = 128;       // elliptic grid cells along Sigma
    int elliptic_my = 128;       // elliptic grid cells per phase depth
    double safety = 0.9;         // admissibility gate at safety * a/5

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("stepper dt must be > 0");
        if (!(safety > 0.0 && safety < 1.0))
            throw ConfigError("stepper safety margin must lie in (0,1)");
        if (elliptic_nx < 8 || elliptic_my < 8)
            throw ConfigError("elliptic resolutions must be >= 8");
    }
};

// Full nonlinear right-hand side F(h) = -sqrt(1+h'^2) [[n . grad mu]] with
// mu solving the transformed two-phase problem with Dirichlet datum K(h).
// The elliptic solve runs on a finer grid; the state grid sees the cosine
// projection of the result.
inline Eigen::VectorXd nonlinear_rhs(const HeightField& h, int elliptic_nx,
                                     int elliptic_my) {
    h.require_admissible();
    const ContainerGeometry& geom = h.geometry();
    const int n = h.size();
    const Eigen::VectorXd fine_values =
        CosineBasis::resample(h.values(), elliptic_nx);
    HeightField hf(geom, fine_values);
    hf.require_admissible();
    const Eigen::VectorXd kappa = curvature(hf);
    const HanzawaMap map = build_hanzawa(hf, elliptic_my, elliptic_my);
    TwoPhaseSolver solver(map, 0.0);
    const PotentialField mu = solver.solve(kappa);
    const Eigen::VectorXd jump = jump_conormal(mu, map);
    const NormalData nd = normal_and_velocity_factor(hf);
    const Eigen::VectorXd rhs_fine = -(nd.factor.array() * jump.array()).matrix();
    return CosineBasis::resample(rhs_fine, n);
}

// IMEX stepper: the linearized symbol a_m is inverted in closed form per
// cosine mode, the full nonlinear residual F(h) is explicit. Updates are
// applied in increment form so equilibria are reproduced bit-exactly.
// Mode 0 is frozen, which enforces exact volume conservation; the measured
// mode-0 forcing is reported as a consistency diagnostic.
class EvolutionDriver {
public:
    EvolutionDriver(const ContainerGeometry& geom, int n, StepperConfig cfg)
        : cfg_(cfg), basis_(n), table_(SymbolTable::from_geometry(geom, n)) {
        cfg_.validate();
    }

    const StepperConfig& config() const { return cfg_; }
    void set_dt(double dt) {
        cfg_.dt = dt;
        cfg_.validate();
        reset_history();
    }
    void reset_history() { have_prev_ = false; }

    SimulationState step(const SimulationState& state) {
        state.h.require_admissible();
        const int n = basis_.size();
        const double dt = cfg_.dt;
        const Eigen::VectorXd f =
            nonlinear_rhs(state.h, cfg_.elliptic_nx, cfg_.elliptic_my);
        const Eigen::VectorXd fhat = basis_.forward(f);

        Eigen::VectorXd corr = Eigen::VectorXd::Zero(n);
        const bool bdf2 = cfg_.scheme == Scheme::ImexBdf2 && have_prev_;
        if (bdf2) {
            const Eigen::VectorXd dhat =
                basis_.forward(state.h.values() - prev_values_);
            for (int m = 1; m < n; ++m) {
                const double a = table_.a[m];
                corr[m] = (dhat[m] * (1.0 + 2.0 * dt * a) +
                           2.0 * dt * (2.0 * fhat[m] - prev_fhat_[m])) /
                          (3.0 + 2.0 * dt * a);
            }
        } else {
            for (int m = 1; m < n; ++m)
                corr[m] = dt * fhat[m] / (1.0 + dt * table_.a[m]);
        }

        Eigen::VectorXd next = state.h.values() + basis_.inverse(corr);
        const double gate =
            cfg_.safety * state.h.geometry().admissible_bound();
        const double max_abs = next.lpNorm<Eigen::Infinity>();
        if (max_abs >= gate) throw StepRejectedError(max_abs, gate);

        SimulationState out{state.time + dt,
                            HeightField(state.h.geometry(), std::move(next)),
                            state.steps + 1, {}};
        out.diag = make_diagnostics(out.h);
        out.diag.mode0_rhs = fhat[0];
        if (state.diag.deviation > 1e-300 && out.diag.deviation > 1e-300)
            out.diag.inst_rate =
                -(std::log(out.diag.deviation) - std::log(state.diag.deviation)) / dt;
        prev_values_ = state.h.values();
        prev_fhat_ = fhat;
        have_prev_ = true;
        return out;
    }

private:
    StepperConfig cfg_;
    CosineBasis basis_;
    SymbolTable table_;
    bool have_prev_ = false;
    Eigen::VectorXd prev_values_, prev_fhat_;
};

// Single step entry point; BDF2 requests fall back to an Euler start since a
// lone step has no history.
inline SimulationState step(const SimulationState& state, const StepperConfig& cfg) {
    EvolutionDriver driver(state.h.geometry(), state.h.size(), cfg);
    return driver.step(state);
}

// Fixed-step run with rejection halving (at most 20 halvings over the run).
// Records a state every `output_every` accepted steps plus the final state.
inline std::vector<SimulationState> run(const HeightField& h0, double t_final,
                                        const StepperConfig& cfg,
                                        int output_every = 1) {
    if (!(t_final > 0.0)) throw ConfigError("run requires T_final > 0");
    if (output_every < 1) throw ConfigError("output cadence must be >= 1");
    h0.require_admissible();
    EvolutionDriver driver(h0.geometry(), h0.size(), cfg);

    SimulationState state{0.0, h0, 0, make_diagnostics(h0)};
    std::vector<SimulationState> trajectory{state};
    int halvings = 0;
    const double t_eps = 1e-12 * t_final;
    while (state.time < t_final - t_eps) {
        double dt = driver.config().dt;
        if (state.time + dt > t_final) {
            dt = t_final - state.time;
            driver.set_dt(dt);
        }
        try {
            state = driver.step(state);
        } catch (const StepRejectedError& e) {
            if (++halvings > 20)
                throw SimulationError(
                    "step-size halvings exhausted at t = " +
                    std::to_string(state.time) + " (max|h| = " +
                    std::to_string(e.max_abs()) + ")");
            driver.set_dt(driver.config().dt / 2.0);
            continue;
        }
        if (state.steps % output_every == 0 || state.time >= t_final - t_eps)
            trajectory.push_back(state);
    }
    return trajectory;
}

} // namespace msflow
