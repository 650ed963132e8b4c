// Batch front-end: simulate | spectrum | symbol | verify.
// Configuration comes from an optional key=value file plus flags; flags win.
// Every run writes a manifest echoing the fully-resolved configuration.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "msflow/diagnostics.hpp"
#include "msflow/elliptic.hpp"
#include "msflow/evolution.hpp"
#include "msflow/io.hpp"
#include "msflow/spectral.hpp"
#include "msflow/verify.hpp"

namespace {

using namespace msflow;

struct Options {
    double width = 1.0, depth_plus = 1.0, depth_minus = 1.0;
    int modes = 64;
    int elliptic_nx = 128, elliptic_my = 128;
    std::string outdir;

    // simulate
    std::string ic = "zero";            // zero | mode | multimode | random
    int ic_mode = 1;
    double ic_amplitude = 0.0;
    std::string ic_modes;               // "m:amp,m:amp"
    unsigned seed = 1;
    double dt = 1e-4;
    std::string scheme = "euler";
    double t_final = 0.1;
    int output_every = 10;
    bool profiles = false;

    // spectrum / symbol
    std::string omegas = "0";
    bool dump_matrix = false;
};

std::string resolve_outdir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("MSFLOW_OUTDIR"); env && *env) return env;
    return ".";
}

ContainerGeometry make_geometry(const Options& o, std::vector<std::string>& errs) {
    double w = o.width > 0 ? o.width : 1, dp = o.depth_plus > 0 ? o.depth_plus : 1,
           dm = o.depth_minus > 0 ? o.depth_minus : 1;
    if (!(o.width > 0)) errs.push_back("width must be > 0");
    if (!(o.depth_plus > 0)) errs.push_back("depth-plus must be > 0");
    if (!(o.depth_minus > 0)) errs.push_back("depth-minus must be > 0");
    return ContainerGeometry(w, dp, dm);
}

void require_valid(const std::vector<std::string>& errs) {
    if (errs.empty()) return;
    std::string all = "invalid configuration:";
    for (const auto& e : errs) all += "\n  - " + e;
    throw ConfigError(all);
}

std::vector<std::pair<int, double>> parse_mode_list(const std::string& s,
                                                    std::vector<std::string>& errs) {
    std::vector<std::pair<int, double>> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            errs.push_back("ic-modes entry '" + item + "' is not m:amplitude");
            continue;
        }
        try {
            out.emplace_back(std::stoi(item.substr(0, colon)),
                             std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
            errs.push_back("ic-modes entry '" + item + "' is not m:amplitude");
        }
    }
    return out;
}

HeightField make_initial_condition(const Options& o, const ContainerGeometry& geom,
                                   std::vector<std::string>& errs) {
    const int n = o.modes;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(std::max(n, 2));
    if (o.ic == "zero") {
        // nothing
    } else if (o.ic == "mode") {
        for (int j = 0; j < n; ++j)
            v[j] = o.ic_amplitude * std::cos(M_PI * o.ic_mode * (j + 0.5) / n);
    } else if (o.ic == "multimode") {
        for (const auto& [m, amp] : parse_mode_list(o.ic_modes, errs))
            for (int j = 0; j < n; ++j)
                v[j] += amp * std::cos(M_PI * m * (j + 0.5) / n);
    } else if (o.ic == "random") {
        std::mt19937_64 rng(o.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int j = 0; j < n; ++j) v[j] = o.ic_amplitude * u(rng);
    } else {
        errs.push_back("unknown initial condition preset '" + o.ic + "'");
    }
    HeightField h(geom, v);
    if (!h.admissible())
        errs.push_back("initial condition inadmissible: max|h| = " +
                       std::to_string(h.max_abs()) + " >= a/5 = " +
                       std::to_string(geom.admissible_bound()));
    return h;
}

std::vector<std::pair<std::string, std::string>> manifest_entries(
    const Options& o, const std::string& command) {
    return {
        {"command", command},
        {"width", full_precision(o.width)},
        {"depth_plus", full_precision(o.depth_plus)},
        {"depth_minus", full_precision(o.depth_minus)},
        {"modes", std::to_string(o.modes)},
        {"elliptic_nx", std::to_string(o.elliptic_nx)},
        {"elliptic_my", std::to_string(o.elliptic_my)},
        {"ic", o.ic},
        {"ic_mode", std::to_string(o.ic_mode)},
        {"ic_amplitude", full_precision(o.ic_amplitude)},
        {"ic_modes", o.ic_modes},
        {"seed", std::to_string(o.seed)},
        {"dt", full_precision(o.dt)},
        {"scheme", o.scheme},
        {"t_final", full_precision(o.t_final)},
        {"output_every", std::to_string(o.output_every)},
        {"omegas", o.omegas},
    };
}

int cmd_simulate(const Options& o) {
    std::vector<std::string> errs;
    if (!(o.dt > 0)) errs.push_back("dt must be > 0");
    if (!(o.t_final > 0)) errs.push_back("t-final must be > 0");
    if (o.output_every < 1) errs.push_back("output-every must be >= 1");
    if (o.modes < 4) errs.push_back("modes must be >= 4");
    if (o.scheme != "euler" && o.scheme != "bdf2")
        errs.push_back("scheme must be euler or bdf2");
    if (o.elliptic_nx < 8 || o.elliptic_my < 8)
        errs.push_back("elliptic resolutions must be >= 8");
    ContainerGeometry geom = make_geometry(o, errs);
    HeightField h0 = errs.empty() ? make_initial_condition(o, geom, errs)
                                  : HeightField::zero(geom, std::max(o.modes, 2));
    require_valid(errs);

    StepperConfig cfg;
    cfg.dt = o.dt;
    cfg.scheme = o.scheme == "bdf2" ? Scheme::ImexBdf2 : Scheme::ImexEuler;
    cfg.elliptic_nx = o.elliptic_nx;
    cfg.elliptic_my = o.elliptic_my;

    const std::string dir = resolve_outdir(o.outdir);
    std::filesystem::create_directories(dir);
    write_manifest(dir + "/manifest.txt", manifest_entries(o, "simulate"));

    const auto traj = run(h0, o.t_final, cfg, o.output_every);

    const size_t rows = traj.size();
    Eigen::VectorXd t(rows), mean(rows), dev(rows), energy(rows), vol_drift(rows),
        rate(rows);
    const double vol0 = traj.front().diag.volume;
    for (size_t i = 0; i < rows; ++i) {
        t[i] = traj[i].time;
        mean[i] = traj[i].h.mean();
        dev[i] = traj[i].diag.deviation;
        energy[i] = traj[i].diag.energy;
        vol_drift[i] = traj[i].diag.volume - vol0;
        rate[i] = traj[i].diag.inst_rate;
    }
    write_columns(dir + "/trajectory.txt",
                  {"t", "mean", "max_dev", "energy", "volume_drift", "fitted_rate"},
                  {t, mean, dev, energy, vol_drift, rate});

    const HeightField& hf = traj.back().h;
    Eigen::VectorXd x(hf.size());
    for (int j = 0; j < hf.size(); ++j) x[j] = hf.node(j);
    write_columns(dir + "/final_state.txt", {"x", "h"}, {x, hf.values()});
    if (o.profiles) {
        for (size_t i = 0; i < rows; ++i)
            write_columns(dir + "/profile_" + std::to_string(i) + ".txt",
                          {"x", "h"}, {x, traj[i].h.values()});
    }

    std::vector<std::pair<std::string, std::string>> summary = {
        {"steps", std::to_string(traj.back().steps)},
        {"final_time", full_precision(traj.back().time)},
        {"final_mean", full_precision(traj.back().h.mean())},
        {"final_deviation", full_precision(traj.back().diag.deviation)},
        {"volume_drift", full_precision(traj.back().diag.volume - vol0)},
    };
    try {
        const DecayFit fit = fit_decay_rate(traj);
        summary.emplace_back("fitted_rate", full_precision(fit.rate));
        summary.emplace_back("fit_residual", full_precision(fit.residual));
    } catch (const Error&) {
        summary.emplace_back("fitted_rate", "n/a");
    }
    write_report(dir + "/summary.txt", summary);
    std::cout << "simulate: " << traj.back().steps << " steps to t = "
              << traj.back().time << ", outputs in " << dir << "\n";
    return 0;
}

int cmd_spectrum(const Options& o) {
    std::vector<std::string> errs;
    if (o.modes < 4) errs.push_back("modes must be >= 4");
    if (o.elliptic_nx < 32) errs.push_back("elliptic-nx must be >= 32 for spectrum");
    ContainerGeometry geom = make_geometry(o, errs);
    require_valid(errs);

    const std::string dir = resolve_outdir(o.outdir);
    std::filesystem::create_directories(dir);
    write_manifest(dir + "/manifest.txt", manifest_entries(o, "spectrum"));

    const Eigen::MatrixXd mat =
        assemble_A0(geom, o.modes, o.elliptic_nx, o.elliptic_my);
    const SpectrumReport rep = spectrum_check(mat, geom);

    std::vector<std::pair<std::string, std::string>> kv = {
        {"modes", std::to_string(o.modes)},
        {"kernel_dim", std::to_string(rep.kernel_dim)},
        {"rank", std::to_string(rep.rank)},
        {"kernel_constancy", full_precision(rep.kernel_constancy)},
        {"asymmetry", full_precision(rep.asymmetry)},
        {"max_offdiag_leakage", full_precision(rep.max_offdiag_leakage)},
        {"min_eigenvalue", full_precision(rep.eigenvalues[0])},
        {"max_eigenvalue", full_precision(rep.eigenvalues[o.modes - 1])},
        {"smallest_nonzero", full_precision(rep.eigenvalues[1])},
        {"invariants_ok", rep.ok ? "yes" : "no"},
    };
    write_report(dir + "/spectrum_report.txt", kv);
    if (o.dump_matrix) {
        std::vector<Eigen::VectorXd> cols;
        std::vector<std::string> names;
        for (int m = 0; m < o.modes; ++m) {
            cols.push_back(mat.col(m));
            names.push_back("col" + std::to_string(m));
        }
        write_columns(dir + "/matrix.txt", names, cols);
    }
    std::cout << "spectrum: kernel dim " << rep.kernel_dim << ", rank "
              << rep.rank << ", report in " << dir << "\n";
    return rep.ok ? 0 : 1;
}

int cmd_symbol(const Options& o) {
    std::vector<std::string> errs;
    if (o.modes < 2) errs.push_back("modes must be >= 2");
    std::vector<double> omegas;
    {
        std::stringstream ss(o.omegas);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                omegas.push_back(std::stod(item));
            } catch (const std::exception&) {
                errs.push_back("omega entry '" + item + "' is not a number");
            }
        }
        for (double w : omegas)
            if (w < 0) errs.push_back("omega values must be >= 0");
    }
    ContainerGeometry geom = make_geometry(o, errs);
    require_valid(errs);

    const std::string dir = resolve_outdir(o.outdir);
    std::filesystem::create_directories(dir);
    write_manifest(dir + "/manifest.txt", manifest_entries(o, "symbol"));

    const SymbolTable table = SymbolTable::from_geometry(geom, o.modes);
    std::vector<std::string> names = {"m", "k", "a_strip", "a_halfspace"};
    std::vector<Eigen::VectorXd> cols;
    Eigen::VectorXd m(o.modes), hs(o.modes);
    for (int i = 0; i < o.modes; ++i) {
        m[i] = i;
        hs[i] = symbol_halfspace(table.k[i], 0.0);
    }
    cols = {m, table.k, table.a, hs};
    for (double w : omegas) {
        Eigen::VectorXd aw(o.modes);
        for (int i = 0; i < o.modes; ++i) aw[i] = symbol_halfspace(table.k[i], w);
        names.push_back("a_omega_" + std::to_string(w));
        cols.push_back(aw);
    }
    write_columns(dir + "/symbol_table.txt", names, cols);
    std::cout << "symbol: wrote " << o.modes << " modes to " << dir << "\n";
    return 0;
}

int cmd_verify(const Options& o) {
    std::vector<std::string> errs;
    ContainerGeometry geom = make_geometry(o, errs);
    require_valid(errs);
    AcceptanceOptions opt;
    opt.geom = geom;
    const auto results = run_acceptance(opt, std::cout);
    int failures = 0;
    for (const auto& r : results)
        if (!r.pass) ++failures;
    std::cout << (failures == 0 ? "all criteria passed"
                                : std::to_string(failures) + " criteria failed")
              << "\n";
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"Mullins-Sekerka interface flow laboratory"};
    app.set_config("--config", "", "key=value configuration file");
    app.require_subcommand(1);

    app.add_option("--width", o.width, "container width W");
    app.add_option("--depth-plus", o.depth_plus, "depth of the upper phase");
    app.add_option("--depth-minus", o.depth_minus, "depth of the lower phase");
    app.add_option("--modes", o.modes, "height grid nodes / cosine modes");
    app.add_option("--elliptic-nx", o.elliptic_nx, "elliptic cells along Sigma");
    app.add_option("--elliptic-my", o.elliptic_my, "elliptic cells per phase");
    app.add_option("--outdir", o.outdir,
                   "output directory (env MSFLOW_OUTDIR if unset)");

    auto* sim = app.add_subcommand("simulate", "run the nonlinear evolution");
    sim->add_option("--ic", o.ic, "initial condition: zero|mode|multimode|random");
    sim->add_option("--ic-mode", o.ic_mode, "mode index for --ic mode");
    sim->add_option("--ic-amplitude", o.ic_amplitude, "amplitude");
    sim->add_option("--ic-modes", o.ic_modes, "multimode list m:amp,m:amp");
    sim->add_option("--seed", o.seed, "seed for --ic random");
    sim->add_option("--dt", o.dt, "time step");
    sim->add_option("--scheme", o.scheme, "euler | bdf2");
    sim->add_option("--t-final", o.t_final, "final time");
    sim->add_option("--output-every", o.output_every, "output cadence in steps");
    sim->add_flag("--profiles", o.profiles, "write per-snapshot height profiles");

    auto* spec = app.add_subcommand("spectrum", "assemble A0 and check its spectrum");
    spec->add_flag("--dump-matrix", o.dump_matrix, "also write the assembled matrix");

    auto* sym = app.add_subcommand("symbol", "emit the symbol table");
    sym->add_option("--omegas", o.omegas, "comma-separated shift rates");

    auto* ver = app.add_subcommand("verify", "run the acceptance suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(o);
        if (spec->parsed()) return cmd_spectrum(o);
        if (sym->parsed()) return cmd_symbol(o);
        if (ver->parsed()) return cmd_verify(o);
    } catch (const msflow::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const msflow::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
