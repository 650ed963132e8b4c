#include <doctest.h>

#include <cmath>

#include "msflow/diagnostics.hpp"

using namespace msflow;

namespace {
const ContainerGeometry kGeom{1.0, 1.0, 1.0};
}

TEST_CASE("assembled matrix is consistent with the operator") {
    const int n = 16, res = 64;
    const Eigen::MatrixXd mat = assemble_A0(kGeom, n, res, res);
    CosineBasis basis(n);
    A0Operator op(kGeom, n, res, res, res);

    SUBCASE("constant column vanishes") {
        CHECK(mat.col(0).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
    SUBCASE("diagonal entry 1 matches the strip symbol within 2%") {
        const double a1 = symbol_strip(M_PI / kGeom.width, kGeom);
        CHECK(std::abs(mat(1, 1) - a1) / a1 <= 0.02);
    }
    SUBCASE("matrix action equals a direct operator application") {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e[2] = 1.0;
        const Eigen::VectorXd via_matrix = basis.inverse(mat * e);
        const Eigen::VectorXd direct = op.apply(basis.inverse(e));
        CHECK((via_matrix - direct).lpNorm<Eigen::Infinity>() <=
              1e-12 * (1.0 + direct.lpNorm<Eigen::Infinity>()));
    }
    SUBCASE("resolution gate") {
        CHECK_THROWS_AS(assemble_A0(kGeom, n, 16, 16), ConfigError);
    }
}

TEST_CASE("spectrum report") {
    const int n = 32, res = 96;
    const Eigen::MatrixXd mat = assemble_A0(kGeom, n, res, res);
    const SpectrumReport rep = spectrum_check(mat, kGeom);
    const SymbolTable table = SymbolTable::from_geometry(kGeom, n);

    CHECK(rep.kernel_dim == 1);
    CHECK(rep.rank == n - 1);
    CHECK(rep.kernel_constancy < 1e-6);
    CHECK(rep.eigenvalues[0] > -1e-9 * table.a[n - 1]);
    for (int i = 1; i < n; ++i) CHECK(rep.eigenvalues[i] > 0.0);
    // smallest nonzero eigenvalue is the spectral gap a1
    CHECK(std::abs(rep.eigenvalues[1] - table.a[1]) / table.a[1] <= 0.02);
    CHECK(rep.max_offdiag_leakage <= 0.01);
    CHECK(rep.asymmetry < 1e-6);
    CHECK(rep.ok);
}

TEST_CASE("decay-rate fit") {
    const int n = 32;
    const double a1 = symbol_strip(M_PI / kGeom.width, kGeom);
    auto make_traj = [&](const HeightField& h0, double t_final, int samples) {
        std::vector<SimulationState> traj;
        for (int i = 0; i <= samples; ++i) {
            const double t = t_final * i / samples;
            const HeightField h = linear_propagate(h0, t);
            traj.push_back({t, h, i, make_diagnostics(h)});
        }
        return traj;
    };
    Eigen::VectorXd v1(n), v3(n);
    for (int j = 0; j < n; ++j) {
        v1[j] = std::cos(M_PI * (j + 0.5) / n);
        v3[j] = std::cos(M_PI * 3 * (j + 0.5) / n);
    }

    SUBCASE("pure mode recovers the symbol rate") {
        const auto traj = make_traj(HeightField(kGeom, 0.01 * v1), 8.0 / a1, 200);
        const DecayFit fit = fit_decay_rate(traj);
        CHECK(std::abs(fit.rate - a1) / a1 <= 1e-6);
        CHECK(fit.residual < 1e-8);
        CHECK(fit.samples_used >= 10);
    }
    SUBCASE("slowest mode dominates the tail") {
        const auto traj =
            make_traj(HeightField(kGeom, 0.01 * (v1 + v3)), 8.0 / a1, 200);
        const DecayFit fit = fit_decay_rate(traj);
        CHECK(std::abs(fit.rate - a1) / a1 <= 1e-3);
    }
    SUBCASE("pre-asymptotic trajectories are refused") {
        const auto traj = make_traj(HeightField(kGeom, 0.01 * v1), 0.1 / a1, 50);
        CHECK_THROWS_AS(fit_decay_rate(traj), ConfigError);
    }
    SUBCASE("underflowing deviations are truncated away") {
        const auto traj = make_traj(HeightField(kGeom, 1e-4 * v1), 40.0 / a1, 400);
        const DecayFit fit = fit_decay_rate(traj);  // tail reaches ~1e-21
        CHECK(std::abs(fit.rate - a1) / a1 <= 1e-3);
    }
}
