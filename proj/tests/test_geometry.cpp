#include <doctest.h>

#include <cmath>
#include <random>

#include "msflow/geometry.hpp"

using namespace msflow;

namespace {

const ContainerGeometry kGeom{1.0, 1.0, 1.0};

HeightField cosine_field(const ContainerGeometry& g, int n, int m, double amp) {
    Eigen::VectorXd v(n);
    for (int j = 0; j < n; ++j)
        v[j] = amp * std::cos(M_PI * m * (j + 0.5) / n);
    return HeightField(g, v);
}

// arc of radius R centered above x0: h(x) = c - sqrt(R^2 - (x-x0)^2)
HeightField arc_field(const ContainerGeometry& g, int n, double R, double c) {
    Eigen::VectorXd v(n);
    const double x0 = 0.5 * g.width;
    for (int j = 0; j < n; ++j) {
        const double x = (j + 0.5) * g.width / n;
        v[j] = c - std::sqrt(R * R - (x - x0) * (x - x0));
    }
    return HeightField(g, v);
}

} // namespace

TEST_CASE("container geometry validates and computes the tube half-width") {
    CHECK(kGeom.tube_half_width() == 1.0);
    ContainerGeometry uneven(2.0, 0.5, 1.5);
    CHECK(uneven.tube_half_width() == 0.5);
    CHECK(uneven.admissible_bound() == doctest::Approx(0.1));
    CHECK_THROWS_AS(ContainerGeometry(0.0, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(ContainerGeometry(1.0, -1.0, 1.0), ConfigError);
}

TEST_CASE("cutoff satisfies the plateau, support and slope constraints") {
    CHECK(cutoff::chi(0.0) == 1.0);
    CHECK(cutoff::chi(1.0 / 3.0) == 1.0);
    CHECK(cutoff::chi(-0.2) == 1.0);
    CHECK(cutoff::chi(2.0 / 3.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(cutoff::chi(0.9) == 0.0);
    CHECK(cutoff::chi_prime(0.0) == 0.0);
    double max_slope = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double s = -1.0 + 2.0 * i / 4000.0;
        max_slope = std::max(max_slope, std::abs(cutoff::chi_prime(s)));
        // chi' is the derivative of chi (finite-difference cross-check)
        const double d = (cutoff::chi(s + 5e-7) - cutoff::chi(s - 5e-7)) / 1e-6;
        CHECK(std::abs(d - cutoff::chi_prime(s)) < 1e-5);
    }
    CHECK(max_slope <= 4.0 + 1e-12);
    CHECK(max_slope > 3.9);  // the plateau slope is attained
}

TEST_CASE("flat graph has zero curvature") {
    const HeightField h = HeightField::zero(kGeom, 64);
    CHECK(curvature(h).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("circular arc has curvature 1/R") {
    const double R = 5.0;
    const int n = 2048;
    const HeightField h = arc_field(kGeom, n, R, R);
    const Eigen::VectorXd k = curvature(h);
    for (int p = 1; p <= 10; ++p) {
        const int j = n / 4 + p * n / 20;  // interior samples away from walls
        CHECK(k[j] == doctest::Approx(1.0 / R).epsilon(1e-7));
    }
}

TEST_CASE("curvature linearizes to the second derivative") {
    const int n = 2048;
    const double eps = 1e-6;
    const HeightField h = cosine_field(kGeom, n, 1, eps);
    const Eigen::VectorXd k = curvature(h);
    const double k1 = M_PI / kGeom.width;
    double rel = 0.0;
    for (int j = 0; j < n; ++j) {
        const double exact = -eps * k1 * k1 * std::cos(M_PI * (j + 0.5) / n);
        rel = std::max(rel, std::abs(k[j] - exact));
    }
    CHECK(rel / (eps * k1 * k1) <= 1e-6);
}

TEST_CASE("curvature linearization has a quadratic remainder") {
    const int n = 128;
    for (int m = 1; m <= 4; ++m) {
        double ratio0 = -1.0;
        for (double eps : {1e-3, 1e-4, 1e-5}) {
            const HeightField h = cosine_field(kGeom, n, m, eps);
            const Eigen::VectorXd k = curvature(h);
            const Eigen::VectorXd lin = second_difference(h.values(), h.dx());
            const double r = (k - lin).lpNorm<Eigen::Infinity>() / (eps * eps);
            if (ratio0 < 0.0) {
                ratio0 = r;
            } else {
                CHECK(r <= 1.25 * ratio0 + 1e-9);
                CHECK(r >= 0.0);
            }
        }
    }
}

TEST_CASE("curvature decomposition reconstructs the curvature") {
    SUBCASE("flat principal part is the second difference") {
        const HeightField h = HeightField::zero(kGeom, 32);
        const CurvatureDecomposition d = curvature_decomposition(h);
        CHECK((d.principal_coeff.array() - 1.0).abs().maxCoeff() == 0.0);
        CHECK(d.remainder.lpNorm<Eigen::Infinity>() == 0.0);
        Eigen::VectorXd v(32);
        for (int j = 0; j < 32; ++j) v[j] = std::sin(0.3 * j);
        CHECK((d.apply(v) - second_difference(v, h.dx())).lpNorm<Eigen::Infinity>() ==
              0.0);
    }
    SUBCASE("cosine field") {
        const HeightField h = cosine_field(kGeom, 64, 1, 0.05);
        const CurvatureDecomposition d = curvature_decomposition(h);
        const Eigen::VectorXd k = curvature(h);
        CHECK((d.apply(h.values()) - k).lpNorm<Eigen::Infinity>() <=
              1e-12 * (1.0 + k.lpNorm<Eigen::Infinity>()));
    }
    SUBCASE("random admissible fields") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-0.15, 0.15);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd v(48);
            for (int j = 0; j < 48; ++j) v[j] = u(rng);
            const HeightField h(kGeom, v);
            const Eigen::VectorXd k = curvature(h);
            const CurvatureDecomposition d = curvature_decomposition(h);
            CHECK((d.apply(v) - k).lpNorm<Eigen::Infinity>() <=
                  1e-12 * (1.0 + k.lpNorm<Eigen::Infinity>()));
        }
    }
}

TEST_CASE("normals and velocity factor") {
    SUBCASE("flat") {
        const NormalData nd = normal_and_velocity_factor(HeightField::zero(kGeom, 32));
        CHECK((nd.factor.array() - 1.0).abs().maxCoeff() == 0.0);
        CHECK(nd.normal.col(0).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK((nd.normal.col(1).array() - 1.0).abs().maxCoeff() == 0.0);
    }
    SUBCASE("small cosine factor deviation is quadratic") {
        const double eps = 1e-3;
        const NormalData nd =
            normal_and_velocity_factor(cosine_field(kGeom, 256, 1, eps));
        // sqrt(1+h'^2) - 1 ~ h'^2 / 2 with h' bounded by eps * pi
        CHECK((nd.factor.array() - 1.0).abs().maxCoeff() <=
              0.5 * std::pow(eps * M_PI, 2) * 1.01);
        CHECK(nd.factor.minCoeff() >= 1.0);
    }
    SUBCASE("circular arc matches the analytic circle normal") {
        const double R = 5.0;
        const int n = 8192;
        const HeightField h = arc_field(kGeom, n, R, R);
        const NormalData nd = normal_and_velocity_factor(h);
        for (int j = n / 4; j < 3 * n / 4; j += n / 16) {
            const double x = (j + 0.5) / n;
            const double u = x - 0.5;
            const double hp = u / std::sqrt(R * R - u * u);
            const double f = std::sqrt(1.0 + hp * hp);
            CHECK(std::abs(nd.normal(j, 0) + hp / f) < 1e-10);
            CHECK(std::abs(nd.normal(j, 1) - 1.0 / f) < 1e-10);
        }
    }
}

TEST_CASE("hanzawa map") {
    SUBCASE("identity at h = 0") {
        const HanzawaMap map = identity_hanzawa(kGeom, 32, 16, 16);
        CHECK((map.upper.k11.array() - 1.0).abs().maxCoeff() == 0.0);
        CHECK((map.upper.k22.array() - 1.0).abs().maxCoeff() == 0.0);
        CHECK(map.upper.k12.lpNorm<Eigen::Infinity>() == 0.0);
        CHECK(map.lower.k12.lpNorm<Eigen::Infinity>() == 0.0);
        CHECK(map.min_det == 1.0);
    }
    SUBCASE("constant height shifts the plateau region rigidly") {
        const double a = kGeom.tube_half_width();
        const HeightField h(kGeom, Eigen::VectorXd::Constant(48, a / 10.0));
        const HanzawaMap map = build_hanzawa(h, 96, 96);
        for (int j = 0; j <= 96; ++j) {
            const double yhat = j * map.upper.dy;
            if (yhat > a / 3.0) continue;
            for (int i = 0; i < 48; ++i) {
                CHECK(map.upper.k11(j, i) == doctest::Approx(1.0).epsilon(1e-13));
                CHECK(map.upper.k22(j, i) == doctest::Approx(1.0).epsilon(1e-13));
                CHECK(std::abs(map.upper.k12(j, i)) < 1e-13);
            }
            // closed form in the plateau: preimage is a pure shift by h
            CHECK(hanzawa_vertical(kGeom, a / 10.0, yhat + a / 10.0) ==
                  doctest::Approx(yhat).epsilon(1e-13));
        }
    }
    SUBCASE("graph is flattened onto Sigma") {
        const HeightField h = cosine_field(kGeom, 64, 2, 0.15);
        for (int j = 0; j < h.size(); ++j)
            CHECK(hanzawa_vertical(kGeom, h.values()[j], h.values()[j]) == 0.0);
    }
    SUBCASE("determinant bound holds for admissible heights") {
        const HeightField h = cosine_field(kGeom, 64, 1, 0.19);
        const HanzawaMap map = build_hanzawa(h, 64, 64);
        CHECK(map.min_det > 0.0);
        CHECK(map.min_det >= 1.0 - 5.0 * h.max_abs() / kGeom.tube_half_width() - 1e-12);
    }
}

TEST_CASE("admissibility gate rejects max|h| >= a/5") {
    const double a = kGeom.tube_half_width();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(32);
    v[7] = a / 5.0;  // boundary of the admissible set is excluded
    const HeightField h(kGeom, v);
    CHECK_FALSE(h.admissible());
    CHECK_THROWS_AS(curvature(h), AdmissibilityError);
    CHECK_THROWS_AS(curvature_decomposition(h), AdmissibilityError);
    CHECK_THROWS_AS(build_hanzawa(h, 16, 16), AdmissibilityError);
    CHECK_THROWS_AS(normal_and_velocity_factor(h), AdmissibilityError);
}
