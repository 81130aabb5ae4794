#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "memres/spectral.hpp"

using namespace memres;

namespace {

SpectralOperator op1d(int n, double L, double delta = 0.0) {
    OperatorConfig c;
    c.dimension = 1;
    c.lengths[0] = L;
    c.n_modes[0] = n;
    c.delta = delta;
    return SpectralOperator(c);
}

SpectralOperator op2d(int n1, int n2, double L1, double L2) {
    OperatorConfig c;
    c.dimension = 2;
    c.lengths[0] = L1;
    c.lengths[1] = L2;
    c.n_modes[0] = n1;
    c.n_modes[1] = n2;
    return SpectralOperator(c);
}

} // namespace

TEST_CASE("configuration validation") {
    CHECK_THROWS_AS(op1d(3, 1.0), config_error);
    CHECK_THROWS_AS(op1d(12, 1.0), config_error); // not a power of two
    CHECK_THROWS_AS(op1d(16, -1.0), config_error);
    OperatorConfig c;
    c.dimension = 3;
    CHECK_THROWS_AS(SpectralOperator{c}, config_error);
}

TEST_CASE("dirichlet eigenvalues") {
    SpectralOperator op = op1d(8, 2.0);
    for (int m = 1; m <= 8; ++m)
        CHECK(op.mu_flat()[m - 1] == doctest::Approx(std::pow(m * M_PI / 2.0, 2)).epsilon(1e-14));
    CHECK(op.mu_max() == doctest::Approx(std::pow(8 * M_PI / 2.0, 2)));

    SpectralOperator o2 = op2d(4, 8, 1.0, 2.0);
    CHECK(o2.total_modes() == 32);
    CHECK(o2.mu_flat()[0] ==
          doctest::Approx(M_PI * M_PI + std::pow(M_PI / 2.0, 2)).epsilon(1e-14));
    // sorted view ascending
    for (std::size_t i = 1; i < o2.eigenvalues().size(); ++i)
        CHECK(o2.eigenvalues()[i] >= o2.eigenvalues()[i - 1]);
}

TEST_CASE("transform round trip and parseval") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double L : {1.0, M_PI, 3.7}) {
        SpectralOperator op = op1d(32, L);
        std::vector<double> u(32);
        for (auto& v : u) v = dist(rng);
        std::vector<double> c = forward_transform(op, u);
        std::vector<double> back = inverse_transform(op, c);
        for (int j = 0; j < 32; ++j) CHECK(back[j] == doctest::Approx(u[j]).epsilon(1e-12));
        // discrete Parseval: (L/(n+1)) sum u^2 = sum c^2
        double grid = 0.0, coef = 0.0;
        for (int j = 0; j < 32; ++j) {
            grid += u[j] * u[j];
            coef += c[j] * c[j];
        }
        CHECK(coef == doctest::Approx(L / 33.0 * grid).epsilon(1e-12));
    }
}

TEST_CASE("2d transform round trip") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    SpectralOperator op = op2d(8, 4, 1.5, 2.5);
    std::vector<double> u(32);
    for (auto& v : u) v = dist(rng);
    std::vector<double> back = inverse_transform(op, forward_transform(op, u));
    for (std::size_t j = 0; j < u.size(); ++j)
        CHECK(back[j] == doctest::Approx(u[j]).epsilon(1e-12));
}

TEST_CASE("single mode transforms exactly") {
    const double L = 2.0;
    SpectralOperator op = op1d(16, L);
    // u(x) = sqrt(2/L) sin(3 pi x / L) has coefficient vector e_3
    std::vector<double> u(16);
    for (int j = 1; j <= 16; ++j)
        u[j - 1] = std::sqrt(2.0 / L) * std::sin(3.0 * M_PI * j * (L / 17.0) / L);
    std::vector<double> c = forward_transform(op, u);
    for (int m = 0; m < 16; ++m)
        CHECK(c[m] == doctest::Approx(m == 2 ? 1.0 : 0.0).epsilon(1e-12));
}

TEST_CASE("scale norm") {
    SpectralOperator op = op1d(8, M_PI); // mu_m = m^2
    ScaleVector v{std::vector<double>(8, 0.0), &op};
    v.coeffs[0] = 3.0;
    v.coeffs[1] = 4.0;
    CHECK(scale_norm(v, 0.0) == doctest::Approx(5.0).epsilon(1e-14));
    // alpha = 1 weights by (1 + mu)
    CHECK(scale_norm(v, 1.0) ==
          doctest::Approx(std::sqrt(9.0 * 4.0 + 16.0 * 25.0)).epsilon(1e-14));
    // log-convexity: ||x||_{(a+b)/2} <= sqrt(||x||_a ||x||_b)
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& x : v.coeffs) x = dist(rng);
    for (double a : {0.0, 0.5}) {
        const double b = a + 1.0;
        const double mid = scale_norm(v, 0.5 * (a + b));
        CHECK(mid * mid <= scale_norm(v, a) * scale_norm(v, b) * (1.0 + 1e-13));
    }
    // delta shifts the anchor
    SpectralOperator shifted = op1d(8, M_PI, 0.5);
    ScaleVector w{v.coeffs, &shifted};
    CHECK(scale_norm(w, 1.0) == doctest::Approx(scale_norm(v, 0.5)).epsilon(1e-13));
}

TEST_CASE("dealiased pointwise application") {
    SpectralOperator op = op1d(16, 1.0);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> c(16);
    for (auto& v : c) v = dist(rng);
    // identity map returns the input exactly
    std::vector<double> same = apply_pointwise_dealiased(op, c, [](double u) { return u; });
    for (int m = 0; m < 16; ++m) CHECK(same[m] == doctest::Approx(c[m]).epsilon(1e-12));
    // squaring a single low mode: sin^2 has no energy in odd sine modes;
    // compare retained coefficients against dense-grid projection
    std::vector<double> e1(16, 0.0);
    e1[0] = 1.0;
    std::vector<double> sq = apply_pointwise_dealiased(op, e1, [](double u) { return u * u; });
    const int dense = 512;
    for (int m = 1; m <= 4; ++m) {
        double proj = 0.0;
        for (int j = 1; j <= dense; ++j) {
            const double x = j / (dense + 1.0);
            const double ux = std::sqrt(2.0) * std::sin(M_PI * x);
            proj += ux * ux * std::sqrt(2.0) * std::sin(m * M_PI * x);
        }
        proj /= (dense + 1.0);
        CHECK(sq[m - 1] == doctest::Approx(proj).epsilon(5e-3).scale(1.0));
    }
}
