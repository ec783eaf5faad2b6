#include <cmath>
#include <vector>

#include "doctest.h"
#include "ionheat/errors.hpp"
#include "ionheat/ode.hpp"
#include "ionheat/quadrature.hpp"

using namespace ionheat;

TEST_CASE("gauss-legendre rules have unit measure and symmetric nodes") {
    for (int n : {4, 8, 12, 16, 24}) {
        const auto& rule = quad::gauss_legendre(n);
        REQUIRE(rule.node.size() == static_cast<std::size_t>(n));
        double wsum = 0.0;
        for (int i = 0; i < n; ++i) {
            CHECK(rule.node[i] > -1.0);
            CHECK(rule.node[i] < 1.0);
            CHECK(rule.weight[i] > 0.0);
            wsum += rule.weight[i];
            // nodes come out sorted one way or the other; pair i with n-1-i
            CHECK(rule.node[i] == doctest::Approx(-rule.node[n - 1 - i]).epsilon(1e-13));
        }
        CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    }
}

TEST_CASE("gauss-legendre integrates monomials exactly up to degree 2n-1") {
    for (int n : {4, 8, 12}) {
        const auto& rule = quad::gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            const double got = quad::panel([k](double x) { return std::pow(x, k); }, -1.0, 1.0, rule);
            const double want = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
            CHECK(got == doctest::Approx(want).epsilon(1e-12).scale(1.0));
        }
        // one degree past the exactness bound must show a real error
        const int k = 2 * n;
        const double got = quad::panel([k](double x) { return std::pow(x, k); }, -1.0, 1.0, rule);
        CHECK(std::fabs(got - 2.0 / (k + 1)) > 1e-15);
    }
}

TEST_CASE("panel maps affine intervals correctly") {
    const auto& rule = quad::gauss_legendre(8);
    const double got = quad::panel([](double x) { return x * x; }, 2.0, 5.0, rule);
    CHECK(got == doctest::Approx(39.0).epsilon(1e-14));
}

TEST_CASE("adaptive quadrature hits closed-form integrals") {
    auto r1 = quad::adaptive([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-13, 0.0);
    CHECK(r1.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
    CHECK(std::fabs(r1.value - (std::exp(1.0) - 1.0)) <= std::max(10.0 * r1.error, 1e-13));

    auto r2 = quad::adaptive([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-13, 0.0);
    CHECK(r2.value == doctest::Approx(2.0).epsilon(1e-12));

    auto r3 = quad::adaptive([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 1.0, 1e-13, 0.0);
    CHECK(r3.value == doctest::Approx(M_PI / 4.0).epsilon(1e-12));

    // Runge's function needs real subdivision.
    auto r4 = quad::adaptive([](double x) { return 1.0 / (1.0 + 25.0 * x * x); }, -1.0, 1.0, 1e-12, 0.0);
    CHECK(r4.value == doctest::Approx(0.4 * std::atan(5.0)).epsilon(1e-10));
}

TEST_CASE("adaptive quadrature handles oscillatory cancellation in absolute mode") {
    auto r = quad::adaptive([](double x) { return std::sin(50.0 * x); }, 0.0, 2.0 * M_PI, 1e-10, 1e-13);
    CHECK(std::fabs(r.value) < 1e-10);
}

TEST_CASE("ode stepper reproduces exponential decay") {
    ode::Options opt;
    opt.rel_tol = 1e-10;
    const double y = ode::integrate([](double, double y) { return -y; }, 0.0, 1.0, 5.0, opt);
    CHECK(y == doctest::Approx(std::exp(-5.0)).epsilon(1e-8));
}

TEST_CASE("ode stepper reproduces a driven primitive") {
    ode::Options opt;
    opt.rel_tol = 1e-11;
    const double y = ode::integrate([](double t, double) { return std::cos(t); }, 0.0, 0.0, 10.0, opt);
    CHECK(y == doctest::Approx(std::sin(10.0)).epsilon(1e-9).scale(1.0));
}

TEST_CASE("ode stepper solves the logistic equation") {
    ode::Options opt;
    opt.rel_tol = 1e-11;
    const double y = ode::integrate([](double, double y) { return y * (1.0 - y); }, 0.0, 0.1, 3.0, opt);
    const double want = 1.0 / (1.0 + 9.0 * std::exp(-3.0));
    CHECK(y == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("ode tolerance controls the error ordering") {
    auto rhs = [](double t, double y) { return -y + std::sin(2.0 * t); };
    // closed form: y = (2/5) e^{-t} + (sin 2t - 2 cos 2t)/5 for y(0) = 0
    auto exact = [](double t) {
        return 0.4 * std::exp(-t) + (std::sin(2.0 * t) - 2.0 * std::cos(2.0 * t)) / 5.0;
    };
    ode::Options loose, tight;
    loose.rel_tol = 1e-4;
    tight.rel_tol = 1e-11;
    const double e_loose = std::fabs(ode::integrate(rhs, 0.0, 0.0, 6.0, loose) - exact(6.0));
    const double e_tight = std::fabs(ode::integrate(rhs, 0.0, 0.0, 6.0, tight) - exact(6.0));
    CHECK(e_tight < e_loose);
    CHECK(e_tight < 1e-9);
}

TEST_CASE("ode grid sweep matches single-shot integration") {
    auto rhs = [](double t, double y) { return -2.0 * y + std::cos(3.0 * t); };
    ode::Options opt;
    opt.rel_tol = 1e-11;
    const std::vector<double> grid{0.5, 1.0, 2.0, 4.0};
    const auto swept = ode::integrate_grid(rhs, 0.0, 1.0, grid, opt);
    REQUIRE(swept.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double single = ode::integrate(rhs, 0.0, 1.0, grid[i], opt);
        CHECK(swept[i] == doctest::Approx(single).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("ode stepper reports exhausted budgets") {
    ode::Options opt;
    opt.max_steps = 10;
    CHECK_THROWS_AS(ode::integrate([](double, double y) { return -y; }, 0.0, 1.0, 1e6, opt),
                    StepFailure);
}
