#include <doctest.h>

#include <cmath>

#include "homlab/error.hpp"
#include "homlab/estimates.hpp"

using namespace homlab;

namespace {

SystemSpec cubic_gamma(double gamma) {
    CubicParams p;
    p.lambda1 = 1.0;
    p.lambda2 = 1.0 / gamma;
    return cubic_system(p);
}

const BoundFit& find(const EstimateReport& r, const std::string& name) {
    for (const auto& b : r.bounds)
        if (b.name == name) return b;
    FAIL("missing bound " << name);
    return r.bounds.front();
}

}  // namespace

TEST_CASE("flow estimates on the linear system fit M = 0") {
    const auto s = linear_system(1.0, 1.0 / 0.3);
    const auto r = verify_flow_estimates(s, LambdaCase::Strong);
    for (const auto& b : r.bounds) {
        CHECK(b.fitted_M == 0.0);
        CHECK(b.M_halved == 0.0);
    }
}

TEST_CASE("resonant flow constants are stable under delta halving") {
    const auto s = cubic_gamma(1.0);
    const auto r = verify_flow_estimates(s, LambdaCase::Resonant);
    CHECK(r.case_tag == "lambda1=lambda2");
    for (const auto& b : r.bounds) {
        CHECK(b.fitted_M > 0.0);
        CHECK(b.M_halved <= 2.0 * b.fitted_M);
        CHECK(b.exponent_ok);
    }
    CHECK(r.passed());
}

TEST_CASE("saturated zeta1 cross term decays at least like exp(-2 lambda1 tau)") {
    const auto s = cubic_gamma(0.3);
    const auto r = verify_flow_estimates(s, LambdaCase::Strong);
    const auto& b = find(r, "zeta1_u10_term");
    CHECK(b.exponent_expected == -2.0);
    CHECK(b.exponent_fit <= -2.0 * 0.95);
    CHECK(b.sharp);
    CHECK(r.passed());
}

TEST_CASE("intermediate case cross terms follow exp(-lambda2 tau)") {
    const auto s = cubic_gamma(0.7);
    const auto r = verify_flow_estimates(s, LambdaCase::Intermediate);
    const auto& b = find(r, "xi1_v1tau_term");
    CHECK(b.exponent_expected == doctest::Approx(-1.0 / 0.7));
    CHECK(b.sharp);
    CHECK(r.passed());
}

TEST_CASE("estimate case must match the eigenvalues") {
    CHECK_THROWS_AS(verify_flow_estimates(cubic_gamma(0.3), LambdaCase::Resonant), Error);
    CHECK(parse_lambda_case("strong") == LambdaCase::Strong);
}

TEST_CASE("derivative ratios are exactly 1 on the linear system") {
    const auto s = linear_system(1.0, 1.0 / 0.3);
    DerivativeEstimateOptions o;
    o.finite_differences = false;
    const auto grid = d2_grid(o.m, o.eps);
    CHECK(grid.size() == 50);
    const auto d = verify_derivative_estimates(s, grid, o);
    for (const auto& b : d.report.bounds) CHECK(b.fitted_M <= 1e-8);
    for (const auto& smp : d.samples) {
        const double e = std::exp(smp.jac.tau);
        CHECK(smp.jac.deta2_dv1tau_raw / e == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("chained derivatives on the cubic match finite differences") {
    const auto s = cubic_gamma(0.3);
    DerivativeEstimateOptions o;
    const std::vector<Vec2> grid{{3e-3, 2e-3}, {-1e-3, -3e-3}};
    const auto d = verify_derivative_estimates(s, grid, o);
    CHECK(d.max_fd_error <= 1e-6);
    for (const auto& smp : d.samples) {
        CHECK(smp.jac.deta2_du10 < 0.0);
        CHECK(smp.ratio[0] == doctest::Approx(1.0).epsilon(5 * o.delta));
    }
}

TEST_CASE("derivative grid outside D2 is rejected") {
    const auto s = cubic_gamma(0.3);
    CHECK_THROWS_WITH_AS(verify_derivative_estimates(s, {{1e-3, -1e-3}}), doctest::Contains("D2"), Error);
    CHECK_THROWS_AS(verify_derivative_estimates(cubic_gamma(0.7), {{1e-3, 1e-3}}), Error);
}
