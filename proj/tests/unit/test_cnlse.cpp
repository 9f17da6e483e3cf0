#include <doctest.h>

#include <cmath>
#include <sstream>

#include "homlab/cnlse.hpp"
#include "homlab/error.hpp"
#include "homlab/flow.hpp"
#include "homlab/identities.hpp"

using namespace homlab;

namespace {

std::vector<double> grid(double half, int n) {
    std::vector<double> x;
    for (int i = 0; i <= n; ++i) x.push_back(-half + 2.0 * half * i / n);
    return x;
}

}  // namespace

TEST_CASE("cnlse linear part is diagonal with rates 1 and omega") {
    const SystemSpec s = cnlse_system({1.0, 1.0, 3.0});
    CHECK(s.lambda1 == 1.0);
    CHECK(s.lambda2 == 3.0);
    const Mat4 j = s.jacobian(State4{});
    const double expect[4] = {-1.0, -3.0, 1.0, 3.0};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) CHECK(j[i][k] == doctest::Approx(i == k ? expect[i] : 0.0));
}

TEST_CASE("cnlse energy vanishes at the origin and is conserved by the field") {
    for (auto sc : {CnlseScaling::Balanced, CnlseScaling::Half}) {
        const SystemSpec s = cnlse_system({0.7, 1.3, 4.0, sc});
        const IdentityReport r = check_identities(s, 200, 0.5);
        CHECK(r.h_at_origin == 0.0);
        CHECK(r.max_flow_derivative_of_h < 1e-12);
        CHECK(r.worst() < 1e-12);
    }
}

TEST_CASE("diagonal coordinates invert") {
    const CnlseParams p{1.0, 2.0, 5.0, CnlseScaling::Half};
    const State4 y{0.3, -0.2, 0.1, 0.4};
    const State4 back = to_diagonal(p, from_diagonal(p, y));
    for (int i = 0; i < 4; ++i) CHECK(back[i] == doctest::Approx(y[i]).epsilon(1e-15));
}

TEST_CASE("explicit loop in the half scaling at omega = 1") {
    const CnlseParams p{1.0, 1.0, 1.0, CnlseScaling::Half};
    const State4 x = explicit_homoclinic(p, 1, 0.0);
    CHECK(x[U1] == 0.0);
    CHECK(x[U2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x[V1] == 0.0);
    CHECK(x[V2] == doctest::Approx(0.5).epsilon(1e-15));
    const State4 f = from_diagonal(p, x);  // (ψ1, ψ2, φ1, φ2) = (0, 0, sech 0, 0)
    CHECK(f[2] == doctest::Approx(1.0));
    CHECK(std::fabs(f[3]) < 1e-15);
}

TEST_CASE("second loop is the sigma2 image of the first") {
    const CnlseParams p{1.0, 1.0, 6.0};
    for (double x : {-2.0, -0.3, 0.0, 0.8, 3.0}) {
        const State4 a = explicit_homoclinic(p, 1, x), b = explicit_homoclinic(p, -1, x);
        CHECK(b[U2] == -a[U2]);
        CHECK(b[V2] == -a[V2]);
    }
}

TEST_CASE("explicit solution residuals at omega = 3") {
    const CnlseParams p{1.0, 1.0, 3.0};
    const ExplicitSolutionReport r = verify_explicit_solution(p, grid(10.0 / 3.0, 400));
    CHECK(r.points == 401);
    CHECK(r.scalar_residual <= 1e-10);
    CHECK(r.field_residual <= 1e-10);
    CHECK(r.h_residual <= 1e-12);
}

TEST_CASE("integrated loop conserves energy") {
    const CnlseParams p{1.0, 1.0, 3.0};
    FlowOptions flow;
    flow.step.rtol = 1e-12;
    flow.step.atol = 1e-14;
    const HomoclinicData h = cnlse_homoclinic_data(p, 1, 0.1, flow);
    const SystemSpec s = cnlse_system(p);
    double drift = 0.0;
    for (const auto& x : h.orbit.x) drift = std::max(drift, std::fabs(s.h(x) - s.h(h.mu)));
    CHECK(drift <= 1e-9);
    const State4 ms = explicit_homoclinic(p, 1, arrival_point(p, 0.1));
    CHECK(norm_inf(h.ms - ms) < 1e-9);
}

TEST_CASE("section levels are reached on the tails") {
    const CnlseParams p{1.0, 1.0, 3.0};
    const double xu = departure_point(p, 0.1), xs = arrival_point(p, 0.1);
    CHECK(xu < 0.0);
    CHECK(xs == doctest::Approx(-xu));
    CHECK(explicit_homoclinic(p, 1, xu)[V2] == doctest::Approx(0.1).epsilon(1e-13));
    CHECK(explicit_homoclinic(p, 1, xs)[U2] == doctest::Approx(0.1).epsilon(1e-13));
    CHECK_THROWS_AS(departure_point(p, 10.0), Error);
}

TEST_CASE("coefficients satisfy the symplectic and reversibility identities") {
    for (double w : {2.5, 3.0, 4.5, 7.0, 10.0}) {
        const CnlseCoefficients c = compute_cnlse_coefficients({1.0, 1.0, w}, 0.1);
        CHECK(std::fabs(c.loop1.ad_minus_bc - 1.0) <= 1e-6);
        CHECK(std::fabs(c.loop1.b_plus_c) <= 1e-6);
        CHECK(c.symmetry_defect <= 1e-6);
    }
}

TEST_CASE("coefficients match the reflectionless closed form for beta = 1") {
    for (double w : {2.5, 3.0, 6.0}) {
        const CnlseParams p{1.0, 1.0, w};
        const CnlseCoefficients c = compute_cnlse_coefficients(p, 0.1);
        const Mat2 A = cnlse_coefficients_beta_one(p, 0.1);
        CHECK(c.loop1.a == doctest::Approx(A[0][0]).epsilon(1e-8));
        CHECK(c.loop1.b == doctest::Approx(A[0][1]).epsilon(1e-6));
        CHECK(c.loop1.c == doctest::Approx(A[1][0]).epsilon(1e-6));
        CHECK(c.loop1.d == doctest::Approx(A[1][1]).epsilon(1e-8));
    }
    CHECK_THROWS_AS(cnlse_coefficients_beta_one({1.0, 2.0, 3.0}, 0.1), Error);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(cnlse_system({1.0, 0.0, 3.0}), Error);
    CHECK_THROWS_AS(cnlse_system({1.0, 1.0, 0.5}), Error);
    CHECK_THROWS_AS(validate({1.0, 1.0, 2.0}, true), Error);
    CHECK(omega_row(1.0, 1.0, 2.0, 0.1).scenario == "failed");
    CHECK(omega_row(1.0, 1.0, 1.5, 0.1).scenario == "trivial");
}

TEST_CASE("scan locates the bound-state zero of d with b squared one") {
    // ψ-variational potential (2/β)sech²(ωx): ℓ(ℓ+1) = 2/β = 2.8125 gives ℓ = 1.25,
    // and the decaying eigenfunction at rate 1/ω = ℓ − 1 puts the zero at ω = 4.
    const OmegaScan s = scan_omega(1.0, 2.0 / 2.8125, 2.0, 8.0, 20, {});
    REQUIRE(s.zeros.size() == 1);
    CHECK(s.zeros[0].omega_star == doctest::Approx(4.0).epsilon(1e-4));
    CHECK(s.zeros[0].bracket_width <= 1e-4);
    CHECK(s.zeros[0].b_unit());
    CHECK(s.zeros[0].flips());
    CHECK_FALSE(s.extended);
}

TEST_CASE("beta = 1 scan reports no zero and extends once") {
    const OmegaScan s = scan_omega(1.0, 1.0, 2.0, 20.0, 60, {});
    CHECK(s.zeros.empty());
    CHECK(s.extended);
    CHECK(s.extended_hi == 40.0);
    CHECK(s.rows.back().omega == doctest::Approx(40.0));
    const auto j = zeros_json(s);
    CHECK(j["none_in_range"] == true);
    std::ostringstream os;
    write_scan_csv(os, s);
    CHECK(os.str().rfind("omega,a,b,c,d,ad_minus_bc,b_plus_c,sign_bd,scenario\n", 0) == 0);
}
