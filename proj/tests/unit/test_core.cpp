#include <doctest.h>

#include <cmath>

#include "homlab/error.hpp"
#include "homlab/flow.hpp"
#include "homlab/identities.hpp"
#include "homlab/system.hpp"

using namespace homlab;

namespace {

CubicParams cubic_gamma(double gamma) {
    CubicParams p;
    p.lambda1 = 1.0;
    p.lambda2 = 1.0 / gamma;
    return p;
}

FlowOptions tight() {
    FlowOptions o;
    o.step.rtol = 1e-14;
    o.step.atol = 1e-16;
    return o;
}

}  // namespace

TEST_CASE("field of the linear system is the diagonal part") {
    const auto s = linear_system(1.0, 2.0);
    const State4 f = evaluate_field(s, {1, 0, 0, 0});
    CHECK(f[0] == -1.0);
    CHECK(f[1] == 0.0);
    CHECK(norm_inf(evaluate_field(s, {0, 0, 0, 0})) == 0.0);
}

TEST_CASE("non-finite field raises") {
    SystemSpec s = linear_system(1.0, 1.0);
    s.nonlinearity = [](const State4&) { return State4{NAN, 0, 0, 0}; };
    CHECK_THROWS_AS(s.field({0, 0, 0, 0}), Error);
}

TEST_CASE("linear flow reproduces exponentials") {
    const auto s = linear_system(1.0, 2.0);
    const auto tr = integrate(s, {1, 0, 0, 0}, 0.0, 1.0);
    CHECK(std::fabs(tr.x.back()[0] - std::exp(-1.0)) <= 1e-10);
    const auto tr0 = integrate(s, {0.3, 0.1, 0.2, 0.4}, 2.0, 2.0);
    CHECK(tr0.x.size() == 1);
    CHECK(tr0.x.back()[2] == 0.2);
}

TEST_CASE("continuous extension is accurate between steps") {
    const auto s = linear_system(1.0, 3.0);
    const State4 x0{1.0, 1.0, 1.0, 1.0};
    const auto tr = integrate(s, x0, 0.0, 2.0);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < tr.t.size(); ++i) {
        const double tm = 0.5 * (tr.t[i] + tr.t[i + 1]);
        const State4 y = tr.at(tm);
        worst = std::max(worst, std::fabs(y[1] - std::exp(-3.0 * tm)));
        worst = std::max(worst, std::fabs(y[3] - std::exp(3.0 * tm)) / std::exp(3.0 * tm));
    }
    CHECK(worst < 1e-9);
    CHECK(tr.at(tr.t[1]) == tr.x[1]);
}

TEST_CASE("section crossing of the linear system at t = 1") {
    const double delta = 0.1;
    const auto s = linear_system(1.0, 2.0);
    const auto hit = integrate_to_section(s, {0, 0, 0, delta * std::exp(-2.0)}, {V2, delta}, Crossing::Increasing, 5.0, tight());
    CHECK(std::fabs(hit.t - 1.0) <= 1e-12);
    CHECK(hit.x[V2] == delta);
    const auto same = integrate_to_section(s, {0, 0, 0, delta}, {V2, delta}, Crossing::Any, 5.0);
    CHECK(same.t == 0.0);
    CHECK_THROWS_AS(integrate_to_section(s, {0, 0, 0, 1e-9}, {V2, delta}, Crossing::Any, 1.0), Error);
}

TEST_CASE("section crossing is bitwise deterministic") {
    const auto s = cubic_system(cubic_gamma(0.3));
    const State4 x0{0.01, 0.05, 0.003, 1e-4};
    const auto a = integrate_to_section(s, x0, {V2, 0.05}, Crossing::Any, 50.0);
    const auto b = integrate_to_section(s, x0, {V2, 0.05}, Crossing::Any, 50.0);
    CHECK(a.t == b.t);
    CHECK(a.x == b.x);
}

TEST_CASE("domain exit reports time and state") {
    const auto s = linear_system(1.0, 1.0);
    FlowOptions o;
    o.box = 0.2;
    try {
        flow(s, {0, 0, 0.1, 0}, 5.0, o);
        FAIL("expected DomainExit");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DomainExit);
        REQUIRE(e.time().has_value());
        CHECK(*e.time() > std::log(2.0) - 1e-9);
    }
}

TEST_CASE("variational matrix of the linear system is diagonal exponentials") {
    const auto s = linear_system(1.0, 2.5);
    const auto vp = integrate_variational(s, {0.1, 0.1, 0.1, 0.1}, 0.0, 1.5);
    const Mat4& phi = vp.final_phi();
    CHECK(std::fabs(phi[0][0] - std::exp(-1.5)) < 1e-11);
    CHECK(std::fabs(phi[1][1] - std::exp(-2.5 * 1.5)) < 1e-11);
    CHECK(std::fabs(phi[3][3] / std::exp(2.5 * 1.5) - 1.0) < 1e-10);
    CHECK(std::fabs(phi[0][1]) == 0.0);
    CHECK(vp.phi.front() == identity4());
}

TEST_CASE("variational consistency has second order in the difference step") {
    const auto s = cubic_system(cubic_gamma(0.7));
    const State4 x0{0.4, 0.3, 0.35, 0.25};
    const State4 v{0.6, -0.3, 0.5, 0.55};
    const double t = 1.0;
    const auto o = tight();
    const auto vp = integrate_variational(s, x0, 0.0, t, o);
    const State4 lin = mul(vp.final_phi(), v);
    auto fd_error = [&](double h) {
        const State4 p = flow(s, x0 + h * v, t, o);
        const State4 m = flow(s, x0 - (h * v), t, o);
        return norm_inf(lin - (1.0 / (2.0 * h)) * (p - m));
    };
    const double e1 = fd_error(1e-4), e2 = fd_error(5e-5);
    const double order = std::log(e1 / e2) / std::log(2.0);
    CHECK(order >= 1.9);
    CHECK(det(vp.final_phi()) > 0.0);
}

TEST_CASE("first integral drift stays within 100 tol") {
    for (double g : {0.3, 0.7, 1.0}) {
        const auto s = cubic_system(cubic_gamma(g));
        const State4 x0{0.05, 0.04, 0.03, 0.02};
        FlowOptions o;
        const auto tr = integrate(s, x0, 0.0, 3.0, o);
        CHECK(tr.h_drift <= 100.0 * o.step.rtol * (1.0 + std::fabs(s.h(x0))));
    }
}

TEST_CASE("flow commutes with the Z2 symmetry") {
    const auto s = cubic_system(cubic_gamma(0.3));
    const State4 x0{0.05, 0.04, 0.03, 0.02};
    const State4 a = flow(s, sigma_z2(x0), 2.0);
    const State4 b = sigma_z2(flow(s, x0, 2.0));
    CHECK(norm_inf(a - b) <= 1e-10);
}

TEST_CASE("reversed system runs the original backward in swapped coordinates") {
    const auto s = cubic_system(cubic_gamma(0.3));
    const auto r = reversed_system(s);
    const State4 x0{0.05, 0.04, 0.03, 0.02};
    const State4 fwd = flow(r, swap_uv(x0), 0.7, tight());
    const State4 back = flow(s, x0, -0.7, tight());
    CHECK(norm_inf(fwd - swap_uv(back)) <= 1e-13);
    const Mat4 jr = r.jacobian(swap_uv(x0));
    const double eps = 1e-6;
    State4 e{0, 0, eps, 0};
    const State4 fd = (1.0 / (2 * eps)) * (r.field(swap_uv(x0) + e) - r.field(swap_uv(x0) - e));
    for (int i = 0; i < 4; ++i) CHECK(std::fabs(fd[i] - jr[i][2]) < 1e-8);
}

TEST_CASE("identity checks: linear exact, cubic family holds, negative control fails") {
    const auto lin = check_identities(linear_system(1.0, 3.0), 50, 0.1);
    CHECK(lin.worst() <= 1e-16);
    for (double g : {0.3, 0.7, 1.0}) {
        const auto rep = check_identities(cubic_system(cubic_gamma(g)), 200, 0.1);
        CHECK(rep.worst() <= 1e-12);
        CHECK(rep.closed_form_jacobian);
    }
    CubicParams res;
    res.s1 = 0.4;
    res.s2 = -0.3;
    res.s3 = 0.7;
    res.h3 = res.h4 = res.k = res.q = 0.0;
    const auto rs = cubic_system(res);
    CHECK(check_identities(rs, 100, 0.1).worst() <= 1e-14);
    CHECK(rs.h({0.1, 0.2, 0.3, 0.4}) == doctest::Approx(0.1 * 0.3 - 0.2 * 0.4));

    SystemSpec bad = linear_system(1.0, 3.0);
    bad.nonlinearity = [](const State4& x) { return State4{x[0] * x[3], 0, 0, 0}; };
    bad.nonlinearity_jacobian = nullptr;
    const auto br = check_identities(bad, 50, 0.1);
    REQUIRE(br.find("f11(0,v)") != nullptr);
    CHECK(br.find("f11(0,v)")->max_violation > 1e-3);
}

TEST_CASE("finite-difference Jacobian fallback agrees with the closed form") {
    const auto s = cubic_system(cubic_gamma(0.3));
    SystemSpec fd = s;
    fd.nonlinearity_jacobian = nullptr;
    const State4 x{0.05, -0.02, 0.03, 0.04};
    const Mat4 a = s.jacobian(x), b = fd.jacobian(x);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(std::fabs(a[i][j] - b[i][j]) < 1e-9);
}
