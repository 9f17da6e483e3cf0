#include <doctest.h>

#include <cmath>

#include "homlab/bvp.hpp"
#include "homlab/chebyshev.hpp"
#include "homlab/error.hpp"
#include "homlab/flow.hpp"

using namespace homlab;

namespace {

SystemSpec cubic_gamma(double gamma) {
    CubicParams p;
    p.lambda1 = 1.0;
    p.lambda2 = 1.0 / gamma;
    return cubic_system(p);
}

FlowOptions tight() {
    FlowOptions o;
    o.step.rtol = 1e-13;
    o.step.atol = 1e-16;
    return o;
}

}  // namespace

TEST_CASE("Chebyshev cumulative integration is spectrally accurate") {
    const auto& g = ChebyshevGrid::shared(64);
    std::vector<double> f(g.size()), out(g.size());
    const double L = 7.0;
    for (std::size_t k = 0; k < g.size(); ++k) f[k] = std::exp(-2.0 * L * g.nodes()[k]);
    g.cumulative(f.data(), L, out.data());
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double t = L * g.nodes()[k];
        worst = std::max(worst, std::fabs(out[k] - (1.0 - std::exp(-2.0 * t)) / 2.0));
    }
    CHECK(worst < 1e-14);
    g.reverse_cumulative(f.data(), L, out.data());
    CHECK(std::fabs(out[0] - (1.0 - std::exp(-2.0 * L)) / 2.0) < 1e-14);
    CHECK(std::fabs(g.interpolate(f.data(), 0.3) - std::exp(-2.0 * L * 0.3)) < 1e-13);
}

TEST_CASE("linear BVP is exact after one application") {
    const auto s = linear_system(1.0, 2.0);
    const BvpBoundary b{3.0, 0.04, 0.03, -0.02, 0.05, 0.05};
    const auto sol = solve_bvp(s, b);
    CHECK(sol.iterations == 1);
    for (double t : {0.0, 0.7, 1.9, 3.0}) {
        const State4 x = sol.at(t);
        CHECK(std::fabs(x[U1] - std::exp(-t) * 0.04) < 1e-15);
        CHECK(std::fabs(x[U2] - std::exp(-2 * t) * 0.03) < 1e-15);
        CHECK(std::fabs(x[V1] + std::exp(-(3 - t)) * 0.02) < 1e-15);
        CHECK(std::fabs(x[V2] - std::exp(-2 * (3 - t)) * 0.05) < 1e-15);
        CHECK(sol.xi(1, t) == 0.0);
        CHECK(sol.zeta(2, t) == 0.0);
    }
    const auto du = solve_bvp_variational(s, sol, BvpParameter::U10);
    CHECK(std::fabs(du.at(1.3)[U1] - std::exp(-1.3)) < 1e-15);
    CHECK(du.at(1.3)[V1] == 0.0);
    const auto dv = solve_bvp_variational(s, sol, BvpParameter::V1Tau);
    CHECK(std::fabs(dv.at(1.3)[V1] - std::exp(-(3 - 1.3))) < 1e-15);
    CHECK(dv.at(1.3)[U2] == 0.0);
}

TEST_CASE("zero flight time gives the boundary point") {
    const auto s = cubic_gamma(0.7);
    const BvpBoundary b{0.0, 0.01, 0.02, 0.03, 0.04, 0.05};
    const auto sol = solve_bvp(s, b);
    CHECK(sol.node(0) == State4{0.01, 0.02, 0.03, 0.04});
}

TEST_CASE("cubic BVP agrees with the shooting oracle and is a fixed point") {
    for (double g : {0.3, 0.7, 1.0}) {
        const auto s = cubic_gamma(g);
        const double d = 0.05;
        const BvpBoundary b{5.0, d, -0.6 * d, 0.8 * d, d, d};
        const auto sol = solve_bvp(s, b);
        CHECK(sol.contraction_ratio < 0.5);
        CHECK(fixed_point_defect(s, sol) <= 2e-12 * (1 + d));
        const State4 end = sol.node(sol.size() - 1);
        CHECK(end[V1] == doctest::Approx(b.v1tau).epsilon(1e-15));
        const State4 back = flow(s, end, -b.tau, tight());
        const State4 start = sol.node(0);
        CHECK(std::fabs(back[V1] - start[V1]) < 1e-8);
        CHECK(std::fabs(back[V2] - start[V2]) < 1e-8);
        const State4 fwd = flow(s, start, b.tau, tight());
        CHECK(norm_inf(fwd - end) < 1e-7);
    }
}

TEST_CASE("variational BVP matches finite differences of the BVP") {
    const auto s = cubic_gamma(0.3);
    const double d = 0.05;
    const BvpBoundary b{4.0, 0.7 * d, d, 0.5 * d, d, d};
    BvpOptions o;
    o.tol = 0.0;
    const auto sol = solve_bvp(s, b, o);
    const double h = 1e-5;
    auto perturbed = [&](BvpParameter p, double e) {
        BvpBoundary q = b;
        if (p == BvpParameter::U10) q.u10 += e;
        if (p == BvpParameter::V1Tau) q.v1tau += e;
        if (p == BvpParameter::Tau) q.tau += e;
        return solve_bvp(s, q, o);
    };
    for (BvpParameter p : {BvpParameter::U10, BvpParameter::V1Tau, BvpParameter::Tau}) {
        const auto var = solve_bvp_variational(s, sol, p, o);
        const auto plus = perturbed(p, h), minus = perturbed(p, -h);
        // Compare v(0) and u1 at the right end, the quantities the chain rule uses.
        const double fd_v1 = (plus.node(0)[V1] - minus.node(0)[V1]) / (2 * h);
        const double fd_v2 = (plus.node(0)[V2] - minus.node(0)[V2]) / (2 * h);
        const double fd_u1 = (plus.node(plus.size() - 1)[U1] - minus.node(minus.size() - 1)[U1]) / (2 * h);
        const State4 v0 = var.node(0), vt = var.node(var.size() - 1);
        CHECK(std::fabs(v0[V1] - fd_v1) <= 1e-6 * std::fabs(fd_v1));
        CHECK(std::fabs(v0[V2] - fd_v2) <= 1e-6 * std::fabs(fd_v2));
        if (p != BvpParameter::Tau) CHECK(std::fabs(vt[U1] - fd_u1) <= 1e-6 * std::fabs(fd_u1));
    }
}

TEST_CASE("local passage through the BVP route matches direct integration") {
    const auto s = cubic_gamma(0.3);
    const double d = 0.05, u10 = 4e-3, v10 = 6e-3;
    // Lift onto Πs by Newton on H for v20.
    double v20 = s.gamma() * u10 * v10 / d;
    for (int i = 0; i < 30; ++i) {
        const State4 x{u10, d, v10, v20};
        v20 -= s.h(x) / s.grad_h(x)[V2];
    }
    const auto p = solve_local_passage(s, u10, d, v10, v20, d);
    const auto hit = integrate_to_section(s, {u10, d, v10, v20}, {V2, d}, Crossing::Increasing, 100.0, tight());
    CHECK(std::fabs(hit.t - p.tau) < 1e-8);
    CHECK(std::fabs(hit.x[U1] - p.u1tau) < 1e-10);
    CHECK(std::fabs(hit.x[V1] - p.v1tau) < 1e-10);
}

TEST_CASE("chained derivatives on the linear system reproduce the closed forms") {
    const double l1 = 1.0, l2 = 1.0 / 0.3, d = 0.05, u10 = 3e-3, v10 = 5e-3;
    const auto s = linear_system(l1, l2);
    const double g = s.gamma();
    const double v20 = g * u10 * v10 / d;
    const auto p = solve_local_passage(s, u10, d, v10, v20, d);
    CHECK(std::fabs(p.tau - std::log(d / v20) / l2) < 1e-12);
    const auto j = chained_local_map_derivatives(s, p);
    const double e = std::exp(l1 * p.tau);
    CHECK(j.deta2_dv10 / ((1 - g) * e) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(j.deta2_dv1tau_raw / e == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(j.deta1_du10 / ((1 + g) / e) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(j.deta2_du10 / (-g * v10 / u10 * e) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(j.deta1_dv10 / (g * u10 / v10 / e) == doctest::Approx(1.0).epsilon(1e-10));
}
