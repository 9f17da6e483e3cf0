#include <doctest.h>

#include <cmath>
#include <memory>

#include "homlab/error.hpp"
#include "homlab/global_map.hpp"
#include "homlab/local_map.hpp"
#include "homlab/poincare.hpp"
#include "homlab/sections.hpp"

using namespace homlab;

namespace {

SystemSpec cubic_gamma(double gamma) {
    CubicParams p;
    p.lambda1 = 1.0;
    p.lambda2 = 1.0 / gamma;
    return cubic_system(p);
}

}  // namespace

TEST_CASE("lift of the origin of a chart is the fixed coordinate alone") {
    const auto spec = cubic_gamma(0.5);
    const SectionChart ps{SectionKind::Ps, 0.1};
    const State4 x = lift_section_point(spec, ps, 0.0, 0.0);
    CHECK(x[U1] == 0.0);
    CHECK(x[U2] == 0.1);
    CHECK(x[V1] == 0.0);
    CHECK(x[V2] == 0.0);
    const SectionChart pu2{SectionKind::Pu2, 0.1};
    const State4 y = lift_section_point(spec, pu2, 0.0, 0.0);
    CHECK(y[V2] == -0.1);
    CHECK(y[U2] == 0.0);
}

TEST_CASE("lift on the resonant linear saddle is v2 = u1 v1 / delta") {
    const auto spec = linear_system(1.0, 1.0);
    const SectionChart ps{SectionKind::Ps, 0.1};
    const State4 x = lift_section_point(spec, ps, 0.004, -0.003);
    CHECK(x[V2] == doctest::Approx(0.004 * -0.003 / 0.1).epsilon(1e-15));
}

TEST_CASE("lift lands on H = 0 for every chart of the cubic") {
    const auto spec = cubic_gamma(0.4);
    for (SectionKind k : {SectionKind::Ps, SectionKind::Pu, SectionKind::Sigma, SectionKind::Ps2}) {
        const SectionChart c{k, 0.1};
        for (double u : {-0.03, 0.0, 0.02})
            for (double v : {-0.02, 0.01, 0.04}) {
                const State4 x = lift_section_point(spec, c, u, v);
                CHECK(std::fabs(spec.h(x)) <= 1e-12);
                CHECK(x[c.fixed()] == c.value());
            }
    }
}

TEST_CASE("lift tangents match finite differences of the lift") {
    const auto spec = cubic_gamma(0.6);
    const SectionChart c{SectionKind::Pu, 0.1};
    const double u = 0.01, v = -0.02, h = 1e-6;
    const State4 x = lift_section_point(spec, c, u, v);
    const auto t = lift_tangents(spec, c, x);
    const State4 xu = lift_section_point(spec, c, u + h, v), xm = lift_section_point(spec, c, u - h, v);
    for (std::size_t i = 0; i < 4; ++i) CHECK(t[0][i] == doctest::Approx((xu[i] - xm[i]) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("region classification of representative points") {
    const double m = 4.0, eps = 1e-2, t = 1e-3;
    auto r = classify_region(t, t, m, eps);
    CHECK(r.y == YSector::Y2);
    CHECK(r.d == Region::D2);
    CHECK(classify_region(t, t / 8, m, eps).y == YSector::Y1);
    CHECK(classify_region(t / 8, t, m, eps).y == YSector::Y3);
    CHECK(classify_region(t, -t, m, eps).d == Region::DD2);
    // ties on the boundary rays belong to Y2
    CHECK(classify_region(t, t / m, m, eps).y == YSector::Y2);
    CHECK(classify_region(t, t * m, m, eps).y == YSector::Y2);
    CHECK(classify_region(eps, 0.0, m, eps).d == Region::Outside);
    CHECK(classify_region(t, 0.0, m, eps).d == Region::Outside);
    CHECK(in_D2(t, t, m));
    CHECK_FALSE(in_D2(t, -t, m));
}

TEST_CASE("closed-form linear local map agrees with the flow") {
    const double l1 = 1.0, l2 = 2.5, delta = 0.1;
    const auto spec = std::make_shared<const SystemSpec>(linear_system(l1, l2));
    LocalMapOptions opt;
    opt.flow.step.rtol = 1e-12;
    opt.flow.step.atol = 1e-15;
    const FlowLocalMap flow(spec, delta, opt);
    const LinearLocalMap closed(l1, l2, delta);
    for (const Vec2 p : {Vec2{2e-3, 1e-3}, Vec2{-1e-3, -3e-3}, Vec2{1e-3, -2e-3}}) {
        const Passage a = closed.forward(SectionKind::Ps, p);
        const Passage b = flow.forward(SectionKind::Ps, p);
        CHECK(a.target == b.target);
        CHECK(a.point[0] == doctest::Approx(b.point[0]).epsilon(1e-9));
        CHECK(a.point[1] == doctest::Approx(b.point[1]).epsilon(1e-9));
        const double v20 = (l1 / l2) * std::fabs(p[0] * p[1]) / delta;
        CHECK(a.time == doctest::Approx(std::log(delta / v20) / l2).epsilon(1e-14));
        CHECK(b.time == doctest::Approx(a.time).epsilon(1e-9));
        const Passage back = closed.backward(a.target, a.point);
        CHECK(back.target == SectionKind::Ps);
        CHECK(back.point[0] == doctest::Approx(p[0]).epsilon(1e-13));
        CHECK(back.point[1] == doctest::Approx(p[1]).epsilon(1e-13));
        const Passage fback = flow.backward(b.target, b.point);
        CHECK(fback.point[0] == doctest::Approx(p[0]).epsilon(1e-8));
        CHECK(fback.point[1] == doctest::Approx(p[1]).epsilon(1e-8));
    }
    CHECK_THROWS_AS(closed.forward(SectionKind::Ps, Vec2{0.0, 1e-3}), Error);
}

TEST_CASE("local map routes agree on the cubic") {
    const auto spec = cubic_gamma(0.4);
    const SectionChart ps{SectionKind::Ps, 0.1};
    for (const Vec2 p : {Vec2{2e-3, 3e-3}, Vec2{-4e-3, -1e-3}, Vec2{3e-3, -2e-3}}) {
        const auto r = local_map(spec, ps, p[0], p[1]);
        CHECK(r.route_discrepancy <= 1e-7);
        CHECK(r.exit.target == (p[0] * p[1] > 0 ? SectionKind::Pu : SectionKind::Sigma));
        CHECK(std::fabs(spec.h(r.exit.state)) <= 1e-10);
    }
}

TEST_CASE("section bookkeeping for exits and entries") {
    CHECK(exit_section(SectionKind::Ps, true) == SectionKind::Pu);
    CHECK(exit_section(SectionKind::Ps, false) == SectionKind::Sigma);
    CHECK(exit_section(SectionKind::Ps2, true) == SectionKind::Pu1);
    CHECK(exit_section(SectionKind::Ps1, false) == SectionKind::Pu2);
    CHECK(entry_section(SectionKind::Pu1, false) == SectionKind::Ps2);
}

TEST_CASE("identity tube global map has coefficients (1, 0, 0, 1)") {
    const AffineGlobalMap id(Mat2{{{1.0, 0.0}, {0.0, 1.0}}});
    const auto c = global_map_coefficients(id);
    CHECK(c.a == 1.0);
    CHECK(c.b == 0.0);
    CHECK(c.c == 0.0);
    CHECK(c.d == 1.0);
    CHECK(c.ad_minus_bc == 1.0);
    CHECK(c.route_discrepancy <= 1e-10);
}

TEST_CASE("tangent slopes follow the coefficient signs") {
    const AffineGlobalMap g(Mat2{{{0.5, 2.0}, {-1.0, 3.0}}}, SectionKind::Pu, SectionKind::Ps, 0.4);
    const auto c = global_map_coefficients(g);
    CHECK(c.a == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(c.b == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(c.c == doctest::Approx(-1.0).epsilon(1e-8));
    const auto s = manifold_tangent_slopes(g);
    CHECK(s.slope_u == doctest::Approx(3.0 / 2.0));
    CHECK(s.sign_bd == 1);
    CHECK(s.sign_cd == -1);
    const Vec2 p{1e-3, -2e-3};
    const Vec2 q = g.backward(g.forward(p));
    CHECK(q[0] == doctest::Approx(p[0]).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(p[1]).epsilon(1e-12));
}

TEST_CASE("Poincare map fixes M^s and inverts") {
    const auto local = std::make_shared<LinearLocalMap>(0.3, 1.0, 0.1);
    const auto global = std::make_shared<AffineGlobalMap>(Mat2{{{1.0, 1.0}, {-1.0, 1.0}}});
    const PoincareMap t(local, global);
    CHECK(t.apply({0.0, 0.0})[0] == 0.0);
    const Vec2 p{3e-3, 2e-3};
    const Vec2 q = t.apply(p);
    const Vec2 back = t.inverse(q);
    CHECK(back[0] == doctest::Approx(p[0]).epsilon(1e-12));
    CHECK(back[1] == doctest::Approx(p[1]).epsilon(1e-12));
    CHECK_THROWS_AS(t.apply({3e-3, -2e-3}), Error);
}

TEST_CASE("gamma above one half: images never return and accumulate on the d/b line") {
    const auto local = std::make_shared<LinearLocalMap>(0.7, 1.0, 0.1);
    const auto global = std::make_shared<AffineGlobalMap>(Mat2{{{1.0, 1.0}, {-1.0, 1.0}}});
    const RecurrenceReport r = recurrence_check(local, global, {1e-2, 5e-3, 2.5e-3});
    CHECK(r.w_star == 1.0);
    CHECK(r.no_return());
    CHECK(r.deviation_decreasing());
    for (const auto& l : r.levels) CHECK(l.in_domain > 0);
}

TEST_CASE("gamma below one half: a single expansion constant on D2") {
    const auto T = std::make_shared<PoincareMap>(std::make_shared<LinearLocalMap>(0.3, 1.0, 0.1),
                                                 std::make_shared<AffineGlobalMap>(Mat2{{{1.0, 1.0}, {-1.0, 1.0}}}));
    const ExpansionFit f = expansion_fit(*T, 0.3, 4.0);
    CHECK(f.samples > 40);
    CHECK(f.C > 0.0);
    CHECK(std::isfinite(f.C));
}
