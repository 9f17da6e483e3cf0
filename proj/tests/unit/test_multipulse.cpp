#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "homlab/error.hpp"
#include "homlab/multipulse.hpp"

using namespace homlab;

namespace {

PlanarCurve segment(Vec2 a, Vec2 b, int n) {
    PlanarCurve c;
    for (int k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / (n - 1);
        c.samples.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
        c.params.push_back(t);
    }
    return c;
}

SyntheticMultipulseConfig small_config() {
    SyntheticMultipulseConfig c;
    c.i_max = 2;
    c.j_max = 2;
    return c;
}

const MultipulseResult& small_result() {
    static const MultipulseResult r = find_multipulse(small_config());
    return r;
}

}  // namespace

TEST_CASE("perpendicular segments cross once at a right angle") {
    const auto hits = curve_intersections(segment({-1, 0}, {1, 0}, 7), segment({0.25, -1}, {0.25, 1}, 4));
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].point[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(std::fabs(hits[0].point[1]) < 1e-14);
    CHECK(hits[0].angle == doctest::Approx(M_PI / 2));
    CHECK_FALSE(hits[0].tangential);
}

TEST_CASE("parallel disjoint segments do not intersect") {
    CHECK(curve_intersections(segment({0, 0}, {1, 1}, 5), segment({0, 0.1}, {1, 1.1}, 5)).empty());
}

TEST_CASE("cubic graph meets a line at the cubic's root") {
    PlanarCurve cubic;
    const int n = 200001;
    for (int k = 0; k < n; ++k) {
        const double x = -1.0 + 2.0 * k / (n - 1);
        cubic.samples.push_back({x, x * x * x});
    }
    const auto hits = curve_intersections(cubic, segment({-1, 1.5}, {1, -0.5}, 2));
    REQUIRE(hits.size() == 1);
    // x³ + x − 1/2 = 0
    double x = 0.5;
    for (int it = 0; it < 50; ++it) x -= (x * x * x + x - 0.5) / (3 * x * x + 1);
    CHECK(std::fabs(hits[0].point[0] - x) < 1e-10);
    CHECK(std::fabs(hits[0].point[1] - x * x * x) < 1e-10);
}

TEST_CASE("nearly parallel crossing is flagged tangential, not dropped") {
    const auto hits = curve_intersections(segment({-1, -1e-4}, {1, 1e-4}, 3), segment({-1, 0}, {1, 0}, 3));
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].tangential);
}

TEST_CASE("iterating with the identity leaves a curve unchanged") {
    const PlanarCurve c = segment({0.01, 0.02}, {0.03, -0.01}, 17);
    const PlanarCurve out = iterate_curve([](const Vec2& p) { return p; }, c, {{0.0, 0.0}, 1.0, false});
    REQUIRE(out.samples.size() == c.samples.size());
    for (std::size_t k = 0; k < c.samples.size(); ++k) {
        CHECK(std::fabs(out.samples[k][0] - c.samples[k][0]) < 1e-16);
        CHECK(std::fabs(out.samples[k][1] - c.samples[k][1]) < 1e-16);
    }
}

TEST_CASE("a curve mapped out of the window is an EmptyCurve error") {
    const PlanarCurve c = segment({0.0, 0.0}, {0.1, 0.0}, 5);
    try {
        iterate_curve([](const Vec2& p) { return Vec2{p[0] + 5.0, p[1]}; }, c, {{0.0, 0.0}, 1.0, false});
        FAIL("expected EmptyCurve");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyCurve);
    }
}

TEST_CASE("curves contracting onto a line have decreasing Hausdorff distance") {
    const auto contract = [](const Vec2& p) { return Vec2{p[0], 0.3 * p[1] + 0.05 * p[0] * p[1]}; };
    const PlanarCurve line = segment({-1, 0}, {1, 0}, 33);
    PlanarCurve c = segment({-1, 0.2}, {1, 0.4}, 33);
    double last = hausdorff_distance(c, line);
    for (int k = 0; k < 6; ++k) {
        c = iterate_curve(contract, c, {{0.0, 0.0}, 2.0, false});
        const double h = hausdorff_distance(c, line);
        CHECK(h < last);
        last = h;
    }
}

TEST_CASE("multipulse points are found, verified and distinct") {
    const MultipulseResult& r = small_result();
    CHECK_FALSE(r.partial);
    CHECK(r.points.size() == 9);
    CHECK(r.all_verified());
    CHECK(r.all_distinct());
    CHECK(r.hausdorff_decreasing());
    CHECK(r.pulses_increasing());
    CHECK(r.tangential == 0);
    CHECK(r.map_agreement < 1e-14);
    CHECK(r.graph_transform_agreement < 1e-12);
    CHECK(r.role_swap_defect_log10 < r.tol_log10);
    std::set<std::pair<int, int>> seen;
    for (const auto& p : r.points) {
        seen.insert({p.i, p.j});
        CHECK(p.n_forward == p.j);
        CHECK(p.n_backward == p.i);
        CHECK(p.pulses == p.i + p.j + 2);
        CHECK(p.residual_log10 < r.tol_log10);
        CHECK(p.angle > 1e-3);
    }
    CHECK(seen.size() == 9);
}

TEST_CASE("orbit tracking recognises p_{1,1} and p_{2,1} and rejects an offset point") {
    const SyntheticMultipulseConfig cfg = small_config();
    const MultipulseResult& r = small_result();
    for (const auto& p : r.points) {
        if ((p.i == 1 && p.j == 1) || (p.i == 2 && p.j == 1)) {
            const PulseCount c = count_pulses(cfg, r, p.u1_text, p.v1_text, 6);
            CHECK(c.n_backward == p.i);
            CHECK(c.n_forward == p.j);
            CHECK(verify_multipulse_point(cfg, r, p));
        }
        if (p.i == 2 && p.j == 2) CHECK_FALSE(verify_multipulse_point(cfg, r, p, 10.0));
    }
}

TEST_CASE("aligned tangents give no transversal points") {
    SyntheticMultipulseConfig cfg = small_config();
    cfg.align_tangents = true;
    const MultipulseResult r = find_multipulse(cfg);
    CHECK(r.transversality_margin < 1e-3);
    CHECK(r.points.empty());
    CHECK(r.tangential == 9);
}

TEST_CASE("the smallest setting already has a transversal point") {
    SyntheticMultipulseConfig cfg;
    cfg.i_max = cfg.j_max = 1;
    const MultipulseResult r = find_multipulse(cfg);
    CHECK(r.points.size() >= 1);
    CHECK(r.all_verified());
}

TEST_CASE("multipulse output is deterministic") {
    const MultipulseResult a = find_multipulse(small_config());
    std::ostringstream ca, cb;
    write_curves_csv(ca, a);
    write_curves_csv(cb, small_result());
    CHECK(to_json(a).dump() == to_json(small_result()).dump());
    CHECK(ca.str() == cb.str());
}

TEST_CASE("multipulse setting validation") {
    SyntheticMultipulseConfig cfg;
    cfg.gamma = 0.7;
    CHECK_THROWS_AS(find_multipulse(cfg), Error);
    cfg = SyntheticMultipulseConfig{};
    cfg.A = {{{1.0, -1.0}, {-1.0, 1.0}}};
    CHECK_THROWS_AS(find_multipulse(cfg), Error);
}
