#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>

#include "homlab/error.hpp"
#include "homlab/manifold.hpp"

using namespace homlab;

namespace {

std::shared_ptr<PoincareMap> linear_poincare(double gamma, const Mat2& A) {
    auto local = std::make_shared<LinearLocalMap>(gamma, 1.0, 0.1);
    auto global = std::make_shared<AffineGlobalMap>(A);
    return std::make_shared<PoincareMap>(local, global);
}

Mat2 jacobian_fd(const CrossMap& f, double x, double y, double h) {
    Mat2 j{};
    const Vec2 xp = f.cross(x + h, y), xm = f.cross(x - h, y);
    const Vec2 yp = f.cross(x, y + h), ym = f.cross(x, y - h);
    for (int r = 0; r < 2; ++r) {
        j[r][0] = (xp[r] - xm[r]) / (2.0 * h);
        j[r][1] = (yp[r] - ym[r]) / (2.0 * h);
    }
    return j;
}

}  // namespace

TEST_CASE("wz chart round trip on random points") {
    const WZChart chart{default_chart_alpha(0.3), 4.0, 1e-2 / std::sqrt(17.0)};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> w(0.25, 4.0), v(-chart.eps2, chart.eps2);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double vv = v(rng);
        const Vec2 p{vv / w(rng), vv};
        const Vec2 q = chart.from_wz(chart.to_wz(p));
        worst = std::max(worst, std::hypot(q[0] - p[0], q[1] - p[1]) / std::hypot(p[0], p[1]));
    }
    CHECK(worst <= 1e-12);
    CHECK(chart.to_wz({1e-3, 0.0})[1] == 0.0);
    const Vec2 diag = chart.to_wz({2e-3, 2e-3});
    CHECK(diag[0] == 1.0);
    CHECK(diag[1] == doctest::Approx(std::pow(2e-3, chart.alpha)).epsilon(1e-15));
    CHECK_THROWS_AS(chart.to_wz({0.0, 1e-3}), Error);
    CHECK(default_chart_alpha(0.3) == doctest::Approx(0.2));
    CHECK(default_chart_alpha(0.05) == doctest::Approx(0.1));
}

TEST_CASE("model cross map inverts in closed form and fixes the constant graph") {
    const double gamma = 0.3, C = 0.5;
    const auto m = model_cross_map(1.5, C, gamma, 0.3);
    for (double zb : {0.2, 1e-2, -1e-3, 1e-8}) {
        const double exact = std::copysign(std::pow(std::fabs(zb) / C, 1.0 / (1.0 - 2.0 * gamma)), zb);
        CHECK(std::fabs(m->G(0.7, zb) - exact) <= 1e-10 * std::fabs(exact));
    }
    CHECK(std::fabs(m->G(1.0, 1e-40)) < 1e-90);
    CHECK(m->cross(2.0, 0.0)[0] == 1.5);
    CHECK(m->cross(2.0, 0.0)[1] == 0.0);

    const ManifoldCurve c = graph_transform_fixed_point(*m, 0.1, 1.5);
    for (double w : c.w) CHECK(w == 1.5);
    CHECK(c.lipschitz == 0.0);
    CHECK(c.z[c.center()] == 0.0);
    CHECK(c.z.front() == -0.1);
    CHECK(c.z.back() == 0.1);
}

TEST_CASE("graph transform rejects a map without contraction") {
    // w̄ = 2w − 1 expands graphs away from w ≡ 1
    const FunctionCrossMap expand([](double w, double zb) { return Vec2{2.0 * w - 1.0 + zb, 0.5 * zb}; });
    std::vector<double> seed(257, 1.0);
    for (std::size_t k = 0; k < seed.size(); ++k) seed[k] += 1e-3 * std::sin(0.1 * static_cast<double>(k));
    GraphTransformOptions opt;
    opt.samples = 257;
    CHECK_THROWS_AS(graph_transform_fixed_point(expand, 0.1, 1.0, opt, &seed), Error);
}

TEST_CASE("composition of constant cross-forms is exact") {
    auto c1 = std::make_shared<FunctionCrossMap>([](double, double) { return Vec2{0.3, -0.2}; });
    auto c2 = std::make_shared<FunctionCrossMap>([](double, double) { return Vec2{0.7, 0.1}; });
    const ComposedCrossMap t(c1, c2, 0.0, 0.0);
    const Vec2 r = t.cross(0.4, 0.9);
    CHECK(r[0] == 0.7);
    CHECK(r[1] == -0.2);
    CHECK(t.derivative_bound() == 0.0);
}

TEST_CASE("composition of two quarter contractions stays within the weighted bound") {
    auto c1 = std::make_shared<FunctionCrossMap>([](double x, double yb) {
        return Vec2{0.25 * std::sin(x) + 0.25 * yb, 0.25 * x - 0.25 * std::tanh(yb)};
    });
    auto c2 = std::make_shared<FunctionCrossMap>([](double xb, double yh) {
        return Vec2{0.25 * xb - 0.25 * std::sin(yh), 0.25 * std::tanh(xb) + 0.25 * yh};
    });
    const ComposedCrossMap t(c1, c2, 0.25, 0.25);
    CHECK(t.derivative_bound() == doctest::Approx(1.0 / 3.0));
    double worst = 0.0;
    for (double x : {-0.8, -0.1, 0.3, 0.9})
        for (double y : {-0.7, 0.0, 0.5}) {
            const Mat2 j = jacobian_fd(t, x, y, 1e-6);
            // equal weights: the weighted norm is the max-row-sum norm
            worst = std::max({worst, std::fabs(j[0][0]) + std::fabs(j[0][1]), std::fabs(j[1][0]) + std::fabs(j[1][1])});
        }
    CHECK(worst < t.derivative_bound());
    CHECK_THROWS_AS(ComposedCrossMap(c1, c2, 2.0, 0.5), Error);
}

TEST_CASE("classification tables") {
    const Classification a = classify_homoclinic(0.6, 1.0, -1.0, 1.0);
    CHECK(a.gamma_case == GammaCase::GammaGtHalf);
    CHECK(a.s_manifold == ManifoldVerdict::Trivial);
    CHECK(a.u_manifold == ManifoldVerdict::Trivial);
    CHECK(classify_homoclinic(1.0, 1.0, -1.0, 1.0).gamma_case == GammaCase::Resonant);

    const Classification b = classify_homoclinic(0.3, 1.0, -1.0, 1.0);
    CHECK(b.s_manifold == ManifoldVerdict::Curve);
    CHECK(b.u_manifold == ManifoldVerdict::Curve);
    const Classification c = classify_homoclinic(0.3, -1.0, 1.0, 1.0);
    CHECK(c.s_manifold == ManifoldVerdict::Trivial);
    CHECK(c.u_manifold == ManifoldVerdict::Trivial);
    CHECK_THROWS_AS(classify_homoclinic(0.3, 0.0, 1.0, 1.0), Error);

    const Classification joint = classify_figure_eight(0.3, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0);
    CHECK(joint.u_manifold == ManifoldVerdict::Curve);
    CHECK(joint.s_manifold == ManifoldVerdict::Curve);
    CHECK(joint.u_loop1 == ManifoldVerdict::Trivial);
    const Classification loops = classify_figure_eight(0.3, 1.0, -1.0, 1.0, 1.0, -1.0, 1.0);
    CHECK(loops.u_manifold == ManifoldVerdict::Trivial);
    CHECK(loops.u_loop1 == ManifoldVerdict::Curve);
    CHECK(loops.u_loop2 == ManifoldVerdict::Curve);
    const Classification mixed = classify_figure_eight(0.3, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0);
    CHECK(mixed.u_manifold == ManifoldVerdict::Trivial);
    CHECK(mixed.s_manifold == ManifoldVerdict::Trivial);
    CHECK(to_json(mixed)["loops"].size() == 2);
}

TEST_CASE("unstable curve of the closed-form linear passage") {
    const auto T = linear_poincare(0.3, Mat2{{{1.0, 1.0}, {-1.0, 1.0}}});
    const ManifoldResult r = build_unstable_curve(T);
    CHECK(r.bounds.contractive());
    CHECK(r.curve.w_star == 1.0);
    CHECK(r.curve.w[r.curve.center()] == 1.0);
    CHECK(r.curve.lipschitz <= r.bounds.lipschitz);
    const ManifoldVerification v = verify_manifold(r);
    CHECK(v.invariance_samples > 0);
    CHECK(v.invariance_residual <= 5.0 * GraphTransformOptions{}.tol);
    CHECK(v.tangency_error <= 1e-3);
    CHECK(v.backward_monotone);
    CHECK(v.backward_norms.size() >= 3);
    for (double q : v.seed_ratios) CHECK(q < 1.0);
    // every curve point lies on the image side of D2 near ℓ*
    for (std::size_t k = 0; k < r.points.size(); ++k)
        if (k != r.curve.center()) CHECK(r.points[k][0] * r.points[k][1] > 0.0);

    const auto path = (std::filesystem::temp_directory_path() / "homlab_curve_test.csv").string();
    write_curve_csv(path, r);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "z,w,u1,v1");
    std::filesystem::remove(path);
}

TEST_CASE("flipping the sign of b destroys the unstable curve") {
    const auto T = linear_poincare(0.3, Mat2{{{1.0, -1.0}, {1.0, 1.0}}});
    CHECK(classify_homoclinic(0.3, -1.0, 1.0, 1.0).u_manifold == ManifoldVerdict::Trivial);
    CHECK_THROWS_AS(build_unstable_curve(T), Error);
    ManifoldOptions opt;
    opt.sign_precheck = false;
    opt.max_halvings = 6;
    try {
        build_unstable_curve(T, opt);
        FAIL("construction with bd < 0 succeeded");
    } catch (const Error& e) {
        const bool expected = e.kind() == ErrorKind::NotContractive || e.kind() == ErrorKind::NoContraction ||
                              e.kind() == ErrorKind::DomainExit;
        CHECK(expected);
    }
}

TEST_CASE("stable curve of the cubic system is tangent to the horizontal axis") {
    CubicParams p;
    p.lambda1 = 0.3;
    p.lambda2 = 1.0;
    auto spec = std::make_shared<SystemSpec>(reversed_system(cubic_system(p)));
    LocalMapOptions lo;
    lo.dual_route = false;
    lo.flow.step.rtol = 1e-12;
    lo.flow.step.atol = 1e-300;
    auto local = std::make_shared<FlowLocalMap>(spec, 0.1, lo);
    auto global = std::make_shared<AffineGlobalMap>(Mat2{{{1.0, 1.0}, {-1.0, 1.0}}});
    ManifoldOptions opt;
    opt.transform.samples = 257;
    const ManifoldResult r = build_stable_curve(local, global, {}, opt);
    CHECK(r.stable);
    CHECK(r.curve.w_star == doctest::Approx(1.0));  // −d/c on the swapped chart
    const ManifoldVerification v = verify_manifold(r);
    CHECK(v.tangency_error <= 1e-3);
    CHECK(v.backward_monotone);
    // points on Πs: v1/u1 → 0 toward M^s
    const auto& q = r.points[r.curve.center() + 8];
    CHECK(std::fabs(q[1] / q[0]) < 1e-3);
}

namespace {

struct EightSetup {
    std::shared_ptr<LinearLocalMap> local = std::make_shared<LinearLocalMap>(0.3, 1.0, 0.1);
    std::shared_ptr<AffineGlobalMap> g1, g2;
    std::shared_ptr<FigureEightMap> map;
    // rotation-type coefficients: ad − bc = 1, b + c = 0
    explicit EightSetup(double sb) {
        const Mat2 A{{{0.8, 0.6 * sb}, {-0.6 * sb, 0.8}}};
        g1 = std::make_shared<AffineGlobalMap>(A, SectionKind::Pu1, SectionKind::Ps1);
        g2 = std::make_shared<AffineGlobalMap>(A, SectionKind::Pu2, SectionKind::Ps2);
        map = std::make_shared<FigureEightMap>(local, g1, g2);
    }
};

}  // namespace

TEST_CASE("figure-eight with b_i d_i < 0: composed curve alternates between the loops") {
    const EightSetup s(-1.0);
    const FigureEightManifold r = build_figure_eight_unstable(s.map);
    CHECK(r.K1 * r.K2 < 1.0);
    CHECK(r.composed_bound < 1.0);
    CHECK(std::max(r.composed.Fw + r.composed.Fz, r.composed.Gw + r.composed.Gz) <= r.composed_bound);
    CHECK(r.curve.w_star == doctest::Approx(0.8 / 0.6));
    const AlternationReport a = track_alternation(*s.map, r);
    CHECK(a.alternates);
    CHECK(a.sections.size() >= 4);
    CHECK(a.max_curve_distance <= 1e-12);
}

TEST_CASE("figure-eight with b_i d_i > 0: joint route fails, per-loop curves exist") {
    const EightSetup s(1.0);
    CHECK_THROWS_AS(build_figure_eight_unstable(s.map), Error);
    ManifoldOptions opt;
    opt.sign_precheck = false;
    opt.max_halvings = 6;
    CHECK_THROWS_AS(build_figure_eight_unstable(s.map, opt), Error);
    const auto loops = per_loop_unstable_curves(s.local, s.g1, s.g2, {});
    for (const auto& l : loops) {
        CHECK(l.curve.w_star == doctest::Approx(0.8 / 0.6));
        CHECK(verify_manifold(l).tangency_error <= 1e-3);
    }
    const Classification c = classify_figure_eight(0.3, 0.6, -0.6, 0.8, 0.6, -0.6, 0.8);
    CHECK(c.u_manifold == ManifoldVerdict::Trivial);
    CHECK(c.u_loop1 == ManifoldVerdict::Curve);
}
