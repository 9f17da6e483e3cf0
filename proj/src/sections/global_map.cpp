#include "homlab/global_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "homlab/error.hpp"

namespace homlab {

namespace {

// Crossing of the section toward O along the integration direction.
Crossing toward_origin(double value, bool forward_in_time) {
    const bool decreasing = (value > 0.0) == forward_in_time;
    return decreasing ? Crossing::Decreasing : Crossing::Increasing;
}

double max_row_norm(const Mat2& m) {
    return std::max(std::fabs(m[0][0]) + std::fabs(m[0][1]), std::fabs(m[1][0]) + std::fabs(m[1][1]));
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

HomoclinicData build_homoclinic_data(SpecPtr spec, const SectionChart& unstable_chart,
                                     const SectionChart& stable_chart, const State4& mu, double tube_fraction,
                                     const FlowOptions& flow) {
    if (unstable_chart.stable_side() || !stable_chart.stable_side())
        raise(ErrorKind::InvalidArgument, "homoclinic data runs from an unstable-side to a stable-side section");
    HomoclinicData h;
    h.spec = spec;
    h.unstable_chart = unstable_chart;
    h.stable_chart = stable_chart;
    h.mu = mu;
    h.flow = flow;
    const SectionHit hit = integrate_to_section(*spec, mu, stable_chart.surface(),
                                                toward_origin(stable_chart.value(), true), 1e3, flow);
    h.ms = hit.x;
    h.transit_time = hit.t;
    h.orbit = integrate(*spec, mu, 0.0, hit.t, flow);
    h.orbit.x.back() = hit.x;
    double sup = 0.0;
    for (const auto& x : h.orbit.x) sup = std::max(sup, norm_inf(x));
    h.tube = tube_fraction * sup;
    return h;
}

AffineGlobalMap::AffineGlobalMap(const Mat2& a, SectionKind source, SectionKind target, double quadratic)
    : a_(a), source_(source), target_(target), q_(quadratic) {
    if (det(a) == 0.0) raise(ErrorKind::InvalidArgument, "affine global map must be invertible");
    inv_ = inverse(a);
}

Vec2 AffineGlobalMap::forward(const Vec2& p) const {
    const double s = q_ * p[0] * p[1];
    return mul(a_, Vec2{p[0] + s, p[1] + s});
}

Vec2 AffineGlobalMap::backward(const Vec2& p) const {
    const Vec2 y = mul(inv_, p);
    if (q_ == 0.0) return y;
    // Solve x + q x1 x2 (1, 1) = y: x1 − x2 = y1 − y2 is exact, Newton on x1.
    const double diff = y[0] - y[1];
    double x1 = y[0];
    for (int it = 0; it < 50; ++it) {
        const double x2 = x1 - diff;
        const double g = x1 + q_ * x1 * x2 - y[0];
        const double gd = 1.0 + q_ * (x2 + x1);
        const double step = g / gd;
        x1 -= step;
        if (std::fabs(step) <= 1e-17 * (1.0 + std::fabs(x1))) break;
    }
    return {x1, x1 - diff};
}

FlowGlobalMap::FlowGlobalMap(std::shared_ptr<const HomoclinicData> data) : data_(std::move(data)) {}

Vec2 FlowGlobalMap::forward(const Vec2& p) const {
    const HomoclinicData& h = *data_;
    const State4 x0 = lift_section_point(*h.spec, h.unstable_chart, p[0], p[1]);
    FlowOptions f = h.flow;
    const double T = h.transit_time;
    f.monitor = [&h, T](double t, const State4& x) {
        if (norm_inf(x - h.orbit.at(std::min(t, T))) > h.tube)
            throw Error(ErrorKind::TubeExit, "orbit left the tube around the homoclinic loop", t, x);
    };
    const SectionHit hit = integrate_to_section(*h.spec, x0, h.stable_chart.surface(),
                                                toward_origin(h.stable_chart.value(), true), 2.0 * T + 50.0, f);
    return chart_coordinates(hit.x);
}

Vec2 FlowGlobalMap::backward(const Vec2& p) const {
    const HomoclinicData& h = *data_;
    const State4 x0 = lift_section_point(*h.spec, h.stable_chart, p[0], p[1]);
    FlowOptions f = h.flow;
    const double T = h.transit_time;
    f.monitor = [&h, T](double t, const State4& x) {
        if (norm_inf(x - h.orbit.at(std::max(T + t, 0.0))) > h.tube)
            throw Error(ErrorKind::TubeExit, "orbit left the tube around the homoclinic loop", t, x);
    };
    const SectionHit hit = integrate_to_section(*h.spec, x0, h.unstable_chart.surface(),
                                                toward_origin(h.unstable_chart.value(), false), -(2.0 * T + 50.0), f);
    return chart_coordinates(hit.x);
}

Mat2 FlowGlobalMap::differential() const {
    const HomoclinicData& h = *data_;
    const VariationalPath vp = integrate_variational(*h.spec, h.mu, 0.0, h.transit_time, h.flow);
    const Mat4& phi = vp.final_phi();
    const auto tangents = lift_tangents(*h.spec, h.unstable_chart, h.mu);
    const State4 X = h.spec->field(h.ms);
    const Coord fc = h.stable_chart.fixed();
    if (X[fc] == 0.0) raise(ErrorKind::NonTransversal, "homoclinic orbit is tangent to the stable section");
    Mat2 a{};
    for (std::size_t col = 0; col < 2; ++col) {
        const State4 dx = mul(phi, tangents[col]);
        // Time shift returning the pushed vector onto the section.
        const State4 ds = dx - (dx[fc] / X[fc]) * X;
        a[0][col] = ds[U1];
        a[1][col] = ds[V1];
    }
    return a;
}

GlobalMapCoeffs global_map_coefficients(const GlobalMap& map, double fd_step, double agree_tol) {
    const Mat2 v = map.differential();
    auto central = [&map](double h) {
        Mat2 m{};
        for (std::size_t col = 0; col < 2; ++col) {
            Vec2 e{};
            e[col] = h;
            const Vec2 fp = map.forward(e);
            const Vec2 fm = map.forward(Vec2{-e[0], -e[1]});
            m[0][col] = (fp[0] - fm[0]) / (2.0 * h);
            m[1][col] = (fp[1] - fm[1]) / (2.0 * h);
        }
        return m;
    };
    const Mat2 d1 = central(fd_step), d2 = central(0.5 * fd_step);
    GlobalMapCoeffs g;
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            g.finite_difference[i][j] = (4.0 * d2[i][j] - d1[i][j]) / 3.0;
            scale = std::max(scale, std::fabs(v[i][j]));
            diff = std::max(diff, std::fabs(v[i][j] - g.finite_difference[i][j]));
        }
    g.a = v[0][0];
    g.b = v[0][1];
    g.c = v[1][0];
    g.d = v[1][1];
    g.route_discrepancy = scale > 0.0 ? diff / scale : diff;
    if (!(g.route_discrepancy <= agree_tol))
        raise(ErrorKind::ConsistencyError, "global map coefficient routes disagree: variational vs finite differences");
    g.ad_minus_bc = g.a * g.d - g.b * g.c;
    g.b_plus_c = g.b + g.c;
    g.non_transversal = std::fabs(g.d) < 1e-8;
    g.condition = g.ad_minus_bc == 0.0 ? std::numeric_limits<double>::infinity()
                                       : max_row_norm(v) * max_row_norm(inverse(v));
    return g;
}

TangentSlopes manifold_tangent_slopes(const GlobalMap& map) {
    const Mat2 a = map.differential();
    TangentSlopes s;
    s.unstable_direction = mul(a, Vec2{0.0, 1.0});
    if (det(a) == 0.0) raise(ErrorKind::NonTransversal, "global map differential is singular");
    s.stable_direction = solve(a, Vec2{1.0, 0.0});
    const Vec2& u = s.unstable_direction;
    const Vec2& w = s.stable_direction;
    if (u[0] == 0.0 && u[1] == 0.0) raise(ErrorKind::NonTransversal, "pushed tangent vector vanishes");
    s.slope_u_vertical = u[0] == 0.0;
    s.slope_s_vertical = w[0] == 0.0;
    s.slope_u = s.slope_u_vertical ? std::numeric_limits<double>::infinity() : u[1] / u[0];
    s.slope_s = s.slope_s_vertical ? std::numeric_limits<double>::infinity() : w[1] / w[0];
    // (b, d) ∝ unstable_direction and (d, −c) ∝ stable_direction.
    s.sign_bd = sign_of(u[0]) * sign_of(u[1]);
    s.sign_cd = -sign_of(w[0]) * sign_of(w[1]);
    return s;
}

namespace {

Vec2 swap2(const Vec2& p) { return {p[1], p[0]}; }

}  // namespace

Vec2 SwappedInverseGlobalMap::forward(const Vec2& p) const { return swap2(g_->backward(swap2(p))); }

Vec2 SwappedInverseGlobalMap::backward(const Vec2& p) const { return swap2(g_->forward(swap2(p))); }

Mat2 SwappedInverseGlobalMap::differential() const {
    const Mat2 a = g_->differential();
    const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if (det == 0.0) raise(ErrorKind::DegenerateCoefficients, "global map differential is singular");
    // P A⁻¹ P = [[a, −c], [−b, d]] / det
    return Mat2{{{a[0][0] / det, -a[1][0] / det}, {-a[0][1] / det, a[1][1] / det}}};
}

}  // namespace homlab
