#include <algorithm>
#include <cmath>

#include "escape.hpp"
#include "homlab/error.hpp"
#include "homlab/manifold.hpp"

namespace homlab {

namespace {

Vec2 reflect(const Vec2& p) { return {-p[0], p[1]}; }

double max_partial(const CrossBounds& b) { return std::max({b.Fw, b.Fz, b.Gw, b.Gz}); }

// One crossing Πs_from → Πs_to in the reflected charts; DomainExit when the
// orbit lands on the other loop's section.
std::shared_ptr<PlanarCrossMap> crossing(std::shared_ptr<const FigureEightMap> map, SectionKind from,
                                         SectionKind to, const WZChart& chart, double w_star, double gamma) {
    auto f = [map, from, to, chart](const Vec2& wz) {
        const FigureEightMap::Step s = map->apply(from, reflect(chart.from_wz(wz)));
        if (s.section != to) raise(ErrorKind::DomainExit, "figure-eight orbit stays on the same loop");
        return chart.to_wz(reflect(s.point));
    };
    return std::make_shared<PlanarCrossMap>(f, w_star, chart.z_max(), 1.0 - 2.0 * gamma);
}

}  // namespace

FigureEightManifold build_figure_eight_unstable(std::shared_ptr<const FigureEightMap> map,
                                                const ManifoldOptions& opt) {
    if (!(opt.gamma > 0.0 && opt.gamma < 0.5))
        raise(ErrorKind::InvalidArgument, "the cross-map construction needs 2 lambda1 < lambda2");
    const Mat2 A1 = map->global(1).differential(), A2 = map->global(2).differential();
    const double b1 = A1[0][1], d1 = A1[1][1], b2 = A2[0][1], d2 = A2[1][1];
    if (opt.sign_precheck && !(b1 * d1 < 0.0 && b2 * d2 < 0.0))
        raise(ErrorKind::DomainExit, "the alternating route needs b_i d_i < 0 on both loops");
    // reflected slopes of the image lines on Πs2 (via Γ2) and Πs1 (via Γ1)
    const double w12 = -d2 / b2, w21 = -d1 / b1;

    FigureEightManifold r;
    double m = opt.m;
    for (double w : {w12, w21})
        if (w > 0.0 && !(w > 1.0 / m && w < m)) m = std::max(m, 2.0 * std::max(w, 1.0 / w));
    r.chart.m = m;
    r.chart.alpha = opt.alpha > 0.0 ? opt.alpha : default_chart_alpha(opt.gamma);
    r.chart.eps2 = opt.eps / std::sqrt(1.0 + m * m);
    const SectionKind s1 = map->global(1).target(), s2 = map->global(2).target();
    auto t12 = crossing(map, s1, s2, r.chart, w12, opt.gamma);
    auto t21 = crossing(map, s2, s1, r.chart, w21, opt.gamma);

    double theta = r.chart.z_max();
    for (;;) {
        bool ok = false;
        try {
            r.bounds12 = measure_cross_bounds(*t12, m, theta);
            r.bounds21 = measure_cross_bounds(*t21, m, theta);
            r.K1 = max_partial(r.bounds12);
            r.K2 = max_partial(r.bounds21);
            if (r.K1 * r.K2 < 1.0 && r.bounds12.maps_into && r.bounds21.maps_into) {
                r.cross = std::make_shared<ComposedCrossMap>(t12, t21, r.K1, r.K2);
                r.composed_bound = r.cross->derivative_bound();
                r.composed = measure_cross_bounds(*r.cross, m, theta);
                ok = r.composed_bound < 1.0 && r.composed.contractive();
            }
        } catch (const Error& e) {
            if (!detail::escape(e.kind()) && e.kind() != ErrorKind::NotComposable) throw;
        }
        if (ok) break;
        if (++r.halvings > opt.max_halvings)
            raise(ErrorKind::NotContractive, "composed cross-map violates the contraction conditions");
        theta *= 0.5;
    }
    r.theta = theta;
    r.curve = graph_transform_fixed_point(*r.cross, theta, w21, opt.transform);
    r.points.reserve(r.curve.z.size());
    for (std::size_t k = 0; k < r.curve.z.size(); ++k)
        r.points.push_back(r.curve.z[k] == 0.0 ? Vec2{0.0, 0.0}
                                               : reflect(r.chart.from_wz({r.curve.w[k], r.curve.z[k]})));
    return r;
}

AlternationReport track_alternation(const FigureEightMap& map, const FigureEightManifold& r, double z0,
                                    int max_steps) {
    AlternationReport a;
    const SectionKind s1 = map.global(1).target(), s2 = map.global(2).target();
    const MonotoneCubic H(r.curve.z, r.curve.w);
    std::vector<Vec2> pts{reflect(r.chart.from_wz({H(z0), z0}))};
    a.sections.push_back(s1);
    const double m = r.chart.m, eps = map.options().eps;
    for (int i = 0; i < max_steps; ++i) {
        FigureEightMap::Step s;
        try {
            s = map.apply(a.sections.back(), pts.back());
        } catch (const Error& e) {
            if (!detail::escape(e.kind())) throw;
            break;
        }
        if (!(std::hypot(s.point[0], s.point[1]) < eps)) break;
        a.sections.push_back(s.section);
        pts.push_back(s.point);
    }
    a.alternates = pts.size() >= 3;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const Vec2& p = pts[k];
        a.norms.push_back(std::hypot(p[0], p[1]));
        a.regions.push_back(classify_region(p[0], p[1], m, eps).d);
        if (a.sections[k] != (k % 2 == 0 ? s1 : s2) || a.regions[k] != Region::DD2) a.alternates = false;
        if (k % 2 == 0) {
            const Vec2 wz = r.chart.to_wz(reflect(p));
            if (std::fabs(wz[1]) <= r.curve.theta)
                a.max_curve_distance = std::max(a.max_curve_distance, std::fabs(wz[0] - H(wz[1])));
        }
        if (k > 0 && !(a.norms[k] > a.norms[k - 1])) a.alternates = false;
    }
    return a;
}

}  // namespace homlab

namespace homlab {

std::array<ManifoldResult, 2> per_loop_unstable_curves(std::shared_ptr<const LocalMap> local,
                                                       std::shared_ptr<const GlobalMap> global1,
                                                       std::shared_ptr<const GlobalMap> global2,
                                                       const PoincareOptions& popt, const ManifoldOptions& opt) {
    return {build_unstable_curve(std::make_shared<PoincareMap>(local, std::move(global1), popt), opt),
            build_unstable_curve(std::make_shared<PoincareMap>(local, std::move(global2), popt), opt)};
}

}  // namespace homlab
