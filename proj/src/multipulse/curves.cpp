#include <algorithm>
#include <cmath>
#include <limits>

#include "homlab/error.hpp"
#include "homlab/multipulse.hpp"

namespace homlab {

double PlanarCurve::length() const {
    double l = 0.0;
    for (std::size_t k = 1; k < samples.size(); ++k)
        l += std::hypot(samples[k][0] - samples[k - 1][0], samples[k][1] - samples[k - 1][1]);
    return l;
}

bool CurveWindow::contains(const Vec2& p) const {
    const double r = std::hypot(p[0] - center[0], p[1] - center[1]);
    return r < radius && !(punctured && r == 0.0);
}

PlanarCurve resample_uniform(const PlanarCurve& c, std::size_t n) {
    if (c.samples.size() < 2 || n < 2) return c;
    const bool has_params = c.params.size() == c.samples.size();
    std::vector<double> s(c.samples.size(), 0.0);
    for (std::size_t k = 1; k < s.size(); ++k)
        s[k] = s[k - 1] + std::hypot(c.samples[k][0] - c.samples[k - 1][0], c.samples[k][1] - c.samples[k - 1][1]);
    PlanarCurve out;
    out.tag = c.tag;
    if (s.back() == 0.0) return c;
    std::size_t seg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double target = s.back() * static_cast<double>(k) / static_cast<double>(n - 1);
        while (seg + 2 < s.size() && s[seg + 1] < target) ++seg;
        const double span = s[seg + 1] - s[seg];
        const double t = span > 0.0 ? std::clamp((target - s[seg]) / span, 0.0, 1.0) : 0.0;
        const Vec2& a = c.samples[seg];
        const Vec2& b = c.samples[seg + 1];
        out.samples.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
        if (has_params) out.params.push_back(c.params[seg] + t * (c.params[seg + 1] - c.params[seg]));
    }
    out.samples.front() = c.samples.front();
    out.samples.back() = c.samples.back();
    return out;
}

PlanarCurve iterate_curve(const std::function<Vec2(const Vec2&)>& map, const PlanarCurve& curve,
                          const CurveWindow& window) {
    const bool has_params = curve.params.size() == curve.samples.size();
    std::vector<std::vector<std::size_t>> runs(1);
    std::vector<Vec2> image(curve.samples.size());
    for (std::size_t k = 0; k < curve.samples.size(); ++k) {
        bool keep = false;
        try {
            image[k] = map(curve.samples[k]);
            keep = all_finite(image[k]) && window.contains(image[k]);
        } catch (const Error&) {
        }
        if (keep) {
            runs.back().push_back(k);
        } else if (!runs.back().empty()) {
            runs.emplace_back();
        }
    }
    const auto best = std::max_element(runs.begin(), runs.end(),
                                       [](const auto& a, const auto& b) { return a.size() < b.size(); });
    if (best->empty()) raise(ErrorKind::EmptyCurve, "the whole image of the curve left the window");
    PlanarCurve out;
    out.tag = curve.tag;
    for (std::size_t k : *best) {
        out.samples.push_back(image[k]);
        if (has_params) out.params.push_back(curve.params[k]);
    }
    if (out.samples.size() < 2) return out;
    return resample_uniform(out, curve.samples.size());
}

namespace {

double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }
Vec2 sub(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }

// Signed distance of x from the line through p along direction e.
double side(const Vec2& p, const Vec2& e, const Vec2& x) { return cross(e, sub(x, p)) / std::hypot(e[0], e[1]); }

double point_segment(const Vec2& x, const Vec2& a, const Vec2& b) {
    const Vec2 e = sub(b, a), d = sub(x, a);
    const double ee = e[0] * e[0] + e[1] * e[1];
    const double t = ee > 0.0 ? std::clamp((d[0] * e[0] + d[1] * e[1]) / ee, 0.0, 1.0) : 0.0;
    return std::hypot(d[0] - t * e[0], d[1] - t * e[1]);
}

double directed(const PlanarCurve& a, const PlanarCurve& b) {
    double worst = 0.0;
    for (const Vec2& x : a.samples) {
        double best = std::numeric_limits<double>::infinity();
        if (b.samples.size() == 1) best = std::hypot(x[0] - b.samples[0][0], x[1] - b.samples[0][1]);
        for (std::size_t k = 1; k < b.samples.size(); ++k)
            best = std::min(best, point_segment(x, b.samples[k - 1], b.samples[k]));
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

std::vector<CurveIntersection> curve_intersections(const PlanarCurve& a, const PlanarCurve& b, double tol) {
    std::vector<CurveIntersection> out;
    for (std::size_t i = 1; i < a.samples.size(); ++i) {
        const Vec2 &a0 = a.samples[i - 1], &a1 = a.samples[i];
        const Vec2 ea = sub(a1, a0);
        for (std::size_t j = 1; j < b.samples.size(); ++j) {
            const Vec2 &b0 = b.samples[j - 1], &b1 = b.samples[j];
            const Vec2 eb = sub(b1, b0);
            const double s0 = side(b0, eb, a0), s1 = side(b0, eb, a1);
            const double r0 = side(a0, ea, b0), r1 = side(a0, ea, b1);
            // Half-open in both segments so a crossing at a shared vertex counts once.
            if (!((s0 < 0.0) != (s1 < 0.0)) || !((r0 < 0.0) != (r1 < 0.0))) continue;
            double lo = 0.0, hi = 1.0, flo = s0;
            Vec2 x = a0;
            for (int it = 0; it < 200; ++it) {
                const double m = 0.5 * (lo + hi);
                x = {a0[0] + m * ea[0], a0[1] + m * ea[1]};
                const double fm = side(b0, eb, x);
                if (std::fabs(fm) <= tol || hi - lo <= std::numeric_limits<double>::epsilon()) break;
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = m;
                    flo = fm;
                } else {
                    hi = m;
                }
            }
            CurveIntersection c;
            c.point = x;
            const double na = std::hypot(ea[0], ea[1]), nb = std::hypot(eb[0], eb[1]);
            c.angle = std::asin(std::min(1.0, std::fabs(cross(ea, eb)) / (na * nb)));
            c.tangential = c.angle < 1e-3;
            c.seg1 = i - 1;
            c.seg2 = j - 1;
            c.t1 = 0.5 * (lo + hi);
            const Vec2 d = sub(x, b0);
            c.t2 = std::clamp((d[0] * eb[0] + d[1] * eb[1]) / (nb * nb), 0.0, 1.0);
            out.push_back(c);
        }
    }
    return out;
}

double hausdorff_distance(const PlanarCurve& a, const PlanarCurve& b) {
    if (a.samples.empty() || b.samples.empty()) raise(ErrorKind::EmptyCurve, "Hausdorff distance of an empty curve");
    return std::max(directed(a, b), directed(b, a));
}

}  // namespace homlab
