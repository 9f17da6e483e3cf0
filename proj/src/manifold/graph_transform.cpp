#include <algorithm>
#include <cmath>
#include <fstream>

#include "homlab/error.hpp"
#include "homlab/io.hpp"
#include "homlab/manifold.hpp"
#include "escape.hpp"

namespace homlab {

double ManifoldCurve::eval(double zq) const { return MonotoneCubic(z, w)(zq); }

std::vector<double> graph_transform_step(const CrossMap& cross, const std::vector<double>& z,
                                         const std::vector<double>& h, double w_star) {
    const MonotoneCubic H(z, h);
    std::vector<double> out(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        if (z[k] == 0.0) {
            out[k] = w_star;
            continue;
        }
        // preimage on the graph: w = h(G(w, z̄)), a contraction since |h'| |G_w| < 1
        double w = h[k];
        Vec2 fg = cross.cross(w, z[k]);
        for (int it = 0; it < 100; ++it) {
            const double next = H(fg[1]);
            const bool done = std::fabs(next - w) <= 1e-15 * std::max(1.0, std::fabs(w));
            w = next;
            fg = cross.cross(w, z[k]);
            if (done) break;
        }
        out[k] = fg[0];
    }
    return out;
}

namespace {

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::fabs(a[i] - b[i]));
    return s;
}

using detail::escape;

}  // namespace

ManifoldCurve graph_transform_fixed_point(const CrossMap& cross, double theta, double w_star,
                                          const GraphTransformOptions& opt, const std::vector<double>* seed) {
    if (opt.samples < 5 || opt.samples % 2 == 0)
        raise(ErrorKind::InvalidArgument, "graph transform needs an odd sample count of at least 5");
    ManifoldCurve c;
    c.theta = theta;
    c.w_star = w_star;
    const int n = opt.samples, half = n / 2;
    c.z.resize(n);
    // sine-clustered toward ±θ, where the curve bends away from ℓ*
    constexpr double half_pi = 1.57079632679489661923;
    for (int k = 0; k < n; ++k) c.z[k] = theta * std::sin(half_pi * static_cast<double>(k - half) / half);
    c.z.front() = -theta;
    c.z.back() = theta;
    c.z[half] = 0.0;
    c.w = seed ? *seed : std::vector<double>(n, w_star);
    if (c.w.size() != c.z.size()) raise(ErrorKind::InvalidArgument, "seed curve has the wrong sample count");

    for (int it = 0; it < opt.max_iterations; ++it) {
        std::vector<double> next = graph_transform_step(cross, c.z, c.w, w_star);
        for (double v : next)
            if (!std::isfinite(v)) raise(ErrorKind::NoContraction, "graph transform produced a non-finite curve");
        const double change = sup_diff(next, c.w);
        c.w = std::move(next);
        c.changes.push_back(change);
        c.iterations = it + 1;
        const std::size_t m = c.changes.size();
        if (m >= 2 && c.changes[m - 2] > 0.0) c.contraction_ratio = change / c.changes[m - 2];
        if (change <= opt.tol) break;
        if (static_cast<int>(m) > opt.window && change >= c.changes[m - 1 - opt.window])
            raise(ErrorKind::NoContraction, "graph transform sup-change did not decrease over the window");
        if (it + 1 == opt.max_iterations) raise(ErrorKind::NoContraction, "graph transform did not converge");
    }
    for (int k = 0; k + 1 < n; ++k)
        c.lipschitz = std::max(c.lipschitz, std::fabs(c.w[k + 1] - c.w[k]) / (c.z[k + 1] - c.z[k]));
    return c;
}

ManifoldResult build_unstable_curve(std::shared_ptr<const PoincareMap> T, const ManifoldOptions& opt) {
    if (!(opt.gamma > 0.0 && opt.gamma < 0.5))
        raise(ErrorKind::InvalidArgument, "the cross-map construction needs 2 lambda1 < lambda2");
    const Mat2 A = T->global().differential();
    const double b = A[0][1], d = A[1][1];
    if (!(b * d > 0.0) && opt.sign_precheck)
        raise(ErrorKind::DomainExit, "with bd <= 0 the image line leaves D2 and no unstable curve exists there");
    ManifoldResult r;
    r.map = T;
    double m = opt.m;
    const double w_star = d / b;
    if (w_star > 0.0 && !(w_star > 1.0 / m && w_star < m)) m = 2.0 * std::max(w_star, 1.0 / w_star);
    r.chart.m = m;
    r.chart.alpha = opt.alpha > 0.0 ? opt.alpha : default_chart_alpha(opt.gamma);
    r.chart.eps2 = opt.eps / std::sqrt(1.0 + m * m);
    r.cross = poincare_cross_map(T, r.chart, opt.gamma);

    double theta = r.chart.z_max();
    for (;;) {
        bool ok = false;
        try {
            r.bounds = measure_cross_bounds(*r.cross, m, theta);
            ok = r.bounds.contractive();
        } catch (const Error& e) {
            if (!escape(e.kind())) throw;
        }
        if (ok) break;
        if (++r.halvings > opt.max_halvings)
            raise(ErrorKind::NotContractive, "cross-map violates the contraction conditions for every theta tried");
        theta *= 0.5;
    }
    r.theta = theta;
    r.curve = graph_transform_fixed_point(*r.cross, theta, w_star, opt.transform);
    r.points.reserve(r.curve.z.size());
    for (std::size_t k = 0; k < r.curve.z.size(); ++k)
        r.points.push_back(r.curve.z[k] == 0.0 ? Vec2{0.0, 0.0} : r.chart.from_wz({r.curve.w[k], r.curve.z[k]}));
    return r;
}

ManifoldResult build_stable_curve(std::shared_ptr<const LocalMap> local_reversed,
                                  std::shared_ptr<const GlobalMap> global, const PoincareOptions& popt,
                                  const ManifoldOptions& opt) {
    auto swapped = std::make_shared<SwappedInverseGlobalMap>(global);
    auto T = std::make_shared<PoincareMap>(std::move(local_reversed), swapped, popt);
    ManifoldResult r = build_unstable_curve(T, opt);
    r.stable = true;
    for (auto& p : r.points) p = (p[0] == 0.0 && p[1] == 0.0) ? Vec2{0.0, 0.0} : global->forward({p[1], p[0]});
    return r;
}

ManifoldVerification verify_manifold(const ManifoldResult& r, int n_iter) {
    ManifoldVerification v;
    v.theta_final = r.theta;
    v.alpha_chart = r.chart.alpha;
    const ManifoldCurve& c = r.curve;
    const MonotoneCubic H(c.z, c.w);

    // (i) forward images of curve points taken between the samples
    const std::size_t stride = std::max<std::size_t>(1, c.z.size() / 32);
    for (std::size_t k = 0; k + 1 < c.z.size(); k += stride) {
        const double zq = 0.5 * (c.z[k] + c.z[k + 1]);
        if (zq == 0.0) continue;
        Vec2 img;
        try {
            img = r.cross->apply({H(zq), zq});
        } catch (const Error& e) {
            if (!escape(e.kind())) throw;
            continue;
        }
        if (!(std::fabs(img[1]) <= c.theta)) continue;
        v.invariance_residual = std::max(v.invariance_residual, std::fabs(img[0] - H(img[1])));
        ++v.invariance_samples;
    }

    // (ii) backward orbit of the outermost curve point, followed along the
    // graph: z_{k+1} = G(h(z_{k+1}), z_k). Plain T⁻¹ iteration would amplify
    // the transversal round-off by 1/‖F_w‖ per step.
    double zk = c.z.back();
    Vec2 p = r.chart.from_wz({c.w.back(), zk});
    v.backward_norms.push_back(std::hypot(p[0], p[1]));
    for (int i = 0; i < n_iter && zk != 0.0; ++i) {
        try {
            double w = H(zk);
            double zp = 0.0;
            for (int it = 0; it < 100; ++it) {
                zp = r.cross->G(w, zk);
                const double next = H(zp);
                const bool done = std::fabs(next - w) <= 1e-15 * std::max(1.0, std::fabs(w));
                w = next;
                if (done) break;
            }
            if (zp == 0.0) break;
            p = r.chart.from_wz({w, zp});
            zk = zp;
        } catch (const Error& e) {
            if (!escape(e.kind())) throw;
            break;
        }
        const double nrm = std::hypot(p[0], p[1]);
        if (!(nrm < v.backward_norms.back())) v.backward_monotone = false;
        v.backward_norms.push_back(nrm);
        if (nrm < 1e-150) break;
    }

    // (iii) a transversal seed graph converges to the fixed curve
    const double lo = 1.0 / r.chart.m, hi = r.chart.m;
    std::vector<double> seed(c.z.size());
    for (std::size_t k = 0; k < c.z.size(); ++k) {
        const double s = c.z[k] / c.theta;
        seed[k] = c.w_star + 0.5 * (s >= 0.0 ? (hi - c.w_star) : (c.w_star - lo)) * s;
    }
    auto dist = [&](const std::vector<double>& h) {
        double s = 0.0;
        for (std::size_t k = 0; k < h.size(); ++k) s = std::max(s, std::fabs(h[k] - c.w[k]));
        return s;
    };
    v.seed_distances.push_back(dist(seed));
    for (int i = 0; i < n_iter && v.seed_distances.back() > 1e-13; ++i) {
        seed = graph_transform_step(*r.cross, c.z, seed, c.w_star);
        v.seed_distances.push_back(dist(seed));
        const std::size_t m = v.seed_distances.size();
        v.seed_ratios.push_back(v.seed_distances[m - 1] / v.seed_distances[m - 2]);
    }

    v.tangency_slope = H(c.theta / 100.0);
    v.tangency_error = std::fabs(v.tangency_slope - c.w_star);
    return v;
}

nlohmann::json to_json(const ManifoldVerification& v) {
    return {{"residuals", {{"invariance", v.invariance_residual}, {"invariance_samples", v.invariance_samples}}},
            {"ratios", v.seed_ratios},
            {"seed_distances", v.seed_distances},
            {"backward_norms", v.backward_norms},
            {"backward_monotone", v.backward_monotone},
            {"tangency_slope", v.tangency_slope},
            {"tangency_error", v.tangency_error},
            {"theta_final", v.theta_final},
            {"alpha_chart", v.alpha_chart}};
}

void write_curve_csv(const std::string& path, const ManifoldResult& r) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::ConfigError, "cannot open " + path);
    out << "z,w,u1,v1\n";
    for (std::size_t k = 0; k < r.curve.z.size(); ++k)
        out << format_double(r.curve.z[k]) << ',' << format_double(r.curve.w[k]) << ','
            << format_double(r.points[k][0]) << ',' << format_double(r.points[k][1]) << '\n';
}

}  // namespace homlab
