#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <ostream>

#include <boost/multiprecision/mpfr.hpp>

#include "homlab/error.hpp"
#include "homlab/io.hpp"
#include "homlab/local_map.hpp"
#include "homlab/manifold.hpp"
#include "homlab/multipulse.hpp"
#include "homlab/poincare.hpp"

namespace homlab {

namespace {

namespace bmp = boost::multiprecision;

constexpr int kDigits = 600;
using Real = bmp::number<bmp::mpfr_float_backend<kDigits>, bmp::et_off>;

struct P2 {
    Real x, y;
};

P2 operator+(const P2& a, const P2& b) { return {a.x + b.x, a.y + b.y}; }
P2 operator-(const P2& a, const P2& b) { return {a.x - b.x, a.y - b.y}; }
P2 operator*(const Real& s, const P2& a) { return {s * a.x, s * a.y}; }
Real norm(const P2& a) { return bmp::hypot(a.x, a.y); }
Real cross(const P2& a, const P2& b) { return a.x * b.y - a.y * b.x; }
Real dot(const P2& a, const P2& b) { return a.x * b.x + a.y * b.y; }
Vec2 to_vec(const P2& a) { return {a.x.convert_to<double>(), a.y.convert_to<double>()}; }

Real pow10(int e) { return bmp::pow(Real(10), e); }

double log10_abs(const Real& x) {
    if (x == 0) return -static_cast<double>(kDigits);
    return bmp::log10(bmp::abs(x)).convert_to<double>();
}

std::string text(const Real& x) { return x.str(kDigits, std::ios_base::scientific); }

// Normal-form local passage Πs → Πu with λ1 = γ, λ2 = 1, the affine global
// map, and their inverses, all in working precision.
class SyntheticMaps {
public:
    explicit SyntheticMaps(const SyntheticMultipulseConfig& c)
        : g_(c.gamma), d2_(Real(c.delta) * Real(c.delta)), eps_u_(c.eps_u), a_(c.A[0][0]), b_(c.A[0][1]),
          c_(c.A[1][0]), d_(c.A[1][1]) {
        det_ = a_ * d_ - b_ * c_;
        if (det_ == 0) raise(ErrorKind::InvalidArgument, "global map must be invertible");
    }

    P2 local(const P2& p) const {
        const Real r = factor(p.x * p.y);
        const Real P = bmp::pow(r, g_);
        P2 q{p.x * P, p.y / P};
        if (!(norm(q) < eps_u_)) raise(ErrorKind::DomainExit, "local passage lands outside the eps_u ball");
        return q;
    }
    P2 global(const P2& q) const { return {a_ * q.x + b_ * q.y, c_ * q.x + d_ * q.y}; }
    P2 global_inverse(const P2& x) const { return {(d_ * x.x - b_ * x.y) / det_, (a_ * x.y - c_ * x.x) / det_}; }
    P2 T(const P2& p) const { return global(local(p)); }
    P2 T_inverse(const P2& x) const {
        const P2 q = global_inverse(x);
        if (!(norm(q) < eps_u_)) raise(ErrorKind::DomainExit, "global preimage lies outside the eps_u ball");
        const Real P = bmp::pow(factor(q.x * q.y), g_);
        return {q.x / P, q.y * P};
    }

    // W^u_loc(O) ∩ Πu is {u1 = 0}; its global image seeds the unstable family.
    P2 seed_u(const Real& ls) const { return global({Real(0), bmp::exp(ls)}); }
    // W^s_loc(O) ∩ Πs is {v1 = 0}.
    P2 seed_s(const Real& ls) const { return {bmp::exp(ls), Real(0)}; }

    // Zero exactly on the traces of W^s_loc(O) (on Πs) and W^u_loc(O) (on Πu).
    Real stable_offset(const P2& x) const { return x.y / x.x; }
    Real unstable_offset(const P2& x) const {
        const P2 q = global_inverse(x);
        return q.x / q.y;
    }

private:
    Real factor(const Real& prod) const {
        if (!(prod > 0)) raise(ErrorKind::DomainExit, "start has no passage to the loop's unstable section");
        const Real r = g_ * prod / d2_;
        if (!(r < 1)) raise(ErrorKind::DomainExit, "start has no passage to an exit section");
        return r;
    }

    Real g_, d2_, eps_u_, a_, b_, c_, d_, det_;
};

struct Transfer {
    P2 qu, qs;
    Real cs, sn;

    P2 forward(const P2& x) const {
        const P2 d = x - qu;
        return qs + P2{cs * d.x - sn * d.y, sn * d.x + cs * d.y};
    }
    P2 backward(const P2& y) const {
        const P2 d = y - qs;
        return qu + P2{cs * d.x + sn * d.y, -sn * d.x + cs * d.y};
    }
};

// A curve family k ↦ (ls ↦ point): L^u_k = T^k(seed_u) or L^s_k = T^{-k}(seed_s).
using Family = std::function<P2(int, const Real&)>;

const Real& fd_step() {
    static const Real h = pow10(-280);
    return h;
}

P2 tangent(const Family& f, int k, const Real& ls) {
    const Real h = fd_step() * (1 + bmp::abs(ls));
    return (1 / h) * (f(k, ls + h) - f(k, ls));
}

bool inside(const Family& f, int k, const Real& ls, const Real& radius) {
    try {
        return norm(f(k, ls)) < radius;
    } catch (const Error&) {
        return false;
    }
}

// Seed parameter where the family member reaches the given distance from M^s.
Real radius_match(const Family& f, int k, const Real& radius) {
    Real lo = -200000, hi = bmp::log(radius) + 5;
    if (!inside(f, k, lo, radius) || inside(f, k, hi, radius))
        raise(ErrorKind::PartialResult, "curve family does not cross the requested radius");
    for (int it = 0; it < 60; ++it) {
        const Real m = (lo + hi) / 2;
        (inside(f, k, m, radius) ? lo : hi) = m;
    }
    Real x = (lo + hi) / 2;
    const Real target = bmp::log(radius), stop = pow10(-(kDigits - 30));
    for (int it = 0; it < 80; ++it) {
        const Real h = fd_step() * (1 + bmp::abs(x));
        const Real f0 = bmp::log(norm(f(k, x))) - target;
        const Real f1 = bmp::log(norm(f(k, x + h))) - target;
        const Real step = f0 * h / (f1 - f0);
        x -= step;
        if (bmp::abs(step) <= stop * (1 + bmp::abs(x))) break;
    }
    return x;
}

struct Window {
    Real lo, hi;  // seed parameters at |q| − ρ and |q| + ρ
    Real centre;  // seed parameter at |q|
};

Window ball_window(const Family& f, int k, const P2& q, const Real& rho) {
    const Real r = norm(q);
    return {radius_match(f, k, r - rho), radius_match(f, k, r + rho), radius_match(f, k, r)};
}

PlanarCurve sample_curve(const Family& f, int k, const Window& w, int n, const P2& centre, const Real& rho,
                         const std::string& tag, const Transfer* push = nullptr) {
    PlanarCurve c;
    c.tag = tag;
    for (int s = 0; s < n; ++s) {
        const Real ls = w.lo + (w.hi - w.lo) * s / (n - 1);
        const P2 x = f(k, ls);
        if (!(norm(x - centre) < rho)) continue;
        c.samples.push_back(to_vec(push ? push->forward(x) : x));
        c.params.push_back(ls.convert_to<double>());
    }
    return c;
}

struct Solution {
    Real x, y;  // seed parameters on the unstable and stable family
    P2 p;
    Real residual;
    bool ok = false;
};

// T_S(U_i(x)) = S_j(y) by Newton in (x, y).
Solution solve_pair(const Family& U, const Family& S, const Transfer& ts, int i, int j, Real x, Real y) {
    Solution s;
    const Real stop = pow10(-(kDigits - 30));
    auto F = [&](const Real& a, const Real& b) { return ts.forward(U(i, a)) - S(j, b); };
    P2 f;
    try {
        f = F(x, y);
    } catch (const Error&) {
        return s;
    }
    for (int it = 0; it < 80; ++it) {
        const Real hx = fd_step() * (1 + bmp::abs(x)), hy = fd_step() * (1 + bmp::abs(y));
        const P2 jx = (1 / hx) * (F(x + hx, y) - f);
        const P2 jy = (1 / hy) * (F(x, y + hy) - f);
        const Real det = jx.x * jy.y - jy.x * jx.y;
        if (det == 0) return s;
        const Real dx = -(jy.y * f.x - jy.x * f.y) / det;
        const Real dy = -(-jx.y * f.x + jx.x * f.y) / det;
        Real lambda = 1;
        bool moved = false;
        for (int back = 0; back < 40 && !moved; ++back, lambda /= 2) {
            try {
                const P2 fn = F(x + lambda * dx, y + lambda * dy);
                if (norm(fn) < norm(f) || norm(fn) == 0 || back == 39) {
                    x += lambda * dx;
                    y += lambda * dy;
                    f = fn;
                    moved = true;
                }
            } catch (const Error&) {
            }
        }
        if (!moved) return s;
        if (bmp::abs(lambda * 2 * dx) <= stop * (1 + bmp::abs(x)) && bmp::abs(lambda * 2 * dy) <= stop * (1 + bmp::abs(y)))
            break;
    }
    s.x = x;
    s.y = y;
    s.p = S(j, y);
    s.residual = norm(f);
    s.ok = true;
    return s;
}

// Distance from x to the curve ls ↦ f(k, ls), by Newton on the foot condition.
Real distance_to(const Family& f, int k, const P2& x, Real t) {
    const Real stop = pow10(-(kDigits - 30));
    for (int it = 0; it < 60; ++it) {
        const P2 c = f(k, t);
        const P2 e = tangent(f, k, t);
        const Real step = dot(c - x, e) / dot(e, e);
        t -= step;
        if (bmp::abs(step) <= stop * (1 + bmp::abs(t))) break;
    }
    return norm(f(k, t) - x);
}

// Initial foot parameter on curve k: log-radius interpolation between the window ends.
Real foot_guess(const Family& f, int k, const Window& w, const P2& x) {
    const Real r0 = bmp::log(norm(f(k, w.lo))), r1 = bmp::log(norm(f(k, w.hi)));
    const Real r = bmp::log(norm(x));
    return w.lo + (w.hi - w.lo) * (r - r0) / (r1 - r0);
}

Real hausdorff(const Family& f, int k, const Window& wk, int ref, const Window& wref, const P2& centre,
               const Real& rho, int n) {
    Real worst = 0;
    for (int s = 0; s < n; ++s) {
        const Real a = wk.lo + (wk.hi - wk.lo) * s / (n - 1);
        const P2 x = f(k, a);
        if (norm(x - centre) < rho) worst = std::max<Real>(worst, distance_to(f, ref, x, foot_guess(f, ref, wref, x)));
        const Real b = wref.lo + (wref.hi - wref.lo) * s / (n - 1);
        const P2 y = f(ref, b);
        if (norm(y - centre) < rho) worst = std::max<Real>(worst, distance_to(f, k, y, foot_guess(f, k, wk, y)));
    }
    return worst;
}

struct Setting {
    SyntheticMaps maps;
    Family U, S;
    Transfer ts;
    Real tol;

    Setting(const SyntheticMultipulseConfig& cfg) : maps(cfg) {
        U = [this](int k, const Real& ls) {
            P2 p = maps.seed_u(ls);
            for (int m = 0; m < k; ++m) p = maps.T(p);
            return p;
        };
        S = [this](int k, const Real& ls) {
            P2 p = maps.seed_s(ls);
            for (int m = 0; m < k; ++m) p = maps.T_inverse(p);
            return p;
        };
    }
};

// Returns the first step at which the trace offset's level set passes within
// tol of the start point, following `step` from each of three nearby starts.
int landing_step(const std::function<P2(const P2&)>& prepare, const std::function<P2(const P2&)>& step,
                 const std::function<Real(const P2&)>& offset, const P2& p, const Real& tol, int max_steps,
                 std::string& escape, const char* label) {
    const Real h = pow10(-450) * norm(p);
    P2 x[3];
    try {
        x[0] = prepare(p);
        x[1] = prepare(p + P2{h, Real(0)});
        x[2] = prepare(p + P2{Real(0), h});
    } catch (const Error& e) {
        escape = std::string(label) + " transfer: " + e.what();
        return -1;
    }
    for (int k = 0; k <= max_steps; ++k) {
        const Real f0 = offset(x[0]);
        const P2 grad{(offset(x[1]) - f0) / h, (offset(x[2]) - f0) / h};
        const Real g = norm(grad);
        if (g > 0 && bmp::abs(f0) / g <= tol) return k;
        if (k == max_steps) break;
        try {
            for (auto& xi : x) xi = step(xi);
        } catch (const Error& e) {
            escape = std::string(label) + " step " + std::to_string(k + 1) + ": " + e.what();
            return -1;
        }
    }
    if (escape.empty()) escape = std::string(label) + ": no landing within " + std::to_string(max_steps) + " steps";
    return -1;
}

PulseCount count_in(const Setting& st, const P2& p, int max_steps) {
    PulseCount c;
    const auto id = [](const P2& x) { return x; };
    c.n_forward = landing_step(
        id, [&](const P2& x) { return st.maps.T(x); }, [&](const P2& x) { return st.maps.stable_offset(x); }, p,
        st.tol, max_steps, c.escape, "forward");
    std::string back;
    c.n_backward = landing_step(
        [&](const P2& x) { return st.ts.backward(x); }, [&](const P2& x) { return st.maps.T_inverse(x); },
        [&](const P2& x) { return st.maps.unstable_offset(x); }, p, st.tol, max_steps, back, "backward");
    if (!back.empty()) c.escape += (c.escape.empty() ? "" : "; ") + back;
    return c;
}

Setting restore(const SyntheticMultipulseConfig& cfg, const MultipulseResult& r) {
    Setting st(cfg);
    st.ts.qu = {Real(r.q_u_text[0]), Real(r.q_u_text[1])};
    st.ts.qs = {Real(r.q_s_text[0]), Real(r.q_s_text[1])};
    const Real angle(r.rotation_text);
    st.ts.cs = bmp::cos(angle);
    st.ts.sn = bmp::sin(angle);
    st.tol = pow10(static_cast<int>(std::lround(r.tol_log10 - std::log10(cfg.radius_s)))) * Real(cfg.radius_s);
    return st;
}

void validate(const SyntheticMultipulseConfig& c) {
    if (!(c.gamma > 0.0 && c.gamma < 0.5)) raise(ErrorKind::InvalidArgument, "multipulse setting needs 0 < gamma < 1/2");
    if (!(c.delta > 0.0 && c.eps > 0.0 && c.eps_u > 0.0)) raise(ErrorKind::InvalidArgument, "section sizes must be positive");
    if (!(c.A[0][1] * c.A[1][1] > 0.0)) raise(ErrorKind::InvalidArgument, "multipulse setting needs bd > 0");
    if (!(c.A[1][0] * c.A[1][1] < 0.0)) raise(ErrorKind::InvalidArgument, "multipulse setting needs cd < 0");
    if (!(c.ball_fraction > 0.0 && c.ball_fraction < 1.0)) raise(ErrorKind::InvalidArgument, "ball_fraction must be in (0, 1)");
    if (!(c.radius_u * (1.0 + c.ball_fraction) < c.eps && c.radius_s * (1.0 + c.ball_fraction) < c.eps))
        raise(ErrorKind::InvalidArgument, "balls must lie inside the eps ball");
    if (c.i_max < 0 || c.j_max < 0 || c.window_samples < 3 || c.hausdorff_samples < 2 || c.reference_extra < 1)
        raise(ErrorKind::InvalidArgument, "invalid multipulse counts");
}

}  // namespace

bool MultipulseResult::all_verified() const {
    return !points.empty() && std::all_of(points.begin(), points.end(), [](const PulsePoint& p) { return p.verified; });
}

bool MultipulseResult::all_distinct() const {
    return points.size() < 2 || min_separation_log10 >= tol_log10 + 1.0;
}

bool MultipulseResult::hausdorff_decreasing() const {
    auto dec = [](const std::vector<double>& h) {
        for (std::size_t k = 1; k < h.size(); ++k)
            if (!(h[k] < h[k - 1])) return false;
        return h.size() >= 2;
    };
    return dec(hausdorff_u_log10) && dec(hausdorff_s_log10);
}

bool MultipulseResult::pulses_increasing() const {
    for (const auto& a : points)
        for (const auto& b : points)
            if (a.i + a.j < b.i + b.j && !(a.pulses < b.pulses)) return false;
    return true;
}

MultipulseResult find_multipulse(const SyntheticMultipulseConfig& cfg) {
    validate(cfg);
    Setting st(cfg);
    MultipulseResult r;
    r.working_digits = kDigits;
    const int K = std::max(cfg.i_max, cfg.j_max) + cfg.reference_extra;

    // Fixed curves W^u_loc(Γ) ∩ Πs and W^s_loc(Γ) ∩ Πs, represented by L^u_K and L^s_K.
    const Real xu = radius_match(st.U, K, Real(cfg.radius_u));
    const Real ys = radius_match(st.S, K, Real(cfg.radius_s));
    st.ts.qu = st.U(K, xu);
    st.ts.qs = st.S(K, ys);
    P2 tu = tangent(st.U, K, xu), tsv = tangent(st.S, K, ys);
    tu = (1 / norm(tu)) * tu;
    tsv = (1 / norm(tsv)) * tsv;
    const Real angle = cfg.align_tangents ? Real(bmp::atan2(tsv.y, tsv.x) - bmp::atan2(tu.y, tu.x))
                                          : Real(cfg.rotation_degrees) * bmp::acos(Real(-1)) / 180;
    st.ts.cs = bmp::cos(angle);
    st.ts.sn = bmp::sin(angle);
    const P2 rtu{st.ts.cs * tu.x - st.ts.sn * tu.y, st.ts.sn * tu.x + st.ts.cs * tu.y};
    r.transversality_margin = bmp::abs(cross(rtu, tsv)).convert_to<double>();
    st.tol = pow10(-(kDigits - 40)) * Real(cfg.radius_s);
    r.tol_log10 = log10_abs(st.tol);
    r.q_u = to_vec(st.ts.qu);
    r.q_s = to_vec(st.ts.qs);
    r.q_u_text[0] = text(st.ts.qu.x);
    r.q_u_text[1] = text(st.ts.qu.y);
    r.q_s_text[0] = text(st.ts.qs.x);
    r.q_s_text[1] = text(st.ts.qs.y);
    r.rotation_text = text(angle);
    const Real rho_u = Real(cfg.ball_fraction) * norm(st.ts.qu), rho_s = Real(cfg.ball_fraction) * norm(st.ts.qs);
    r.ball_u = rho_u.convert_to<double>();
    r.ball_s = rho_s.convert_to<double>();

    // Double-precision library maps agree with the working-precision ones.
    {
        auto local = std::make_shared<LinearLocalMap>(cfg.gamma, 1.0, cfg.delta);
        auto global = std::make_shared<AffineGlobalMap>(cfg.A);
        auto T = std::make_shared<PoincareMap>(local, global, PoincareOptions{cfg.eps, cfg.eps_u});
        for (int k = 0; k <= 4; ++k) {
            const P2 x = st.U(K, radius_match(st.U, K, Real(cfg.radius_u) * (k + 1) / 5));
            const Vec2 hp = to_vec(st.maps.T(x)), dp = T->apply(to_vec(x));
            r.map_agreement = std::max(r.map_agreement, std::hypot(hp[0] - dp[0], hp[1] - dp[1]) / std::hypot(hp[0], hp[1]));
        }
        // Overlap with the graph-transform construction near M^s.
        ManifoldOptions mo;
        mo.gamma = cfg.gamma;
        const ManifoldResult man = build_unstable_curve(T, mo);
        for (double frac : {0.2, 0.5, 0.8}) {
            const Real rad = Real(man.chart.eps2 * frac);
            const Vec2 x = to_vec(st.U(K, radius_match(st.U, K, rad)));
            const Vec2 wz = man.chart.to_wz(x);
            r.graph_transform_agreement =
                std::max(r.graph_transform_agreement, std::fabs(wz[0] - man.curve.eval(wz[1])) * std::fabs(x[0]));
        }
    }

    std::vector<Window> wu, ws;
    for (int i = 0; i <= cfg.i_max; ++i) {
        try {
            wu.push_back(ball_window(st.U, i, st.ts.qu, rho_u));
        } catch (const Error&) {
            break;
        }
        r.curves.push_back(sample_curve(st.U, i, wu.back(), cfg.window_samples, st.ts.qu, rho_u, "lu" + std::to_string(i)));
        r.curves.push_back(sample_curve(st.U, i, wu.back(), cfg.window_samples, st.ts.qu, rho_u, "mu" + std::to_string(i), &st.ts));
    }
    for (int j = 0; j <= cfg.j_max; ++j) {
        try {
            ws.push_back(ball_window(st.S, j, st.ts.qs, rho_s));
        } catch (const Error&) {
            break;
        }
        r.curves.push_back(sample_curve(st.S, j, ws.back(), cfg.window_samples, st.ts.qs, rho_s, "ls" + std::to_string(j)));
    }
    r.achieved_i = static_cast<int>(wu.size()) - 1;
    r.achieved_j = static_cast<int>(ws.size()) - 1;
    r.partial = r.achieved_i < cfg.i_max || r.achieved_j < cfg.j_max;

    const Window wuK = ball_window(st.U, K, st.ts.qu, rho_u), wsK = ball_window(st.S, K, st.ts.qs, rho_s);
    for (std::size_t i = 0; i < wu.size(); ++i)
        r.hausdorff_u_log10.push_back(
            log10_abs(hausdorff(st.U, static_cast<int>(i), wu[i], K, wuK, st.ts.qu, rho_u, cfg.hausdorff_samples)));
    for (std::size_t j = 0; j < ws.size(); ++j)
        r.hausdorff_s_log10.push_back(
            log10_abs(hausdorff(st.S, static_cast<int>(j), ws[j], K, wsK, st.ts.qs, rho_s, cfg.hausdorff_samples)));

    if (r.transversality_margin < 1e-3) {
        r.tangential = static_cast<int>(wu.size() * ws.size());
        return r;
    }

    // Role swap: the same points seen from B^u, i.e. T_S⁻¹(l^s_j) ∩ l^u_i.
    const Transfer swapped{st.ts.qs, st.ts.qu, st.ts.cs, -st.ts.sn};
    Real swap_defect = 0;
    std::vector<P2> hp_points;
    for (std::size_t i = 0; i < wu.size(); ++i) {
        for (std::size_t j = 0; j < ws.size(); ++j) {
            const int ii = static_cast<int>(i), jj = static_cast<int>(j);
            const Solution s = solve_pair(st.U, st.S, st.ts, ii, jj, wu[i].centre, ws[j].centre);
            if (!s.ok || !(norm(s.p - st.ts.qs) < rho_s) || !(norm(st.ts.backward(s.p) - st.ts.qu) < rho_u)) {
                r.partial = true;
                continue;
            }
            const Solution w = solve_pair(st.S, st.U, swapped, jj, ii, ws[j].centre, wu[i].centre);
            swap_defect = w.ok ? std::max<Real>(swap_defect, norm(st.ts.forward(w.p) - s.p)) : Real(1);

            PulsePoint pp;
            pp.i = ii;
            pp.j = jj;
            pp.p = to_vec(s.p);
            pp.u1_text = text(s.p.x);
            pp.v1_text = text(s.p.y);
            P2 eu = tangent(st.U, ii, s.x), es = tangent(st.S, jj, s.y);
            eu = st.ts.forward(st.ts.qu + eu) - st.ts.qs;
            pp.angle = bmp::asin(std::min<Real>(Real(1), bmp::abs(cross(eu, es)) / (norm(eu) * norm(es)))).convert_to<double>();
            pp.residual_log10 = log10_abs(s.residual);
            const PulseCount c = count_in(st, s.p, ii + jj + 4);
            pp.n_forward = c.n_forward;
            pp.n_backward = c.n_backward;
            pp.escape = c.escape;
            pp.pulses = c.n_forward + c.n_backward + r.pulse_offset;
            pp.verified = c.n_forward == jj && c.n_backward == ii;
            r.points.push_back(pp);
            hp_points.push_back(s.p);
        }
    }
    r.role_swap_defect_log10 = log10_abs(swap_defect);
    r.min_separation_log10 = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < hp_points.size(); ++a) {
        Real best = -1;
        for (std::size_t b = 0; b < hp_points.size(); ++b) {
            if (a == b) continue;
            const Real d = norm(hp_points[a] - hp_points[b]);
            if (best < 0 || d < best) best = d;
        }
        r.points[a].separation_log10 = best < 0 ? 0.0 : log10_abs(best);
        r.min_separation_log10 = std::min(r.min_separation_log10, r.points[a].separation_log10);
    }
    if (hp_points.size() < 2) r.min_separation_log10 = 0.0;
    return r;
}

PulseCount count_pulses(const SyntheticMultipulseConfig& cfg, const MultipulseResult& r, const std::string& u1,
                        const std::string& v1, int max_steps) {
    const Setting st = restore(cfg, r);
    return count_in(st, {Real(u1), Real(v1)}, max_steps);
}

bool verify_multipulse_point(const SyntheticMultipulseConfig& cfg, const MultipulseResult& r, const PulsePoint& p,
                             double offset_tols) {
    const Setting st = restore(cfg, r);
    P2 x{Real(p.u1_text), Real(p.v1_text)};
    if (offset_tols != 0.0) {
        const Real shift = Real(offset_tols) * st.tol / bmp::sqrt(Real(2));
        x = x + P2{shift, shift};
    }
    const PulseCount c = count_in(st, x, p.i + p.j + 4);
    return c.n_forward == p.j && c.n_backward == p.i;
}

nlohmann::json to_json(const MultipulseResult& r) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : r.points)
        pts.push_back({{"i", p.i},
                       {"j", p.j},
                       {"u1", p.p[0]},
                       {"v1", p.p[1]},
                       {"n_forward", p.n_forward},
                       {"n_backward", p.n_backward},
                       {"pulses", p.pulses},
                       {"angle", p.angle},
                       {"verified", p.verified},
                       {"residual_log10", p.residual_log10},
                       {"separation_log10", p.separation_log10},
                       {"u1_full", p.u1_text},
                       {"v1_full", p.v1_text},
                       {"escape", p.escape}});
    return {{"points", pts},
            {"working_digits", r.working_digits},
            {"pulse_offset", r.pulse_offset},
            {"tol_log10", r.tol_log10},
            {"q_u", {r.q_u[0], r.q_u[1]}},
            {"q_s", {r.q_s[0], r.q_s[1]}},
            {"ball_u", r.ball_u},
            {"ball_s", r.ball_s},
            {"transversality_margin", r.transversality_margin},
            {"map_agreement", r.map_agreement},
            {"graph_transform_agreement", r.graph_transform_agreement},
            {"role_swap_defect_log10", r.role_swap_defect_log10},
            {"hausdorff_u_log10", r.hausdorff_u_log10},
            {"hausdorff_s_log10", r.hausdorff_s_log10},
            {"achieved", {r.achieved_i, r.achieved_j}},
            {"partial", r.partial},
            {"tangential", r.tangential},
            {"min_separation_log10", r.min_separation_log10},
            {"all_verified", r.all_verified()},
            {"all_distinct", r.all_distinct()},
            {"hausdorff_decreasing", r.hausdorff_decreasing()},
            {"pulses_increasing", r.pulses_increasing()}};
}

void write_curves_csv(std::ostream& os, const MultipulseResult& r) {
    os << "curve,index,param,u1,v1\n";
    for (const auto& c : r.curves)
        for (std::size_t k = 0; k < c.samples.size(); ++k)
            os << c.tag << ',' << k << ',' << format_double(k < c.params.size() ? c.params[k] : 0.0) << ','
               << format_double(c.samples[k][0]) << ',' << format_double(c.samples[k][1]) << '\n';
}

}  // namespace homlab
