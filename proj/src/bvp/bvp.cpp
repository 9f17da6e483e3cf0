#include "homlab/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "homlab/chebyshev.hpp"
#include "homlab/error.hpp"

namespace homlab {

namespace {

using Scaled = std::array<std::vector<double>, 4>;
// Writes (F1, F2, G1, G2) at every node for the unscaled iterate.
using Forcing = std::function<void(const std::vector<State4>&, std::vector<State4>&)>;

struct Operator {
    const ChebyshevGrid& grid;
    double tau;
    double lam[4];
    std::array<double, 4> bnd;  // U10, U20, V1τ, V2τ
    std::vector<double> t;
    std::array<std::vector<double>, 4> grow;    // e^{λ_i t}, e^{λ_i (τ−t)}
    std::array<std::vector<double>, 4> shrink;  // reciprocals

    Operator(const ChebyshevGrid& g, double tau_, double l1, double l2, const std::array<double, 4>& b)
        : grid(g), tau(tau_), lam{l1, l2, l1, l2}, bnd(b) {
        const std::size_t n = grid.size();
        t.resize(n);
        for (std::size_t k = 0; k < n; ++k) t[k] = tau * grid.nodes()[k];
        t.back() = tau;
        for (std::size_t c = 0; c < 4; ++c) {
            grow[c].resize(n);
            shrink[c].resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                const double e = (c < 2) ? lam[c] * t[k] : lam[c] * (tau - t[k]);
                grow[c][k] = std::exp(e);
                shrink[c][k] = std::exp(-e);
            }
        }
    }

    void unscale(const Scaled& s, std::vector<State4>& x) const {
        const std::size_t n = t.size();
        x.resize(n);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t c = 0; c < 4; ++c) x[k][c] = shrink[c][k] * s[c][k];
    }

    void apply(const Scaled& in, Scaled& out, const Forcing& forcing, std::vector<State4>& x,
               std::vector<State4>& nl, std::vector<double>& g) const {
        const std::size_t n = t.size();
        unscale(in, x);
        nl.resize(n);
        forcing(x, nl);
        g.resize(n);
        for (std::size_t c = 0; c < 4; ++c) {
            out[c].resize(n);
            for (std::size_t k = 0; k < n; ++k) g[k] = grow[c][k] * nl[k][c];
            if (c < 2) {
                grid.cumulative(g.data(), tau, out[c].data());
                for (std::size_t k = 0; k < n; ++k) out[c][k] += bnd[c];
            } else {
                grid.reverse_cumulative(g.data(), tau, out[c].data());
                for (std::size_t k = 0; k < n; ++k) out[c][k] = bnd[c] - out[c][k];
            }
        }
    }
};

double sup_diff(const Scaled& a, const Scaled& b) {
    double m = 0.0;
    for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t k = 0; k < a[c].size(); ++k) m = std::max(m, std::fabs(a[c][k] - b[c][k]));
    return m;
}

double sup_abs(const Scaled& a) {
    double m = 0.0;
    for (const auto& v : a)
        for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

bool finite(const Scaled& a) {
    for (const auto& v : a)
        for (double x : v)
            if (!std::isfinite(x)) return false;
    return true;
}

BvpSolution iterate(const BvpBoundary& boundary, double l1, double l2, const std::array<double, 4>& bnd,
                    const Forcing& forcing, const BvpOptions& opt) {
    if (!(boundary.tau >= 0.0) || !std::isfinite(boundary.tau))
        raise(ErrorKind::InvalidArgument, "BVP flight time must be finite and nonnegative");
    BvpSolution sol;
    sol.boundary = boundary;
    sol.lambda1 = l1;
    sol.lambda2 = l2;
    if (boundary.tau == 0.0) {
        sol.t = {0.0};
        for (std::size_t c = 0; c < 4; ++c) sol.scaled[c] = {bnd[c]};
        return sol;
    }

    const ChebyshevGrid& grid = ChebyshevGrid::shared(opt.nodes);
    const Operator op(grid, boundary.tau, l1, l2, bnd);
    const bool to_roundoff = opt.tol == 0.0;
    const double tol = opt.tol < 0.0 ? 1e-12 * (1.0 + boundary.delta) : opt.tol;
    constexpr double eps = std::numeric_limits<double>::epsilon();

    Scaled cur, next;
    for (auto& v : cur) v.assign(grid.size(), 0.0);
    std::vector<State4> x, nl;
    std::vector<double> g;
    bool done = false;
    for (int n = 1; n <= opt.max_iterations; ++n) {
        op.apply(cur, next, forcing, x, nl, g);
        if (!finite(next)) raise(ErrorKind::QuadratureError, "non-finite iterate in the BVP operator");
        const double change = sup_diff(next, cur);
        std::swap(cur, next);
        sol.changes.push_back(change);
        const double noise = 64.0 * eps * std::max(sup_abs(cur), std::numeric_limits<double>::min());
        if (n >= 2) {
            const double prev = sol.changes[n - 2];
            if (prev > 16.0 * noise && change > noise) {
                const double ratio = change / prev;
                sol.contraction_ratio = std::max(sol.contraction_ratio, ratio);
                if (n >= 3 && ratio >= 1.0)
                    raise(ErrorKind::NoContraction, "BVP operator is not contracting; delta too large");
            }
        }
        if (to_roundoff ? (change <= noise || (n >= 4 && change >= 0.5 * sol.changes[n - 2])) : change <= tol) {
            sol.iterations = n - 1;
            done = true;
            break;
        }
    }
    if (!done) raise(ErrorKind::NoContraction, "BVP successive approximation did not converge");
    sol.t = op.t;
    sol.scaled = std::move(cur);
    return sol;
}

}  // namespace

State4 BvpSolution::node(std::size_t k) const {
    const double tau = boundary.tau;
    State4 x{};
    for (std::size_t c = 0; c < 4; ++c) {
        const double e = (c < 2) ? lambda(c) * t[k] : lambda(c) * (tau - t[k]);
        x[c] = std::exp(-e) * scaled[c][k];
    }
    return x;
}

double BvpSolution::scaled_at(std::size_t c, double time) const {
    if (t.size() == 1) return scaled[c][0];
    const double s = std::clamp(time / boundary.tau, 0.0, 1.0);
    return ChebyshevGrid::shared(t.size()).interpolate(scaled[c].data(), s);
}

State4 BvpSolution::at(double time) const {
    const double tau = boundary.tau;
    State4 x{};
    for (std::size_t c = 0; c < 4; ++c) {
        const double e = (c < 2) ? lambda(c) * time : lambda(c) * (tau - time);
        x[c] = std::exp(-e) * scaled_at(c, time);
    }
    return x;
}

namespace {

// Interpolates scaled[c] − offset so that exact nodal agreement gives exactly 0.
double deviation_at(const BvpSolution& sol, std::size_t c, double offset, double time) {
    if (sol.size() == 1) return sol.scaled[c][0] - offset;
    std::vector<double> d(sol.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = sol.scaled[c][k] - offset;
    const double s = std::clamp(time / sol.boundary.tau, 0.0, 1.0);
    return ChebyshevGrid::shared(sol.size()).interpolate(d.data(), s);
}

}  // namespace

double BvpSolution::xi(int i, double time) const {
    const std::size_t c = (i == 1) ? U1 : U2;
    const double u0 = (i == 1) ? boundary.u10 : boundary.u20;
    return std::exp(-lambda(c) * time) * deviation_at(*this, c, u0, time);
}

double BvpSolution::zeta(int i, double time) const {
    const std::size_t c = (i == 1) ? V1 : V2;
    const double vt = (i == 1) ? boundary.v1tau : boundary.v2tau;
    return std::exp(-lambda(c) * (boundary.tau - time)) * deviation_at(*this, c, vt, time);
}

namespace {

Forcing nonlinear_forcing(const SystemSpec& spec) {
    return [&spec](const std::vector<State4>& x, std::vector<State4>& nl) {
        for (std::size_t k = 0; k < x.size(); ++k) nl[k] = spec.nonlinearity(x[k]);
    };
}

std::array<double, 4> boundary_values(const BvpBoundary& b) { return {b.u10, b.u20, b.v1tau, b.v2tau}; }

}  // namespace

BvpSolution solve_bvp(const SystemSpec& spec, const BvpBoundary& boundary, const BvpOptions& opt) {
    return iterate(boundary, spec.lambda1, spec.lambda2, boundary_values(boundary), nonlinear_forcing(spec), opt);
}

double fixed_point_defect(const SystemSpec& spec, const BvpSolution& sol) {
    if (sol.size() == 1) return 0.0;
    const ChebyshevGrid& grid = ChebyshevGrid::shared(sol.size());
    const Operator op(grid, sol.boundary.tau, sol.lambda1, sol.lambda2, boundary_values(sol.boundary));
    Scaled out;
    std::vector<State4> x, nl;
    std::vector<double> g;
    op.apply(sol.scaled, out, nonlinear_forcing(spec), x, nl, g);
    return sup_diff(out, sol.scaled);
}

BvpSolution solve_bvp_variational(const SystemSpec& spec, const BvpSolution& base, BvpParameter theta,
                                  const BvpOptions& opt) {
    std::array<double, 4> bnd{};
    switch (theta) {
        case BvpParameter::U10: bnd[0] = 1.0; break;
        case BvpParameter::U20: bnd[1] = 1.0; break;
        case BvpParameter::V1Tau: bnd[2] = 1.0; break;
        case BvpParameter::V2Tau: bnd[3] = 1.0; break;
        case BvpParameter::Tau: {
            // v*(τ, τ) = v_τ for every τ, so ∂_τ v*(τ) = −v̇*(τ); u*(0) does not move.
            const State4 f = spec.field(base.node(base.size() - 1));
            bnd[2] = -f[V1];
            bnd[3] = -f[V2];
            break;
        }
    }
    BvpBoundary b = base.boundary;
    b.u10 = bnd[0];
    b.u20 = bnd[1];
    b.v1tau = bnd[2];
    b.v2tau = bnd[3];
    BvpOptions o = opt;
    o.nodes = base.size() > 1 ? base.size() : opt.nodes;
    if (base.size() == 1) {
        BvpSolution s;
        s.boundary = b;
        s.lambda1 = base.lambda1;
        s.lambda2 = base.lambda2;
        s.t = {0.0};
        for (std::size_t c = 0; c < 4; ++c) s.scaled[c] = {bnd[c]};
        return s;
    }
    std::vector<Mat4> jac(base.size());
    for (std::size_t k = 0; k < base.size(); ++k) jac[k] = spec.nonlinear_jacobian(base.node(k));
    const Forcing linear = [&jac](const std::vector<State4>& x, std::vector<State4>& nl) {
        for (std::size_t k = 0; k < x.size(); ++k) nl[k] = mul(jac[k], x[k]);
    };
    return iterate(b, base.lambda1, base.lambda2, bnd, linear, o);
}

LocalPassage solve_local_passage(const SystemSpec& spec, double u10, double u20, double v10, double v20,
                                 double v2tau, const BvpOptions& opt) {
    const double l1 = spec.lambda1, l2 = spec.lambda2;
    const double delta = std::fabs(u20);
    double tau0;
    if (v20 * v2tau > 0.0 && std::fabs(v20) < std::fabs(v2tau))
        tau0 = std::log(v2tau / v20) / l2;
    else
        tau0 = -std::log(spec.gamma() * std::fabs(u10 * v10) / (delta * delta)) / l2;
    if (!std::isfinite(tau0) || tau0 < 0.0)
        raise(ErrorKind::InvalidArgument, "local passage requires a start with positive flight time");
    const double lo = std::max(0.0, tau0 - 2.0 / l2), hi = tau0 + 2.0 / l2;

    BvpOptions o = opt;
    o.tol = 0.0;
    LocalPassage p;
    double tau = tau0, v1tau = std::exp(l1 * tau0) * v10;
    for (int it = 0; it < 40; ++it) {
        BvpBoundary b{tau, u10, u20, v1tau, v2tau, delta};
        BvpSolution sol = solve_bvp(spec, b, o);
        const State4 x0 = sol.node(0);
        const double r1 = x0[V1] - v10, r2 = x0[V2] - v20;
        BvpSolution dt = solve_bvp_variational(spec, sol, BvpParameter::Tau, o);
        BvpSolution dv = solve_bvp_variational(spec, sol, BvpParameter::V1Tau, o);
        const State4 a = dt.node(0), c = dv.node(0);
        const Vec2 step = solve(Mat2{{{a[V1], c[V1]}, {a[V2], c[V2]}}}, Vec2{-r1, -r2});
        const bool small = std::fabs(r1) <= 1e-14 * std::fabs(v10) && std::fabs(r2) <= 1e-14 * std::fabs(v20);
        const bool still = std::fabs(step[0]) <= 1e-14 * (1.0 + tau) &&
                           std::fabs(step[1]) <= 1e-14 * std::max(std::fabs(v1tau), 1e-3 * delta);
        if (small || still || it == 39) {
            if (!small && !still)
                raise(ErrorKind::InversionError, "flight-time Newton did not converge");
            p.tau = tau;
            p.v1tau = v1tau;
            p.u1tau = sol.node(sol.size() - 1)[U1];
            p.newton_iterations = it;
            p.solution = std::move(sol);
            p.d_tau = std::move(dt);
            p.d_v1tau = std::move(dv);
            return p;
        }
        tau = std::clamp(tau + step[0], lo, hi);
        v1tau += step[1];
    }
    raise(ErrorKind::InversionError, "flight-time Newton did not converge");
}

LocalMapJacobian chained_local_map_derivatives(const SystemSpec& spec, const LocalPassage& passage,
                                               const BvpOptions& opt) {
    BvpOptions o = opt;
    o.tol = 0.0;
    const BvpSolution& sol = passage.solution;
    const std::size_t last = sol.size() - 1;
    const BvpSolution du = solve_bvp_variational(spec, sol, BvpParameter::U10, o);
    const State4 x0 = sol.node(0), xt = sol.node(last);
    const State4 gh = spec.grad_h(x0);
    // κ(u10, v10) = v20 on {H = 0} ∩ Πs.
    const double kappa_u = -gh[U1] / gh[V2];
    const double kappa_v = -gh[V1] / gh[V2];

    const State4 t0 = passage.d_tau.node(0), v0 = passage.d_v1tau.node(0), u0 = du.node(0);
    const Mat2 A{{{t0[V1], v0[V1]}, {t0[V2], v0[V2]}}};
    const Vec2 su = solve(A, Vec2{-u0[V1], kappa_u - u0[V2]});
    const Vec2 sv = solve(A, Vec2{1.0, kappa_v});

    const double u1dot = spec.field(xt)[U1];
    const double ut = passage.d_tau.node(last)[U1];
    const double uu = du.node(last)[U1];
    const double uv = passage.d_v1tau.node(last)[U1];

    LocalMapJacobian j;
    j.tau = passage.tau;
    j.eta1 = xt[U1];
    j.eta2 = passage.v1tau;
    j.dtau_du10 = su[0];
    j.deta2_du10 = su[1];
    j.dtau_dv10 = sv[0];
    j.deta2_dv10 = sv[1];
    j.deta1_du10 = (u1dot + ut) * su[0] + uu + uv * su[1];
    j.deta1_dv10 = (u1dot + ut) * sv[0] + uv * sv[1];
    j.deta2_dv1tau_raw = 1.0 / v0[V1];
    return j;
}

}  // namespace homlab
