#include "homlab/estimates.hpp"

#include <chrono>
#include <cmath>

#include "homlab/error.hpp"
#include "homlab/local_map.hpp"
#include "homlab/sections.hpp"

namespace homlab {

std::string to_string(LambdaCase c) {
    switch (c) {
        case LambdaCase::Resonant: return "lambda1=lambda2";
        case LambdaCase::Intermediate: return "lambda1<lambda2<2lambda1";
        case LambdaCase::Strong: return "2lambda1<lambda2";
    }
    return "?";
}

LambdaCase lambda_case(const SystemSpec& spec) {
    if (spec.lambda1 == spec.lambda2) return LambdaCase::Resonant;
    if (spec.lambda2 < 2.0 * spec.lambda1) return LambdaCase::Intermediate;
    if (spec.lambda2 > 2.0 * spec.lambda1) return LambdaCase::Strong;
    raise(ErrorKind::InvalidArgument, "lambda2 = 2 lambda1 belongs to no estimate case");
}

LambdaCase parse_lambda_case(const std::string& s) {
    if (s == "resonant" || s == to_string(LambdaCase::Resonant)) return LambdaCase::Resonant;
    if (s == "intermediate" || s == to_string(LambdaCase::Intermediate)) return LambdaCase::Intermediate;
    if (s == "strong" || s == to_string(LambdaCase::Strong)) return LambdaCase::Strong;
    raise(ErrorKind::ConfigError, "unknown lambda case: " + s);
}

bool EstimateReport::passed() const {
    for (const auto& b : bounds)
        if (!b.passed()) return false;
    return !bounds.empty();
}

namespace {

nlohmann::json num(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const EstimateReport& r) {
    nlohmann::json j;
    j["case"] = r.case_tag;
    j["delta"] = r.delta;
    j["passed"] = r.passed();
    j["bounds"] = nlohmann::json::array();
    for (const auto& b : r.bounds) {
        j["bounds"].push_back({{"name", b.name},
                               {"fitted_M", num(b.fitted_M)},
                               {"margin", num(b.margin)},
                               {"M_halved", num(b.M_halved)},
                               {"exponent_fit", num(b.exponent_fit)},
                               {"exponent_se", num(b.exponent_se)},
                               {"exponent_expected", num(b.exponent_expected)},
                               {"sharp", b.sharp},
                               {"ill_conditioned", b.ill_conditioned}});
    }
    return j;
}

namespace {

// One residual term of the flow lemma: which residual, which boundary slot
// carries the term, and the lemma's shape.
enum class Term { Xi1U, Xi1V, Xi1, Xi2, Zeta1V, Zeta1U, Zeta1, Zeta2 };

struct TermInfo {
    Term term;
    const char* name;
    bool is_xi;
    int index;
    bool need_u10;  // u10 ≠ 0 in the isolating boundary
    bool need_v1;   // v1τ ≠ 0 in the isolating boundary
};

constexpr TermInfo kTerms[] = {
    {Term::Xi1U, "xi1_u10_term", true, 1, true, false},  {Term::Xi1V, "xi1_v1tau_term", true, 1, false, true},
    {Term::Xi1, "xi1", true, 1, true, true},              {Term::Xi2, "xi2", true, 2, true, true},
    {Term::Zeta1V, "zeta1_v1tau_term", false, 1, false, true}, {Term::Zeta1U, "zeta1_u10_term", false, 1, true, false},
    {Term::Zeta1, "zeta1", false, 1, true, true},        {Term::Zeta2, "zeta2", false, 2, true, true},
};

struct Shapes {
    LambdaCase c;
    double l1, l2;

    // Cross term of ξ1 (driven by v1τ) and of ζ1 (driven by u10), with s the
    // distance to the end where the driving boundary value sits.
    double cross_xi(double t, double tau) const {
        if (c == LambdaCase::Strong) return std::exp(-l1 * (tau + t));
        return std::exp(-l1 * (tau - t) - l2 * t);
    }
    double cross_zeta(double t, double tau) const {
        if (c == LambdaCase::Strong) return std::exp(-l1 * (2.0 * tau - t));
        return std::exp(-l2 * (tau - t) - l1 * t);
    }

    double shape(Term term, double t, const BvpBoundary& b) const {
        const double d = b.delta, tau = b.tau;
        if (c == LambdaCase::Resonant) {
            const bool xi = term == Term::Xi1U || term == Term::Xi1V || term == Term::Xi1 || term == Term::Xi2;
            return (xi ? std::exp(-l1 * t) : std::exp(-l1 * (tau - t))) * d * d;
        }
        const double a = std::fabs(b.u10), v = std::fabs(b.v1tau);
        switch (term) {
            case Term::Xi1U: return std::exp(-l1 * t) * d * a;
            case Term::Xi1V: return cross_xi(t, tau) * d * v;
            case Term::Xi1: return std::exp(-l1 * t) * d * a + cross_xi(t, tau) * d * v;
            case Term::Xi2: return std::exp(-l2 * t) * d * d;
            case Term::Zeta1V: return std::exp(-l1 * (tau - t)) * d * v;
            case Term::Zeta1U: return cross_zeta(t, tau) * d * a;
            case Term::Zeta1: return std::exp(-l1 * (tau - t)) * d * v + cross_zeta(t, tau) * d * a;
            case Term::Zeta2: return std::exp(-l2 * (tau - t)) * d * d;
        }
        return 0.0;
    }

    // τ-slope of the term at its evaluation end (t = τ for ξ, t = 0 for ζ).
    double slope(Term term) const {
        if (c == LambdaCase::Resonant) return -l1;
        switch (term) {
            case Term::Xi1U:
            case Term::Xi1:
            case Term::Zeta1V:
            case Term::Zeta1: return -l1;
            case Term::Xi1V:
            case Term::Zeta1U: return c == LambdaCase::Strong ? -2.0 * l1 : -l2;
            case Term::Xi2:
            case Term::Zeta2: return -l2;
        }
        return 0.0;
    }
};

double residual(const BvpSolution& s, const TermInfo& ti, double t) {
    return ti.is_xi ? s.xi(ti.index, t) : s.zeta(ti.index, t);
}

bool term_applies(const TermInfo& ti, const BvpBoundary& b) {
    if (ti.need_u10 && ti.need_v1) return true;  // full shapes cover every boundary
    if (ti.need_u10) return b.v1tau == 0.0;
    return b.u10 == 0.0;
}

std::vector<BvpBoundary> fit_grid(const std::vector<double>& taus, double delta) {
    std::vector<BvpBoundary> g;
    for (double tau : taus)
        for (double su2 : {-1.0, 1.0})
            for (double sv2 : {-1.0, 1.0})
                for (double a : {-1.0, 0.0, 1.0})
                    for (double v : {-1.0, 0.0, 1.0})
                        g.push_back({tau, a * delta, su2 * delta, v * delta, sv2 * delta, delta});
    return g;
}

std::vector<double> fit_constants(const SystemSpec& spec, const Shapes& sh, const FlowEstimateOptions& opt,
                                  double delta) {
    std::vector<double> M(std::size(kTerms), 0.0);
    for (const auto& b : fit_grid(opt.fit_taus, delta)) {
        const BvpSolution s = solve_bvp(spec, b, opt.bvp);
        for (std::size_t k = 0; k < std::size(kTerms); ++k) {
            if (!term_applies(kTerms[k], b)) continue;
            for (int i = 0; i < opt.time_samples; ++i) {
                const double t = b.tau * i / (opt.time_samples - 1);
                const double r = std::fabs(residual(s, kTerms[k], t));
                const double w = sh.shape(kTerms[k].term, t, b);
                if (w > 0.0)
                    M[k] = std::max(M[k], r / w);
                else if (r > 0.0)
                    M[k] = std::numeric_limits<double>::infinity();
            }
        }
    }
    return M;
}

struct LineFit {
    double slope = 0.0, se = 0.0;
    bool ok = false;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    const std::size_t n = x.size();
    if (n < 3) return f;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
    f.slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - my - f.slope * (x[i] - mx);
        ssr += e * e;
    }
    f.se = std::sqrt(ssr / (n - 2) / sxx);
    f.ok = std::isfinite(f.slope);
    return f;
}

// Condition number of the normalized two-column design [e^{p1 τ}, e^{p2 τ}].
double joint_condition(const std::vector<double>& taus, double p1, double p2) {
    double g11 = 0.0, g12 = 0.0, g22 = 0.0;
    for (double t : taus) {
        const double a = std::exp(p1 * t), b = std::exp(p2 * t);
        g11 += a * a, g12 += a * b, g22 += b * b;
    }
    const double c = g12 / std::sqrt(g11 * g22);
    if (!(c < 1.0)) return std::numeric_limits<double>::infinity();
    return std::sqrt((1.0 + c) / (1.0 - c));
}

}  // namespace

EstimateReport verify_flow_estimates(const SystemSpec& spec, LambdaCase c, const FlowEstimateOptions& opt) {
    if (c != lambda_case(spec)) raise(ErrorKind::InvalidArgument, "estimate case does not match the system's eigenvalues");
    const auto start = std::chrono::steady_clock::now();
    const Shapes sh{c, spec.lambda1, spec.lambda2};
    EstimateReport rep;
    rep.case_tag = to_string(c);
    rep.delta = opt.delta;

    const auto M = fit_constants(spec, sh, opt, opt.delta);
    const auto Mh = fit_constants(spec, sh, opt, 0.5 * opt.delta);

    for (std::size_t k = 0; k < std::size(kTerms); ++k) {
        const TermInfo& ti = kTerms[k];
        BoundFit b;
        b.name = ti.name;
        b.fitted_M = M[k];
        b.M_halved = Mh[k];
        b.margin = 2.0 * M[k] - Mh[k];
        if (M[k] == 0.0 && Mh[k] == 0.0) b.margin = 0.0;

        std::vector<double> x, y;
        for (double tau : opt.regression_taus) {
            const double d = opt.delta;
            const BvpBoundary bd{tau, ti.need_u10 ? d : 0.0, d, ti.need_v1 ? d : 0.0, d, d};
            BvpOptions bo = opt.bvp;
            bo.tol = 0.0;  // residuals far below δ² need the round-off fixed point
            const BvpSolution s = solve_bvp(spec, bd, bo);
            const double r = std::fabs(residual(s, ti, ti.is_xi ? tau : 0.0));
            if (r > 0.0 && std::isfinite(r)) {
                x.push_back(tau);
                y.push_back(std::log(r));
            }
        }
        const LineFit f = fit_line(x, y);
        b.exponent_expected = sh.slope(ti.term);
        const double tol = opt.exponent_tol * std::fabs(b.exponent_expected);
        if (f.ok) {
            b.exponent_fit = f.slope;
            b.exponent_se = f.se;
            b.exponent_ok = f.slope <= b.exponent_expected + tol;
            b.sharp = std::fabs(f.slope - b.exponent_expected) <= tol;
        } else {
            b.exponent_ok = false;
        }
        b.ill_conditioned = !f.ok || x.size() < opt.regression_taus.size() || f.se > tol;
        if ((ti.term == Term::Xi1 || ti.term == Term::Zeta1) && c != LambdaCase::Resonant) {
            const double p2 = sh.slope(ti.term == Term::Xi1 ? Term::Xi1V : Term::Zeta1U);
            if (joint_condition(opt.regression_taus, -spec.lambda1, p2) > 1e3) b.ill_conditioned = true;
        }
        rep.bounds.push_back(b);
    }
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

std::vector<Vec2> d2_grid(double m, double eps) {
    std::vector<Vec2> g;
    for (double sign : {1.0, -1.0})
        for (double rf : {0.1, 0.3, 0.5, 0.7, 0.9})
            for (int k = 0; k < 5; ++k) {
                const double w = std::pow(m, -1.0 + 0.5 * k);  // v/u from 1/m to m
                const double r = rf * eps;
                const double u = r / std::sqrt(1.0 + w * w);
                g.push_back({sign * u, sign * u * w});
            }
    return g;
}

Mat2 local_map_jacobian_fd(const SystemSpec& spec, double delta, double u10, double v10, double rel_step) {
    LocalMapOptions lo;
    lo.dual_route = false;
    lo.flow.step.rtol = 1e-13;
    lo.flow.step.atol = 1e-20;
    const SectionChart ps{SectionKind::Ps, delta};
    auto eval = [&](double u, double v) { return local_map(spec, ps, u, v, lo).exit.point; };
    auto central = [&](int col, double h) {
        const Vec2 p = col == 0 ? eval(u10 + h, v10) : eval(u10, v10 + h);
        const Vec2 q = col == 0 ? eval(u10 - h, v10) : eval(u10, v10 - h);
        return Vec2{(p[0] - q[0]) / (2 * h), (p[1] - q[1]) / (2 * h)};
    };
    Mat2 j{};
    for (int col = 0; col < 2; ++col) {
        const double h = rel_step * std::fabs(col == 0 ? u10 : v10);
        const Vec2 d1 = central(col, h), d2 = central(col, 0.5 * h);
        for (int row = 0; row < 2; ++row) j[row][col] = (4.0 * d2[row] - d1[row]) / 3.0;
    }
    return j;
}

namespace {

std::vector<DerivativeSample> derivative_samples(const SystemSpec& spec, const std::vector<Vec2>& grid,
                                                 const DerivativeEstimateOptions& opt, double d, bool fd,
                                                 std::array<double, 4>& worst) {
    const double g = spec.gamma(), l1 = spec.lambda1;
    const SectionChart ps{SectionKind::Ps, d};
    std::vector<DerivativeSample> out;
    for (const Vec2& p : grid) {
        DerivativeSample s;
        s.u10 = p[0];
        s.v10 = p[1];
        const State4 x0 = lift_section_point(spec, ps, p[0], p[1]);
        const LocalPassage lp = solve_local_passage(spec, p[0], d, p[1], x0[V2], d, opt.bvp);
        s.jac = chained_local_map_derivatives(spec, lp, opt.bvp);
        const double e = std::exp(l1 * s.jac.tau);
        const std::array<double, 4> lead{(1.0 + g) / e, g * (p[0] / p[1]) / e, -g * (p[1] / p[0]) * e, (1.0 - g) * e};
        const std::array<double, 4> val{s.jac.deta1_du10, s.jac.deta1_dv10, s.jac.deta2_du10, s.jac.deta2_dv10};
        for (int k = 0; k < 4; ++k) {
            s.ratio[k] = val[k] / lead[k];
            worst[k] = std::max(worst[k], std::fabs(s.ratio[k] - 1.0));
        }
        if (fd) {
            const Mat2 j = local_map_jacobian_fd(spec, d, p[0], p[1]);
            s.fd = {j[0][0], j[0][1], j[1][0], j[1][1]};
            for (int k = 0; k < 4; ++k) s.fd_error = std::max(s.fd_error, std::fabs(val[k] - s.fd[k]) / std::fabs(val[k]));
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace

DerivativeReport verify_derivative_estimates(const SystemSpec& spec, const std::vector<Vec2>& grid,
                                             const DerivativeEstimateOptions& opt) {
    if (lambda_case(spec) != LambdaCase::Strong)
        raise(ErrorKind::InvalidArgument, "derivative estimates require 2 lambda1 < lambda2");
    for (const Vec2& p : grid)
        if (!in_D2(p[0], p[1], opt.m) || !(std::hypot(p[0], p[1]) < opt.eps))
            raise(ErrorKind::RegionError, "derivative grid point lies outside D2");

    const auto start = std::chrono::steady_clock::now();
    DerivativeReport out;
    std::array<double, 4> worst{}, worst_half{};
    out.samples = derivative_samples(spec, grid, opt, opt.delta, opt.finite_differences, worst);
    std::vector<DerivativeSample> half = derivative_samples(spec, grid, opt, 0.5 * opt.delta, false, worst_half);
    out.report.case_tag = to_string(LambdaCase::Strong);
    out.report.delta = opt.delta;
    for (const auto& s : out.samples) out.max_fd_error = std::max(out.max_fd_error, s.fd_error);
    static constexpr const char* names[4] = {"deta1_du10", "deta1_dv10", "deta2_du10", "deta2_dv10"};
    for (int k = 0; k < 4; ++k) {
        BoundFit b;
        b.name = names[k];
        b.fitted_M = worst[k] / opt.delta;
        b.M_halved = worst_half[k] / (0.5 * opt.delta);
        b.margin = opt.ratio_constant - b.fitted_M;
        out.report.bounds.push_back(b);
    }
    out.fd_passed = !opt.finite_differences || out.max_fd_error <= opt.fd_tol;
    out.report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace homlab
