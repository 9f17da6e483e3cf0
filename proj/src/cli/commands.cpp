#include "homlab/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "homlab/bvp.hpp"
#include "homlab/cnlse.hpp"
#include "homlab/error.hpp"
#include "homlab/estimates.hpp"
#include "homlab/io.hpp"
#include "homlab/manifold.hpp"
#include "homlab/multipulse.hpp"
#include "homlab/poincare.hpp"
#include "homlab/report.hpp"

namespace homlab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Results land in slot i, so the outcome does not depend on the worker count.
void parallel_for(int n, int workers, const std::function<void(int)>& body) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(workers, n); ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorKind::ConfigError, "cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
    raise(ErrorKind::ConfigError, key + ": " + what);
}

// ---- configuration helpers -------------------------------------------------

CnlseParams cnlse_params(const Config& c) {
    CnlseParams p;
    p.alpha = c.get_double("system.alpha", 1.0);
    p.beta = c.get_double("system.beta", 1.0);
    p.omega = c.get_double("system.omega", 3.0);
    const std::string s = c.get_string("system.scaling", "balanced");
    if (s == "half") p.scaling = CnlseScaling::Half;
    else if (s != "balanced") config_error("system.scaling", "expected balanced or half");
    validate(p);
    return p;
}

std::string system_kind(const Config& c) {
    const std::string k = c.get_string("system.kind", "cubic");
    if (k != "cubic" && k != "linear" && k != "cnlse") config_error("system.kind", "expected cubic, linear or cnlse");
    return k;
}

SystemSpec system_from(const Config& c) {
    const std::string kind = system_kind(c);
    if (kind == "cnlse") return cnlse_system(cnlse_params(c));
    double l1 = 1.0, l2 = 1.0;
    if (c.has("system.lambda1") || c.has("system.lambda2")) {
        l1 = c.get_double("system.lambda1", 1.0);
        l2 = c.get_double("system.lambda2", 1.0);
    } else {
        const double g = c.get_double("system.gamma", 0.3);
        if (!(g > 0.0)) config_error("system.gamma", "must be positive");
        const std::string unit = c.get_string("system.rate_unit", "lambda2");
        if (unit == "lambda2") {
            l1 = g;
        } else if (unit == "lambda1") {
            l2 = 1.0 / g;
        } else {
            config_error("system.rate_unit", "expected lambda1 or lambda2");
        }
    }
    if (!(l1 > 0.0 && l2 > 0.0)) config_error("system.lambda1", "rates must be positive");
    if (kind == "linear") return linear_system(l1, l2);
    CubicParams p;
    p.lambda1 = l1;
    p.lambda2 = l2;
    p.h3 = c.get_double("system.h3", p.h3);
    p.h4 = c.get_double("system.h4", p.h4);
    p.k = c.get_double("system.k", p.k);
    p.q = c.get_double("system.q", p.q);
    p.s1 = c.get_double("system.s1", p.s1);
    p.s2 = c.get_double("system.s2", p.s2);
    p.s3 = c.get_double("system.s3", p.s3);
    return cubic_system(p);
}

struct Geometry {
    double delta, eps, eps_u, m;
};

Geometry geometry_from(const Config& c) {
    Geometry g{c.get_double("geometry.delta", 0.1), c.get_double("geometry.eps", 1e-2),
               c.get_double("geometry.eps_u", 5e-2), c.get_double("geometry.m", 4.0)};
    if (!(g.delta > 0.0)) config_error("geometry.delta", "must be positive");
    if (!(g.eps > 0.0)) config_error("geometry.eps", "must be positive");
    if (!(g.eps_u > 0.0)) config_error("geometry.eps_u", "must be positive");
    if (!(g.m > 1.0)) config_error("geometry.m", "must exceed 1");
    return g;
}

// The reversed map is the local map of the time-reversed, (u, v)-swapped system.
std::shared_ptr<const LocalMap> local_from(const Config& c, const SystemSpec& spec, const Geometry& g,
                                           bool reversed = false) {
    const std::string kind = c.get_string("local.kind", "linear");
    if (kind == "linear") return std::make_shared<LinearLocalMap>(spec.lambda1, spec.lambda2, g.delta);
    if (kind != "flow") config_error("local.kind", "expected linear or flow");
    LocalMapOptions lo;
    lo.eps_u = g.eps_u;
    lo.dual_route = c.get_bool("local.dual_route", false);
    lo.flow.step.rtol = c.get_double("local.rtol", 1e-12);
    lo.flow.step.atol = c.get_double("local.atol", 1e-300);
    auto s = std::make_shared<SystemSpec>(reversed ? reversed_system(spec) : spec);
    return std::make_shared<FlowLocalMap>(s, g.delta, lo);
}

Mat2 matrix_from(const Config& c, const std::string& section) {
    const std::string kind = c.get_string(section + ".kind", "affine");
    if (kind == "identity") return Mat2{{{1.0, 0.0}, {0.0, 1.0}}};
    if (kind != "affine") config_error(section + ".kind", "expected affine or identity");
    return Mat2{{{c.require_double(section + ".a"), c.require_double(section + ".b")},
                 {c.require_double(section + ".c"), c.require_double(section + ".d")}}};
}

std::shared_ptr<AffineGlobalMap> global_from(const Config& c, const std::string& section, SectionKind from,
                                             SectionKind to) {
    const Mat2 A = matrix_from(c, section);
    if (A[0][0] * A[1][1] - A[0][1] * A[1][0] == 0.0) config_error(section, "global map must be invertible");
    return std::make_shared<AffineGlobalMap>(A, from, to, c.get_double(section + ".quadratic", 0.0));
}

ManifoldOptions manifold_options(const Config& c, double gamma, const Geometry& g) {
    ManifoldOptions o;
    o.gamma = gamma;
    o.m = g.m;
    o.eps = g.eps;
    o.alpha = c.get_double("manifold.alpha_chart", 0.0);
    o.max_halvings = c.get_int("manifold.max_halvings", o.max_halvings);
    o.transform.samples = c.get_int("manifold.samples", o.transform.samples);
    o.transform.tol = c.get_double("manifold.tol", o.transform.tol);
    o.transform.max_iterations = c.get_int("manifold.max_iterations", o.transform.max_iterations);
    return o;
}

json coeff_json(const GlobalMapCoeffs& k) {
    return {{"a", k.a},
            {"b", k.b},
            {"c", k.c},
            {"d", k.d},
            {"ad_minus_bc", k.ad_minus_bc},
            {"b_plus_c", k.b_plus_c},
            {"source", k.source},
            {"flags",
             {{"non_transversal", k.non_transversal},
              {"route_discrepancy", k.route_discrepancy},
              {"condition", k.condition}}}};
}

bool expected_failure(const Error& e) {
    return e.kind() == ErrorKind::NotContractive || e.kind() == ErrorKind::NoContraction ||
           e.kind() == ErrorKind::DomainExit;
}

// Uniform in [lo, hi) from the top 53 bits; identical on every platform.
double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// ---- commands ---------------------------------------------------------------

void cmd_integrate(const Config& c, const RunContext& ctx, Report& rep) {
    FlowOptions flow;
    flow.step.rtol = c.get_double("integrate.rtol", 1e-12);
    flow.step.atol = c.get_double("integrate.atol", 1e-14);
    const double drift_tol = c.get_double("integrate.drift_tol", 1e-9);
    Trajectory traj;
    SystemSpec spec;
    if (system_kind(c) == "cnlse") {
        const CnlseParams p = cnlse_params(c);
        spec = cnlse_system(p);
        const int kappa = c.get_int("integrate.kappa", 1);
        if (kappa != 1 && kappa != -1) config_error("integrate.kappa", "expected 1 or -1");
        const double L = c.get_double("integrate.half_width", 10.0 / p.omega);
        const int n = c.get_int("integrate.grid_points", 401);
        if (!(L > 0.0) || n < 2) config_error("integrate.half_width", "needs a positive width and >= 2 points");
        std::vector<double> grid(n);
        for (int k = 0; k < n; ++k) grid[k] = -L + 2.0 * L * k / (n - 1);
        const ExplicitSolutionReport e = verify_explicit_solution(p, grid);
        const double tol = c.get_double("integrate.residual_tol", 1e-10);
        rep.add("explicit_solution_residual", "explicit homoclinic loop of the coupled NLS system",
                e.field_residual <= tol && e.scalar_residual <= tol,
                {{"field_residual", e.field_residual},
                 {"scalar_residual", e.scalar_residual},
                 {"energy_on_loop", e.h_residual},
                 {"points", e.points},
                 {"tol", tol}});
        traj = integrate(spec, explicit_homoclinic(p, kappa, -L), -L, L, flow);
        double deviation = 0.0;
        for (std::size_t k = 0; k < traj.t.size(); ++k)
            deviation = std::max(deviation, norm_inf(traj.x[k] - explicit_homoclinic(p, kappa, traj.t[k])));
        rep.add("energy_drift", "conserved Hamiltonian along the flow", traj.h_drift <= drift_tol,
                {{"h_drift", traj.h_drift}, {"tol", drift_tol}, {"steps", traj.t.size() - 1},
                 {"max_deviation_from_closed_form", deviation}});
    } else {
        spec = system_from(c);
        const auto x0 = c.get_doubles("integrate.x0", {});
        if (x0.size() != 4) config_error("integrate.x0", "expected four numbers u1, u2, v1, v2");
        const double t0 = c.get_double("integrate.t0", 0.0), t1 = c.require_double("integrate.t1");
        traj = integrate(spec, {x0[0], x0[1], x0[2], x0[3]}, t0, t1, flow);
        rep.add("energy_drift", "conserved Hamiltonian along the flow", traj.h_drift <= drift_tol,
                {{"h_drift", traj.h_drift}, {"tol", drift_tol}, {"steps", traj.t.size() - 1}});
    }
    std::ostringstream os;
    write_trajectory_csv(os, spec, traj);
    write_file(ctx.out_dir / "trajectory.csv", os.str());
}

std::string case_anchor(LambdaCase k) {
    switch (k) {
        case LambdaCase::Resonant: return "flow estimates near a resonant saddle";
        case LambdaCase::Intermediate: return "flow estimates for lambda1 < lambda2 < 2 lambda1";
        case LambdaCase::Strong: return "flow estimates for 2 lambda1 < lambda2";
    }
    return "plumbing";
}

json bound_metrics(const BoundFit& b) {
    return {{"fitted_M", b.fitted_M},       {"M_halved", b.M_halved},
            {"margin", b.margin},           {"exponent_fit", b.exponent_fit},
            {"exponent_expected", b.exponent_expected}, {"exponent_se", b.exponent_se},
            {"sharp", b.sharp},             {"ill_conditioned", b.ill_conditioned}};
}

void bvp_oracle(const Config& c, const RunContext& ctx, const SystemSpec& spec, Report& rep) {
    const double delta = c.get_double("bvp.delta", 0.05);
    const int n = c.get_int("bvp.boundaries", 20);
    const double tau_lo = c.get_double("bvp.tau_min", 1.0), tau_hi = c.get_double("bvp.tau_max", 6.0);
    const auto seed = static_cast<std::uint64_t>(c.get_int("bvp.seed", 11));
    const double tol = c.get_double("bvp.oracle_tol", 1e-8);
    if (n < 1 || !(delta > 0.0) || !(tau_lo > 0.0 && tau_hi >= tau_lo))
        config_error("bvp", "needs boundaries >= 1, delta > 0 and 0 < tau_min <= tau_max");
    std::mt19937_64 rng(seed);
    std::vector<BvpBoundary> bs(n);
    for (auto& b : bs) {
        b.tau = uniform(rng, tau_lo, tau_hi);
        b.u10 = uniform(rng, -delta, delta);
        b.u20 = uniform(rng, 0.0, 1.0) < 0.5 ? -delta : delta;
        b.v1tau = uniform(rng, -delta, delta);
        b.v2tau = uniform(rng, 0.0, 1.0) < 0.5 ? -delta : delta;
        b.delta = delta;
    }
    FlowOptions flow;
    flow.step.rtol = 1e-13;
    flow.step.atol = 1e-16;
    std::vector<json> rows(n);
    std::vector<double> diff(n), ratio(n);
    parallel_for(n, ctx.workers, [&](int i) {
        const BvpBoundary& b = bs[i];
        const BvpSolution sol = solve_bvp(spec, b);
        const ShootingResult sh = shoot_bvp(spec, b, flow);
        const double de = norm_inf(sol.node(sol.size() - 1) - sh.end), ds = norm_inf(sol.node(0) - sh.start);
        diff[i] = std::max(de, ds);
        ratio[i] = sol.contraction_ratio;
        rows[i] = {{"tau", b.tau},           {"u10", b.u10},
                   {"u20", b.u20},           {"v1tau", b.v1tau},
                   {"v2tau", b.v2tau},       {"endpoint_difference", de},
                   {"start_difference", ds}, {"contraction_ratio", sol.contraction_ratio},
                   {"iterations", sol.iterations}, {"shooting_iterations", sh.iterations}};
    });
    const double worst = *std::max_element(diff.begin(), diff.end());
    const double worst_ratio = *std::max_element(ratio.begin(), ratio.end());
    rep.add("bvp_vs_shooting", "Shilnikov boundary value problem near the saddle", worst <= tol,
            {{"max_difference", worst}, {"tol", tol}, {"boundaries", n}});
    rep.add("contraction_ratio", "contraction of the successive-approximation operator", worst_ratio < 0.5,
            {{"max_ratio", worst_ratio}, {"bound", 0.5}});
    write_json(ctx.out_dir / "bvp_oracle.json",
               {{"gamma", spec.gamma()}, {"delta", delta}, {"seed", seed}, {"rows", rows}});
}

void cmd_bvp_verify(const Config& c, const RunContext& ctx, Report& rep) {
    const SystemSpec spec = system_from(c);
    const std::string suite = c.get_string("bvp.suite", "oracle");
    if (suite == "oracle") return bvp_oracle(c, ctx, spec, rep);
    if (suite == "flow") {
        const std::string k = c.get_string("bvp.case", "auto");
        const LambdaCase lc = k == "auto" ? lambda_case(spec) : parse_lambda_case(k);
        FlowEstimateOptions o;
        o.delta = c.get_double("bvp.delta", o.delta);
        o.exponent_tol = c.get_double("bvp.exponent_tol", o.exponent_tol);
        const EstimateReport r = verify_flow_estimates(spec, lc, o);
        for (const auto& b : r.bounds) rep.add("flow_bound." + b.name, case_anchor(lc), b.passed(), bound_metrics(b));
        json j = to_json(r);
        j.erase("runtime_seconds");
        write_json(ctx.out_dir / "estimates.json", j);
        return;
    }
    if (suite != "derivatives") config_error("bvp.suite", "expected oracle, flow or derivatives");
    DerivativeEstimateOptions o;
    o.delta = c.get_double("bvp.delta", o.delta);
    o.m = geometry_from(c).m;
    o.eps = c.get_double("bvp.eps", o.eps);
    o.ratio_constant = c.get_double("bvp.ratio_constant", o.ratio_constant);
    o.fd_tol = c.get_double("bvp.fd_tol", o.fd_tol);
    const DerivativeReport r = verify_derivative_estimates(spec, d2_grid(o.m, o.eps), o);
    rep.add("fd_agreement", "variational derivatives of the local map", r.fd_passed,
            {{"max_relative_error", r.max_fd_error}, {"tol", o.fd_tol}, {"samples", r.samples.size()}});
    for (const auto& b : r.report.bounds)
        rep.add("ratio." + b.name, "leading terms of the local-map derivatives", b.passed(),
                {{"C", b.fitted_M}, {"C_halved_delta", b.M_halved}, {"C_allowed", o.ratio_constant},
                 {"margin", b.margin}});
    json samples = json::array();
    for (const auto& s : r.samples)
        samples.push_back({{"u10", s.u10}, {"v10", s.v10}, {"ratio", s.ratio}, {"fd_error", s.fd_error},
                           {"tau", s.jac.tau}});
    json j = to_json(r.report);
    j.erase("runtime_seconds");
    j["max_fd_error"] = r.max_fd_error;
    j["samples"] = samples;
    write_json(ctx.out_dir / "estimates.json", j);
}

void cmd_coeffs(const Config& c, const RunContext& ctx, Report& rep) {
    const double agree = c.get_double("coeffs.agree_tol", 1e-5);
    if (system_kind(c) == "cnlse") {
        const CnlseParams base = cnlse_params(c);
        const double delta = geometry_from(c).delta;
        const auto omegas = c.get_doubles("coeffs.omegas", {base.omega});
        const double tol = c.get_double("coeffs.identity_tol", 1e-6);
        std::vector<CnlseCoefficients> out(omegas.size());
        for (double w : omegas) {
            CnlseParams p = base;
            p.omega = w;
            validate(p, true);
        }
        parallel_for(static_cast<int>(omegas.size()), ctx.workers, [&](int i) {
            CnlseParams p = base;
            p.omega = omegas[i];
            out[i] = compute_cnlse_coefficients(p, delta);
        });
        double route = 0.0, det = 0.0, rev = 0.0, sym = 0.0;
        json rows = json::array();
        for (std::size_t i = 0; i < out.size(); ++i) {
            const auto& k = out[i];
            route = std::max({route, k.loop1.route_discrepancy, k.loop2.route_discrepancy});
            det = std::max({det, std::fabs(k.loop1.ad_minus_bc - 1.0), std::fabs(k.loop2.ad_minus_bc - 1.0)});
            rev = std::max({rev, std::fabs(k.loop1.b_plus_c), std::fabs(k.loop2.b_plus_c)});
            sym = std::max(sym, k.symmetry_defect);
            json row = coeff_json(k.loop1);
            row["omega"] = omegas[i];
            row["loop2"] = coeff_json(k.loop2);
            row["symmetry_defect"] = k.symmetry_defect;
            row["arrival_mismatch"] = k.arrival_mismatch;
            rows.push_back(row);
        }
        rep.add("route_agreement", "differential of the global map at the unstable trace", route <= agree,
                {{"max_route_discrepancy", route}, {"tol", agree}});
        rep.add("ad_minus_bc", "area preservation by the Hamiltonian global map", det <= tol,
                {{"max_abs_ad_minus_bc_minus_1", det}, {"tol", tol}});
        rep.add("b_plus_c", "reversibility of the global map", rev <= tol, {{"max_abs_b_plus_c", rev}, {"tol", tol}});
        rep.add("loop_symmetry", "symmetric loops of the figure-eight", sym <= tol,
                {{"max_symmetry_defect", sym}, {"tol", tol}});
        write_json(ctx.out_dir / "coeffs.json", rows.size() == 1 ? rows[0] : json{{"rows", rows}});
        return;
    }
    const auto g = global_from(c, "global", SectionKind::Pu, SectionKind::Ps);
    const GlobalMapCoeffs k = global_map_coefficients(*g, c.get_double("coeffs.fd_step", 1e-4), agree);
    rep.add("route_agreement", "differential of the global map at the unstable trace", k.route_discrepancy <= agree,
            {{"route_discrepancy", k.route_discrepancy}, {"tol", agree}});
    if (c.get_string("global.kind", "affine") == "identity") {
        const double e = std::max({std::fabs(k.a - 1.0), std::fabs(k.b), std::fabs(k.c), std::fabs(k.d - 1.0)});
        rep.add("identity_tube", "plumbing", e <= 1e-12, {{"max_deviation", e}});
    }
    if (c.has("coeffs.expect")) {
        const auto want = c.get_doubles("coeffs.expect", {});
        if (want.size() != 4) config_error("coeffs.expect", "expected four numbers a, b, c, d");
        const double e = std::max({std::fabs(k.a - want[0]), std::fabs(k.b - want[1]), std::fabs(k.c - want[2]),
                                   std::fabs(k.d - want[3])});
        rep.add("expected_coefficients", "plumbing", e <= 1e-8, {{"max_deviation", e}});
    }
    write_json(ctx.out_dir / "coeffs.json", coeff_json(k));
}

// Runs a manifold construction expected to fail; records the error kind.
json expect_no_curve(const std::function<void()>& build, bool& ok) {
    try {
        build();
        ok = false;
        return {{"outcome", "curve built"}};
    } catch (const Error& e) {
        ok = expected_failure(e);
        return {{"outcome", std::string(to_string(e.kind()))}, {"message", e.what()}};
    }
}

void cmd_classify(const Config& c, const RunContext& ctx, Report& rep) {
    const Geometry g = geometry_from(c);
    const std::string mode = c.get_string("classify.mode", "single");
    const std::string source = c.get_string("classify.coefficients", "global");
    if (mode != "single" && mode != "figure_eight") config_error("classify.mode", "expected single or figure_eight");
    Mat2 A1{}, A2{};
    double gamma = 0.0;
    if (source == "cnlse") {
        const CnlseParams p = cnlse_params(c);
        validate(p, true);
        const CnlseCoefficients k = compute_cnlse_coefficients(p, g.delta);
        A1 = {{{k.loop1.a, k.loop1.b}, {k.loop1.c, k.loop1.d}}};
        A2 = {{{k.loop2.a, k.loop2.b}, {k.loop2.c, k.loop2.d}}};
        gamma = 1.0 / p.omega;
    } else if (source == "global") {
        A1 = matrix_from(c, "global");
        A2 = mode == "figure_eight" ? matrix_from(c, "global2") : A1;
        gamma = c.get_double("classify.gamma", std::numeric_limits<double>::quiet_NaN());
        if (std::isnan(gamma)) gamma = system_from(c).gamma();
    } else {
        config_error("classify.coefficients", "expected global or cnlse");
    }
    if (!(gamma > 0.0)) config_error("classify.gamma", "must be positive");
    const Classification cl =
        mode == "single" ? classify_homoclinic(gamma, A1[0][1], A1[1][0], A1[1][1])
                         : classify_figure_eight(gamma, A1[0][1], A1[1][0], A1[1][1], A2[0][1], A2[1][0], A2[1][1]);
    json out = to_json(cl);
    out["gamma"] = gamma;
    out["coefficients"] = mode == "single" ? json(A1) : json{A1, A2};

    // Empirical corroboration on the closed-form normal-form passage.
    const bool corroborate = c.get_bool("classify.corroborate", true);
    const auto local = std::make_shared<LinearLocalMap>(gamma, 1.0, g.delta);
    const PoincareOptions popt{g.eps, g.eps_u};
    ManifoldOptions mo = manifold_options(c, gamma, g);
    ManifoldOptions fail_mo = mo;
    fail_mo.sign_precheck = false;
    fail_mo.max_halvings = std::min(mo.max_halvings, 6);
    json evidence = json::object();
    if (corroborate && cl.gamma_case == GammaCase::GammaGtHalf) {
        const auto grid = c.get_doubles("classify.eps_grid", {1e-2, 5e-3, 2.5e-3});
        const auto global = std::make_shared<AffineGlobalMap>(A1);
        const RecurrenceReport r = recurrence_check(local, global, grid, g.eps_u);
        json levels = json::array();
        for (const auto& l : r.levels)
            levels.push_back({{"eps", l.eps}, {"samples", l.samples}, {"in_domain", l.in_domain},
                              {"returns", l.returns}, {"max_deviation", l.max_deviation}});
        rep.add("no_return", "empty recurrent sets for gamma above one half", r.no_return(), {{"levels", levels}});
        rep.add("accumulation_on_d_over_b", "images accumulate on the line of slope d/b", r.deviation_decreasing(),
                {{"w_star", r.w_star}, {"levels", levels}});
        evidence["recurrence"] = levels;
    } else if (corroborate && cl.gamma_case == GammaCase::GammaLtHalf && mode == "single") {
        const auto global = std::make_shared<AffineGlobalMap>(A1);
        const auto T = std::make_shared<PoincareMap>(local, global, popt);
        bool ok = false;
        json m;
        if (cl.u_manifold == ManifoldVerdict::Curve) {
            const ManifoldResult r = build_unstable_curve(T, mo);
            ok = r.bounds.contractive();
            m = {{"outcome", "curve built"}, {"theta", r.theta}, {"w_star", r.curve.w_star}};
        } else {
            m = expect_no_curve([&] { build_unstable_curve(T, fail_mo); }, ok);
        }
        rep.add("unstable_verdict_corroborated", "unstable manifold dichotomy for gamma below one half", ok, m);
        if (cl.s_manifold == ManifoldVerdict::Curve) {
            const ManifoldResult r = build_stable_curve(local, global, popt, mo);
            ok = r.bounds.contractive();
            m = {{"outcome", "curve built"}, {"theta", r.theta}, {"w_star", r.curve.w_star}};
        } else {
            m = expect_no_curve([&] { build_stable_curve(local, global, popt, fail_mo); }, ok);
        }
        rep.add("stable_verdict_corroborated", "stable manifold dichotomy for gamma below one half", ok, m);
    } else if (corroborate && cl.gamma_case == GammaCase::GammaLtHalf) {
        const auto g1 = std::make_shared<AffineGlobalMap>(A1, SectionKind::Pu1, SectionKind::Ps1);
        const auto g2 = std::make_shared<AffineGlobalMap>(A2, SectionKind::Pu2, SectionKind::Ps2);
        const auto map = std::make_shared<FigureEightMap>(local, g1, g2, popt);
        bool ok = false;
        json m;
        if (cl.u_manifold == ManifoldVerdict::Curve) {
            const FigureEightManifold r = build_figure_eight_unstable(map, mo);
            ok = r.composed_bound < 1.0;
            m = {{"outcome", "curve built"}, {"composed_bound", r.composed_bound}};
        } else {
            m = expect_no_curve([&] { build_figure_eight_unstable(map, fail_mo); }, ok);
        }
        rep.add("joint_unstable_verdict_corroborated", "joint unstable manifold of the figure-eight", ok, m);
    }
    write_json(ctx.out_dir / "classification.json", out);
}

void write_figure_eight_csv(const fs::path& path, const FigureEightManifold& r) {
    std::ostringstream os;
    os << "z,w,u1,v1\n";
    for (std::size_t k = 0; k < r.curve.z.size(); ++k)
        os << format_double(r.curve.z[k]) << ',' << format_double(r.curve.w[k]) << ','
           << format_double(r.points[k][0]) << ',' << format_double(r.points[k][1]) << '\n';
    write_file(path, os.str());
}

void manifold_checks(const ManifoldResult& r, const ManifoldOptions& mo, Report& rep, json& out, const char* what) {
    const ManifoldVerification v = verify_manifold(r);
    const double ratio = r.curve.contraction_ratio;
    const std::string anchor = std::string(what) + " manifold as the fixed graph of the cross-map";
    rep.add("graph_transform_converges", anchor, ratio < 1.0 && r.curve.iterations < mo.transform.max_iterations,
            {{"contraction_ratio", ratio}, {"iterations", r.curve.iterations}, {"changes", r.curve.changes},
             {"condition1", r.bounds.condition1}, {"condition2", r.bounds.condition2}});
    rep.add("invariance_residual", anchor, v.invariance_residual <= 5.0 * mo.transform.tol,
            {{"residual", v.invariance_residual}, {"bound", 5.0 * mo.transform.tol}, {"samples", v.invariance_samples}});
    rep.add("tangency", std::string(what) + " manifold tangent to the line of the global-map slope",
            v.tangency_error <= 1e-3, {{"slope", v.tangency_slope}, {"w_star", r.curve.w_star}, {"error", v.tangency_error}});
    rep.add("backward_convergence", std::string(what) + " manifold points converge to the trace", v.backward_monotone,
            {{"backward_norms", v.backward_norms}});
    out = to_json(v);
    out["theta"] = r.theta;
    out["halvings"] = r.halvings;
    out["contraction_ratio"] = ratio;
    out["iterations"] = r.curve.iterations;
}

void cmd_manifold(const Config& c, const RunContext& ctx, Report& rep) {
    const SystemSpec spec = system_from(c);
    const Geometry g = geometry_from(c);
    const double gamma = spec.gamma();
    if (!(gamma < 0.5)) config_error("system.gamma", "the manifold construction needs gamma < 1/2");
    const ManifoldOptions mo = manifold_options(c, gamma, g);
    ManifoldOptions fail_mo = mo;
    fail_mo.sign_precheck = false;
    fail_mo.max_halvings = c.get_int("manifold.failure_halvings", 6);
    const PoincareOptions popt{g.eps, g.eps_u};
    const std::string kind = c.get_string("manifold.kind", "unstable");
    json out;
    if (kind == "unstable" || kind == "stable") {
        const auto global = global_from(c, "global", SectionKind::Pu, SectionKind::Ps);
        const Mat2& A = global->matrix();
        const bool unstable = kind == "unstable";
        const double sign = unstable ? A[0][1] * A[1][1] : -A[1][0] * A[1][1];
        out["sign_condition"] = unstable ? "bd > 0" : "cd < 0";
        out["sign_product"] = unstable ? A[0][1] * A[1][1] : A[1][0] * A[1][1];
        const auto build = [&](const ManifoldOptions& o) {
            if (unstable)
                return build_unstable_curve(std::make_shared<PoincareMap>(local_from(c, spec, g), global, popt), o);
            return build_stable_curve(local_from(c, spec, g, true), global, popt, o);
        };
        if (sign > 0.0) {
            const ManifoldResult r = build(mo);
            json v;
            manifold_checks(r, mo, rep, v, unstable ? "unstable" : "stable");
            out["verification"] = v;
            write_curve_csv((ctx.out_dir / "curve.csv").string(), r);
        } else {
            bool ok = false;
            out["verification"] = expect_no_curve([&] { build(fail_mo); }, ok);
            rep.add("no_curve", "sign dichotomy of the local manifold construction", ok, out["verification"]);
        }
    } else if (kind == "figure_eight") {
        const auto local = local_from(c, spec, g);
        const auto g1 = global_from(c, "global", SectionKind::Pu1, SectionKind::Ps1);
        const auto g2 = global_from(c, c.has("global2.a") || c.has("global2.kind") ? "global2" : "global",
                                    SectionKind::Pu2, SectionKind::Ps2);
        const auto map = std::make_shared<FigureEightMap>(local, g1, g2, popt);
        const double bd1 = g1->matrix()[0][1] * g1->matrix()[1][1], bd2 = g2->matrix()[0][1] * g2->matrix()[1][1];
        out["b_i_d_i"] = {bd1, bd2};
        if (bd1 < 0.0 && bd2 < 0.0) {
            const FigureEightManifold r = build_figure_eight_unstable(map, mo);
            const double measured = std::max(r.composed.Fw + r.composed.Fz, r.composed.Gw + r.composed.Gz);
            rep.add("composed_contraction", "composition of cross-form contractions",
                    r.K1 * r.K2 < 1.0 && r.composed_bound < 1.0 && measured <= r.composed_bound &&
                        r.composed.contractive(),
                    {{"K1", r.K1}, {"K2", r.K2}, {"bound", r.composed_bound}, {"measured", measured},
                     {"condition1", r.composed.condition1}, {"condition2", r.composed.condition2}});
            const AlternationReport a = track_alternation(*map, r);
            json secs = json::array();
            for (auto s : a.sections) secs.push_back(to_string(s));
            rep.add("alternation", "figure-eight manifold alternates between the two loops", a.alternates,
                    {{"sections", secs}, {"norms", a.norms}, {"max_curve_distance", a.max_curve_distance}});
            out["theta"] = r.theta;
            out["composed_bound"] = r.composed_bound;
            out["sections"] = secs;
            write_figure_eight_csv(ctx.out_dir / "curve.csv", r);
        } else {
            bool ok = false;
            out["joint"] = expect_no_curve([&] { build_figure_eight_unstable(map, fail_mo); }, ok);
            rep.add("joint_route_fails", "joint figure-eight manifold needs b_i d_i < 0", ok, out["joint"]);
            json loops = json::array();
            if (bd1 > 0.0 && bd2 > 0.0) {
                const auto per = per_loop_unstable_curves(local, g1, g2, popt, mo);
                bool all = true;
                for (const auto& l : per) {
                    const ManifoldVerification v = verify_manifold(l);
                    all = all && v.tangency_error <= 1e-3 && l.bounds.contractive();
                    loops.push_back(to_json(v));
                }
                rep.add("per_loop_curves", "per-loop manifolds when the joint route fails", all, {{"loops", loops}});
            }
            out["per_loop"] = loops;
        }
    } else {
        config_error("manifold.kind", "expected unstable, stable or figure_eight");
    }
    write_json(ctx.out_dir / "verification.json", out);
}

void cmd_cnlse_scan(const Config& c, const RunContext& ctx, Report& rep) {
    OmegaScanOptions o;
    o.delta = geometry_from(c).delta;
    o.bisection_width = c.get_double("scan.bisection_width", o.bisection_width);
    o.extend_to = c.get_double("scan.extend_to", o.extend_to);
    const double alpha = c.get_double("system.alpha", 1.0), beta = c.get_double("system.beta", 1.0);
    const double lo = c.get_double("scan.omega_lo", 2.0), hi = c.get_double("scan.omega_hi", 20.0);
    const int n = c.get_int("scan.points", 60);
    if (!(lo >= 1.0 && hi > lo) || n < 2) config_error("scan", "needs 1 <= omega_lo < omega_hi and points >= 2");
    const OmegaScan s = scan_omega(alpha, beta, lo, hi, n, o);
    std::ostringstream os;
    write_scan_csv(os, s);
    write_file(ctx.out_dir / "scan.csv", os.str());
    write_json(ctx.out_dir / "zeros.json", zeros_json(s));
    double det = 0.0, rev = 0.0;
    int failed = 0;
    for (const auto& r : s.rows) {
        if (r.scenario == "failed") {
            ++failed;
            continue;
        }
        det = std::max(det, std::fabs(r.ad_minus_bc - 1.0));
        rev = std::max(rev, std::fabs(r.b_plus_c));
    }
    rep.add("row_identities", "area preservation and reversibility along the scan", det <= 1e-6 && rev <= 1e-6,
            {{"max_abs_ad_minus_bc_minus_1", det}, {"max_abs_b_plus_c", rev}, {"failed_rows", failed}});
    if (s.zeros.empty()) {
        rep.add("none_in_range", "sign changes of d along the frequency family",
                s.extended || o.extend_to <= hi,
                {{"extended", s.extended}, {"extended_hi", s.extended_hi}, {"rows", s.rows.size()}});
    }
    for (std::size_t k = 0; k < s.zeros.size(); ++k) {
        const auto& z = s.zeros[k];
        rep.add("zero_" + std::to_string(k), "transversality loss at a zero of d", z.b_unit() && z.flips(),
                {{"omega_star", z.omega_star}, {"b_at_zero", z.b_at_zero}, {"bracket_width", z.bracket_width},
                 {"scenario_below", z.scenario_below}, {"scenario_above", z.scenario_above}});
    }
}

void cmd_multipulse(const Config& c, const RunContext& ctx, Report& rep) {
    SyntheticMultipulseConfig m;
    m.gamma = c.get_double("multipulse.gamma", m.gamma);
    m.delta = c.get_double("multipulse.delta", m.delta);
    m.eps = c.get_double("multipulse.eps", m.eps);
    m.eps_u = c.get_double("multipulse.eps_u", m.eps_u);
    if (c.has("global.a") || c.has("global.kind")) m.A = matrix_from(c, "global");
    m.radius_u = c.get_double("multipulse.radius_u", m.radius_u);
    m.radius_s = c.get_double("multipulse.radius_s", m.radius_s);
    m.ball_fraction = c.get_double("multipulse.ball_fraction", m.ball_fraction);
    m.rotation_degrees = c.get_double("multipulse.rotation_degrees", m.rotation_degrees);
    m.align_tangents = c.get_bool("multipulse.align_tangents", m.align_tangents);
    m.i_max = c.get_int("multipulse.i_max", m.i_max);
    m.j_max = c.get_int("multipulse.j_max", m.j_max);
    m.reference_extra = c.get_int("multipulse.reference_extra", m.reference_extra);
    m.window_samples = c.get_int("multipulse.window_samples", m.window_samples);
    m.hausdorff_samples = c.get_int("multipulse.hausdorff_samples", m.hausdorff_samples);
    const MultipulseResult r = find_multipulse(m);
    json out = to_json(r);
    std::ostringstream os;
    write_curves_csv(os, r);
    write_file(ctx.out_dir / "curves.csv", os.str());

    const std::string anchor = "multi-pulse homoclinic orbits near a super-homoclinic orbit";
    if (m.align_tangents) {
        rep.add("tangential_control", anchor, r.points.empty() && r.tangential > 0,
                {{"transversality_margin", r.transversality_margin}, {"tangential", r.tangential}});
        write_json(ctx.out_dir / "points.json", out);
        return;
    }
    int interior = 0;
    bool rejected = true;
    for (const auto& p : r.points) {
        if (p.i >= 1 && p.j >= 1 && p.angle >= 1e-3) ++interior;
        rejected = rejected && !verify_multipulse_point(m, r, p, 10.0);
    }
    rep.add("transversal_points", anchor, interior == m.i_max * m.j_max && !r.partial,
            {{"points_with_i_j_at_least_1", interior}, {"expected", m.i_max * m.j_max},
             {"all_points", r.points.size()}, {"partial", r.partial}, {"transversality_margin", r.transversality_margin}});
    rep.add("pulse_counts", "n-pulse orbits counted by returns to the stable section", r.all_verified(),
            {{"pulse_offset", r.pulse_offset}});
    rep.add("distinct_points", anchor, r.all_distinct(),
            {{"min_separation_log10", r.min_separation_log10}, {"tol_log10", r.tol_log10}});
    rep.add("hausdorff_decreasing", "curve families converge to the local invariant manifolds", r.hausdorff_decreasing(),
            {{"hausdorff_u_log10", r.hausdorff_u_log10}, {"hausdorff_s_log10", r.hausdorff_s_log10}});
    rep.add("pulses_increasing", "n-pulse orbits counted by returns to the stable section", r.pulses_increasing());
    rep.add("role_swap", "time-reversal symmetry of the construction", r.role_swap_defect_log10 <= r.tol_log10,
            {{"defect_log10", r.role_swap_defect_log10}});
    rep.add("offset_control", "plumbing", rejected, {{"offset_tols", 10}});
    rep.add("map_agreement", "plumbing", r.map_agreement <= 1e-14 && r.graph_transform_agreement <= 1e-12,
            {{"map_agreement", r.map_agreement}, {"graph_transform_agreement", r.graph_transform_agreement}});
    write_json(ctx.out_dir / "points.json", out);
}

using Command = void (*)(const Config&, const RunContext&, Report&);

const std::vector<std::pair<std::string, Command>>& commands() {
    static const std::vector<std::pair<std::string, Command>> table{
        {"integrate", cmd_integrate}, {"bvp_verify", cmd_bvp_verify}, {"coeffs", cmd_coeffs},
        {"classify", cmd_classify},   {"manifold", cmd_manifold},     {"cnlse_scan", cmd_cnlse_scan},
        {"multipulse", cmd_multipulse}};
    return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [k, v] : commands()) n.push_back(k);
        return n;
    }();
    return names;
}

int run_command(const std::string& command, const Config& config, const RunContext& ctx) {
    std::ostream* log = ctx.log;
    const auto it = std::find_if(commands().begin(), commands().end(),
                                 [&](const auto& e) { return e.first == command; });
    if (it == commands().end()) {
        if (log) *log << "config error: unknown command " << command << "\n";
        return ExitConfigError;
    }
    Report rep;
    rep.command = command;
    rep.config = config.entries();
    try {
        std::error_code ec;
        fs::create_directories(ctx.out_dir, ec);
        if (ec) raise(ErrorKind::ConfigError, "cannot create output directory " + ctx.out_dir.string());
        it->second(config, ctx, rep);
        config.check_unused();
    } catch (const Error& e) {
        const bool cfg = e.kind() == ErrorKind::ConfigError || e.kind() == ErrorKind::InvalidArgument;
        if (log) *log << (cfg ? "config error: " : "numerical failure: ") << e.what() << "\n";
        json j = rep.to_json();
        j["status"] = cfg ? "config_error" : "numerical_failure";
        j["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
        std::error_code ec;
        if (fs::is_directory(ctx.out_dir, ec)) {
            std::ofstream out(ctx.out_dir / "report.json", std::ios::binary);
            out << j.dump(2) << "\n";
        }
        return cfg ? ExitConfigError : ExitNumericalFailure;
    }
    write_json(ctx.out_dir / "report.json", rep.to_json());
    if (log) {
        for (const auto& ch : rep.checks)
            *log << (ch.passed ? "pass " : "FAIL ") << ch.name << " [" << ch.paper_anchor << "]\n";
        *log << command << ": " << (rep.passed() ? "pass" : "fail") << "\n";
    }
    return rep.passed() ? ExitPass : ExitCheckFailure;
}

}  // namespace homlab
