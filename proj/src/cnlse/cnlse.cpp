#include "homlab/cnlse.hpp"

#include <cmath>
#include <memory>

#include "homlab/error.hpp"
#include "homlab/io.hpp"

namespace homlab {

std::string to_string(CnlseScaling s) { return s == CnlseScaling::Half ? "half" : "balanced"; }

void validate(const CnlseParams& p, bool require_not_two) {
    if (!(p.beta > 0.0)) raise(ErrorKind::InvalidArgument, "cnlse needs beta > 0");
    if (!(p.omega >= 1.0) || !std::isfinite(p.omega))
        raise(ErrorKind::InvalidArgument, "cnlse needs omega >= 1 (omega1 = 1 is the slower rate)");
    if (!std::isfinite(p.alpha)) raise(ErrorKind::InvalidArgument, "cnlse alpha must be finite");
    if (require_not_two && p.omega == 2.0)
        raise(ErrorKind::InvalidArgument, "omega = 2 is the excluded 2 lambda1 = lambda2 resonance");
}

CnlseCoordinates cnlse_coordinates(const CnlseParams& p) {
    if (p.scaling == CnlseScaling::Half) return {0.5, -1.0, 0.5, 1.0 / p.omega};
    const double h = std::sqrt(0.5), r = 1.0 / std::sqrt(2.0 * p.omega);
    return {h, -h, r, r};
}

State4 to_diagonal(const CnlseParams& p, const State4& y) {
    const auto [cp, cq, cr, cs] = cnlse_coordinates(p);
    const double w = p.omega;
    return {(y[0] - y[1]) / (2.0 * cp), (y[2] - y[3] / w) / (2.0 * cr), (y[0] + y[1]) / (2.0 * cq),
            (y[2] + y[3] / w) / (2.0 * cs)};
}

State4 from_diagonal(const CnlseParams& p, const State4& x) {
    const auto [cp, cq, cr, cs] = cnlse_coordinates(p);
    const double w = p.omega;
    return {cp * x[0] + cq * x[2], -cp * x[0] + cq * x[2], cr * x[1] + cs * x[3], w * (-cr * x[1] + cs * x[3])};
}

namespace {

struct CnlseModel {
    double alpha, beta, omega;
    CnlseCoordinates k;

    template <class T>
    std::array<T, 4> nonlinearity(const std::array<T, 4>& x) const {
        const T psi = k.p * x[0] + k.q * x[2];
        const T phi = k.r * x[1] + k.s * x[3];
        const T n1 = 2.0 * (alpha * psi * psi + phi * phi) * psi;
        const T n2 = 2.0 * (psi * psi + beta * phi * phi) * phi;
        // ψ̇2 = ψ1 − n1 and φ̇2 = ω²φ1 − n2 split along the eigenvectors
        return {n1 / (2.0 * k.p), n2 / (2.0 * omega * k.r), -n1 / (2.0 * k.q), -n2 / (2.0 * omega * k.s)};
    }

    // Quadratic part written in the diagonal variables so that it carries no
    // cancellation: ½(ψ2² − ψ1² + φ2² − ω²φ1²) = u1v1 − ω u2v2.
    template <class T>
    T hamiltonian(const std::array<T, 4>& x) const {
        const T psi1 = k.p * x[0] + k.q * x[2];
        const T phi1 = k.r * x[1] + k.s * x[3];
        const T s1 = psi1 * psi1, s2 = phi1 * phi1;
        return x[0] * x[2] - omega * x[1] * x[3] + 0.5 * (alpha * s1 * s1 + 2.0 * s1 * s2 + beta * s2 * s2);
    }
};

// e^{ξ} sech²ξ, evaluated without overflow on either tail
double exp_sech2(double xi) {
    if (xi <= 0.0) {
        const double y = std::exp(xi);
        return 4.0 * y * y * y / ((1.0 + y * y) * (1.0 + y * y));
    }
    const double z = std::exp(-xi);
    return 4.0 * z / ((1.0 + z * z) * (1.0 + z * z));
}

// The two amplitudes multiplying e^{±ωx} sech²(ωx)/√β in u2 and v2.
Vec2 amplitudes(const CnlseParams& p) {
    const auto k = cnlse_coordinates(p);
    return {p.omega / (2.0 * k.r * std::sqrt(p.beta)), p.omega / (2.0 * k.s * std::sqrt(p.beta))};
}

// ξ < 0 with e^{−ξ} sech²ξ = t, i.e. 4y/(1 + y²)² = t for y = e^{ξ} < 1/√3.
double tail_root(double t) {
    if (!(t > 0.0) || !(t < 9.0 / (4.0 * std::sqrt(3.0))))
        raise(ErrorKind::InvalidArgument, "section level is not reached on the homoclinic tail; reduce delta");
    double xi = std::log(t / 4.0);
    for (int it = 0; it < 60; ++it) {
        const double e2 = std::exp(2.0 * xi);
        const double h = std::log(4.0) + xi - 2.0 * std::log1p(e2) - std::log(t);
        const double dh = 1.0 - 4.0 * e2 / (1.0 + e2);
        const double step = h / dh;
        xi -= step;
        if (std::fabs(step) <= 1e-15 * std::max(1.0, std::fabs(xi))) break;
    }
    if (!(std::exp(2.0 * xi) < 1.0 / 3.0)) raise(ErrorKind::InvalidArgument, "tail root left the monotone branch");
    return xi;
}

}  // namespace

SystemSpec cnlse_system(const CnlseParams& p) {
    validate(p);
    SystemSpec s;
    s.name = "cnlse";
    s.lambda1 = 1.0;
    s.lambda2 = p.omega;
    attach_model(s, CnlseModel{p.alpha, p.beta, p.omega, cnlse_coordinates(p)});
    s.profile.symmetric_z2 = true;
    s.profile.symmetric_sigma2 = true;
    return s;
}

State4 explicit_homoclinic(const CnlseParams& p, int kappa, double x) {
    validate(p);
    if (kappa != 1 && kappa != -1) raise(ErrorKind::InvalidArgument, "kappa must be +1 or -1");
    const Vec2 amp = amplitudes(p);
    const double xi = p.omega * x;
    return {0.0, kappa * amp[0] * exp_sech2(xi), 0.0, kappa * amp[1] * exp_sech2(-xi)};
}

State4 explicit_homoclinic_derivative(const CnlseParams& p, int kappa, double x) {
    const State4 h = explicit_homoclinic(p, kappa, x);
    const double th = std::tanh(p.omega * x);
    return {0.0, p.omega * h[1] * (1.0 - 2.0 * th), 0.0, -p.omega * h[3] * (1.0 + 2.0 * th)};
}

ExplicitSolutionReport verify_explicit_solution(const CnlseParams& p, const std::vector<double>& x_grid) {
    const SystemSpec spec = cnlse_system(p);
    ExplicitSolutionReport r;
    const double w = p.omega, sb = std::sqrt(p.beta);
    for (double x : x_grid) {
        const double sech = 1.0 / std::cosh(w * x), th = std::tanh(w * x);
        const double phi = w * sech / sb;
        const double phi_xx = w * w * w * (sech - 2.0 * sech * sech * sech) / sb;
        r.scalar_residual = std::max(r.scalar_residual, std::fabs(phi_xx - w * w * phi + 2.0 * p.beta * phi * phi * phi));
        (void)th;
        for (int kappa : {1, -1}) {
            const State4 h = explicit_homoclinic(p, kappa, x);
            const State4 dh = explicit_homoclinic_derivative(p, kappa, x);
            r.field_residual = std::max(r.field_residual, norm_inf(dh - spec.field(h)));
            r.h_residual = std::max(r.h_residual, std::fabs(spec.h(h)));
        }
        ++r.points;
    }
    return r;
}

double departure_point(const CnlseParams& p, double delta) {
    validate(p);
    const Vec2 amp = amplitudes(p);
    return tail_root(delta / amp[1]) / p.omega;
}

double arrival_point(const CnlseParams& p, double delta) {
    validate(p);
    const Vec2 amp = amplitudes(p);
    return -tail_root(delta / amp[0]) / p.omega;
}

HomoclinicData cnlse_homoclinic_data(const CnlseParams& p, int kappa, double delta, const FlowOptions& flow) {
    auto spec = std::make_shared<const SystemSpec>(cnlse_system(p));
    const SectionChart uc{kappa > 0 ? SectionKind::Pu1 : SectionKind::Pu2, delta};
    const SectionChart sc{kappa > 0 ? SectionKind::Ps1 : SectionKind::Ps2, delta};
    State4 mu = explicit_homoclinic(p, kappa, departure_point(p, delta));
    mu[V2] = uc.value();
    return build_homoclinic_data(spec, uc, sc, mu, 0.25, flow);
}

CnlseCoefficients compute_cnlse_coefficients(const CnlseParams& p, double delta) {
    validate(p);
    FlowOptions flow;
    flow.step.rtol = 1e-12;
    flow.step.atol = 1e-14;
    CnlseCoefficients out;
    const double xs = arrival_point(p, delta);
    out.transit_time = xs - departure_point(p, delta);
    for (int kappa : {1, -1}) {
        auto data = std::make_shared<const HomoclinicData>(cnlse_homoclinic_data(p, kappa, delta, flow));
        const State4 ms = explicit_homoclinic(p, kappa, xs);
        out.arrival_mismatch = std::max(out.arrival_mismatch, norm_inf(data->ms - ms));
        const FlowGlobalMap g(data);
        (kappa > 0 ? out.loop1 : out.loop2) = global_map_coefficients(g);
    }
    out.symmetry_defect = std::max({std::fabs(out.loop1.a - out.loop2.a), std::fabs(out.loop1.b - out.loop2.b),
                                    std::fabs(out.loop1.c - out.loop2.c), std::fabs(out.loop1.d - out.loop2.d)});
    return out;
}

Mat2 cnlse_coefficients_beta_one(const CnlseParams& p, double delta) {
    validate(p);
    if (p.beta != 1.0) raise(ErrorKind::InvalidArgument, "the reflectionless closed form needs beta = 1");
    const double w = p.omega;
    auto fundamental = [w](double x) {
        const double th = std::tanh(w * x), s2 = 1.0 - th * th;
        const double ep = std::exp(x), em = std::exp(-x);
        return Mat2{{{ep * (1.0 - w * th), em * (1.0 + w * th)},
                     {ep * (1.0 - w * th - w * w * s2), em * (-1.0 - w * th + w * w * s2)}}};
    };
    auto mul2 = [](const Mat2& a, const Mat2& b) {
        Mat2 r{};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        return r;
    };
    const auto k = cnlse_coordinates(p);
    const Mat2 S{{{k.p, k.q}, {-k.p, k.q}}};
    const Mat2 transfer = mul2(fundamental(arrival_point(p, delta)), inverse(fundamental(departure_point(p, delta))));
    return mul2(inverse(S), mul2(transfer, S));
}

bool OmegaZero::b_unit() const { return std::fabs(std::fabs(b_at_zero) - 1.0) <= 1e-3; }
bool OmegaZero::flips() const { return scenario_below != scenario_above; }

namespace {

int sign_with_floor(double x, double floor) { return std::fabs(x) < floor ? 0 : (x > 0.0 ? 1 : -1); }

std::string scenario_for(double omega, int sign_bd) {
    if (omega < 2.0) return "trivial";
    if (sign_bd == 0) return "degenerate";
    return sign_bd < 0 ? "figure-eight-manifolds" : "per-loop-manifolds";
}

}  // namespace

OmegaScanRow omega_row(double alpha, double beta, double omega, double delta) {
    OmegaScanRow row;
    row.omega = omega;
    try {
        CnlseParams p{alpha, beta, omega, CnlseScaling::Balanced};
        validate(p, true);
        const CnlseCoefficients c = compute_cnlse_coefficients(p, delta);
        row.a = c.loop1.a;
        row.b = c.loop1.b;
        row.c = c.loop1.c;
        row.d = c.loop1.d;
        row.ad_minus_bc = c.loop1.ad_minus_bc;
        row.b_plus_c = c.loop1.b_plus_c;
        row.sign_bd = sign_with_floor(row.b, 1e-8) * sign_with_floor(row.d, 1e-8);
        row.scenario = scenario_for(omega, row.sign_bd);
    } catch (const Error& e) {
        row.scenario = "failed";
        row.error = e.what();
    }
    return row;
}

namespace {

void scan_rows(OmegaScan& s, double lo, double hi, int n, double delta) {
    for (int k = 1; k <= n; ++k) s.rows.push_back(omega_row(s.alpha, s.beta, lo + (hi - lo) * k / n, delta));
}

void find_zeros(OmegaScan& s, std::size_t from, const OmegaScanOptions& opt) {
    for (std::size_t i = std::max<std::size_t>(from, 1); i < s.rows.size(); ++i) {
        const OmegaScanRow &l = s.rows[i - 1], &r = s.rows[i];
        if (l.scenario == "failed" || r.scenario == "failed" || l.omega < 2.0) continue;
        if (!(l.d * r.d < 0.0)) continue;
        double a = l.omega, b = r.omega, da = l.d;
        OmegaScanRow mid;
        while (b - a > opt.bisection_width) {
            const double m = 0.5 * (a + b);
            mid = omega_row(s.alpha, s.beta, m, opt.delta);
            if (mid.scenario == "failed") break;
            if ((mid.d < 0.0) == (da < 0.0)) {
                a = m;
                da = mid.d;
            } else {
                b = m;
            }
        }
        OmegaZero z;
        z.omega_star = 0.5 * (a + b);
        z.bracket_width = b - a;
        z.b_at_zero = omega_row(s.alpha, s.beta, z.omega_star, opt.delta).b;
        z.scenario_below = l.scenario;
        z.scenario_above = r.scenario;
        s.zeros.push_back(z);
    }
}

}  // namespace

OmegaScan scan_omega(double alpha, double beta, double omega_lo, double omega_hi, int n_points,
                     const OmegaScanOptions& opt) {
    if (!(omega_hi > omega_lo) || n_points < 2) raise(ErrorKind::InvalidArgument, "scan needs lo < hi and n >= 2");
    OmegaScan s;
    s.alpha = alpha;
    s.beta = beta;
    s.delta = opt.delta;
    s.omega_lo = omega_lo;
    s.omega_hi = omega_hi;
    scan_rows(s, omega_lo, omega_hi, n_points, opt.delta);
    find_zeros(s, 0, opt);
    if (s.zeros.empty() && opt.extend_to > omega_hi) {
        const double step = (omega_hi - omega_lo) / n_points;
        const int n_ext = std::max(1, static_cast<int>(std::lround((opt.extend_to - omega_hi) / step)));
        const std::size_t first = s.rows.size();
        scan_rows(s, omega_hi, opt.extend_to, n_ext, opt.delta);
        find_zeros(s, first, opt);
        s.extended = true;
        s.extended_hi = opt.extend_to;
    }
    return s;
}

void write_scan_csv(std::ostream& os, const OmegaScan& scan) {
    os << "omega,a,b,c,d,ad_minus_bc,b_plus_c,sign_bd,scenario\n";
    for (const auto& r : scan.rows)
        os << format_double(r.omega) << ',' << format_double(r.a) << ',' << format_double(r.b) << ','
           << format_double(r.c) << ',' << format_double(r.d) << ',' << format_double(r.ad_minus_bc) << ','
           << format_double(r.b_plus_c) << ',' << r.sign_bd << ',' << r.scenario << '\n';
}

nlohmann::json zeros_json(const OmegaScan& scan) {
    nlohmann::json zs = nlohmann::json::array();
    for (const auto& z : scan.zeros)
        zs.push_back({{"omega_star", z.omega_star},
                      {"b_at_zero", z.b_at_zero},
                      {"bracket_width", z.bracket_width},
                      {"b_unit", z.b_unit()},
                      {"scenario_flip", z.flips()}});
    const double hi = scan.extended ? scan.extended_hi : scan.omega_hi;
    return {{"zeros", zs},
            {"none_in_range", scan.zeros.empty()},
            {"range", {scan.omega_lo, hi}},
            {"extended", scan.extended},
            {"alpha", scan.alpha},
            {"beta", scan.beta},
            {"delta", scan.delta}};
}

}  // namespace homlab
