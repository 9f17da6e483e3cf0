#include "homlab/identities.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace homlab {

namespace {

Mat4 nonlinear_jacobian(const SystemSpec& spec, const State4& x) {
    Mat4 j = spec.jacobian(x);
    j[0][0] += spec.lambda1;
    j[1][1] += spec.lambda2;
    j[2][2] -= spec.lambda1;
    j[3][3] -= spec.lambda2;
    return j;
}

// n_r(x with x[c] = 0) / x[c], or the partial derivative when x[c] = 0.
double divided_part(const SystemSpec& spec, State4 x, std::size_t row, std::size_t c) {
    if (x[c] == 0.0) return nonlinear_jacobian(spec, x)[row][c];
    return spec.nonlinearity(x)[row] / x[c];
}

// (n_r(x) − n_r(x with x[c] = 0)) / x[c], or the partial derivative at x[c] = 0.
double difference_part(const SystemSpec& spec, const State4& x, std::size_t row, std::size_t c) {
    State4 x0 = x;
    x0[c] = 0.0;
    if (x[c] == 0.0) return nonlinear_jacobian(spec, x0)[row][c];
    return (spec.nonlinearity(x)[row] - spec.nonlinearity(x0)[row]) / x[c];
}

double f11(const SystemSpec& s, State4 x) { x[U2] = 0.0; return divided_part(s, x, 0, U1); }
double f12(const SystemSpec& s, const State4& x) { return difference_part(s, x, 0, U2); }
double f21(const SystemSpec& s, State4 x) { x[U2] = 0.0; return divided_part(s, x, 1, U1); }
double f22(const SystemSpec& s, const State4& x) { return difference_part(s, x, 1, U2); }
double g11(const SystemSpec& s, State4 x) { x[V2] = 0.0; return divided_part(s, x, 2, V1); }
double g12(const SystemSpec& s, const State4& x) { return difference_part(s, x, 2, V2); }
double g21(const SystemSpec& s, State4 x) { x[V2] = 0.0; return divided_part(s, x, 3, V1); }
double g22(const SystemSpec& s, const State4& x) { return difference_part(s, x, 3, V2); }

double unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

}  // namespace

CoefficientSplit split_nonlinearity(const SystemSpec& spec, const State4& x) {
    return {f11(spec, x), f12(spec, x), f21(spec, x), f22(spec, x),
            g11(spec, x), g12(spec, x), g21(spec, x), g22(spec, x)};
}

double IdentityReport::worst() const {
    double w = std::max(max_flow_derivative_of_h, std::fabs(h_at_origin));
    for (const auto& c : checks) w = std::max(w, c.max_violation);
    return w;
}

const IdentityCheck* IdentityReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

IdentityReport check_identities(const SystemSpec& spec, int sample_count, double radius, std::uint64_t seed) {
    IdentityReport rep;
    rep.closed_form_jacobian = spec.closed_form_jacobian();
    rep.h_at_origin = spec.h({0, 0, 0, 0});
    std::mt19937_64 gen(seed);
    std::vector<State4> samples;
    for (int i = 0; i < std::max(1, sample_count); ++i) {
        State4 x{};
        for (double& c : x) c = radius * (2.0 * unit(gen) - 1.0);
        samples.push_back(x);
    }

    std::vector<IdentityCheck> checks;
    auto add = [&](const std::string& name, auto&& value) {
        IdentityCheck c{name, 0.0};
        for (const auto& x : samples) c.max_violation = std::max(c.max_violation, std::fabs(value(x)));
        checks.push_back(c);
    };
    const auto& p = spec.profile;
    if (p.resonant_form) {
        add("vanish_at_origin", [&](const State4&) { return norm_inf(spec.nonlinearity({0, 0, 0, 0})); });
        add("derivative_vanish_at_origin", [&](const State4&) {
            const Mat4 j = nonlinear_jacobian(spec, {0, 0, 0, 0});
            double m = 0.0;
            for (const auto& row : j) m = std::max(m, norm_inf(row));
            return m;
        });
    }
    if (p.normal_form) {
        add("f11(0,v)", [&](State4 x) { x[U1] = 0; return f11(spec, x); });
        add("f11(u1,0)", [&](State4 x) { x[V1] = x[V2] = 0; return f11(spec, x); });
        add("f12(u,0)", [&](State4 x) { x[V1] = x[V2] = 0; return f12(spec, x); });
        add("f21(0,v)", [&](State4 x) { x[U1] = 0; return f21(spec, x); });
        add("f22(0,v)", [&](State4 x) { x[U1] = x[U2] = 0; return f22(spec, x); });
        add("g11(u,0)", [&](State4 x) { x[V1] = 0; return g11(spec, x); });
        add("g11(0,v1)", [&](State4 x) { x[U1] = x[U2] = 0; return g11(spec, x); });
        add("g12(0,v)", [&](State4 x) { x[U1] = x[U2] = 0; return g12(spec, x); });
        add("g21(u,0)", [&](State4 x) { x[V1] = 0; return g21(spec, x); });
        add("g22(u,0)", [&](State4 x) { x[V1] = x[V2] = 0; return g22(spec, x); });
    }
    if (p.strong_normal_form) {
        add("f21=0", [&](const State4& x) { return f21(spec, x); });
        add("g21=0", [&](const State4& x) { return g21(spec, x); });
    }
    if (p.symmetric_z2) {
        add("z2_field", [&](const State4& x) {
            return norm_inf(spec.nonlinearity(sigma_z2(x)) - sigma_z2(spec.nonlinearity(x)));
        });
        add("z2_first_integral", [&](const State4& x) { return spec.h(sigma_z2(x)) - spec.h(x); });
        if (p.normal_form || p.resonant_form) {
            add("f12(0,u2,0,v2)", [&](State4 x) { x[U1] = x[V1] = 0; return f12(spec, x); });
            add("g12(0,u2,0,v2)", [&](State4 x) { x[U1] = x[V1] = 0; return g12(spec, x); });
        }
    }
    if (p.symmetric_sigma2) {
        add("sigma2_field", [&](const State4& x) {
            return norm_inf(spec.nonlinearity(sigma_2(x)) - sigma_2(spec.nonlinearity(x)));
        });
        add("sigma2_first_integral", [&](const State4& x) { return spec.h(sigma_2(x)) - spec.h(x); });
    }
    rep.checks = std::move(checks);
    for (const auto& x : samples)
        rep.max_flow_derivative_of_h =
            std::max(rep.max_flow_derivative_of_h, std::fabs(dot(spec.grad_h(x), spec.field(x))));
    return rep;
}

}  // namespace homlab
