#include "homlab/system.hpp"

#include <cmath>

#include "homlab/error.hpp"

namespace homlab {

State4 SystemSpec::field(const State4& x) const {
    const State4 n = nonlinearity(x);
    const State4 r{-lambda1 * x[0] + n[0], -lambda2 * x[1] + n[1], lambda1 * x[2] + n[2],
                   lambda2 * x[3] + n[3]};
    if (!all_finite(r)) throw Error(ErrorKind::NonFiniteField, "field is not finite at the given state");
    return r;
}

Mat4 SystemSpec::jacobian(const State4& x) const {
    Mat4 j = nonlinear_jacobian(x);
    j[0][0] -= lambda1;
    j[1][1] -= lambda2;
    j[2][2] += lambda1;
    j[3][3] += lambda2;
    return j;
}

Mat4 SystemSpec::nonlinear_jacobian(const State4& x) const {
    Mat4 j{};
    if (nonlinearity_jacobian) {
        j = nonlinearity_jacobian(x);
    } else {
        for (std::size_t c = 0; c < 4; ++c) {
            const double step = 1e-6 * (1.0 + std::fabs(x[c]));
            State4 xp = x, xm = x;
            xp[c] += step;
            xm[c] -= step;
            const State4 fp = nonlinearity(xp), fm = nonlinearity(xm);
            for (std::size_t r = 0; r < 4; ++r) j[r][c] = (fp[r] - fm[r]) / (2.0 * step);
        }
    }
    return j;
}

State4 SystemSpec::grad_h(const State4& x) const {
    if (hamiltonian_gradient) return hamiltonian_gradient(x);
    State4 g{};
    for (std::size_t c = 0; c < 4; ++c) {
        const double step = 1e-6 * (1.0 + std::fabs(x[c]));
        State4 xp = x, xm = x;
        xp[c] += step;
        xm[c] -= step;
        g[c] = (hamiltonian(xp) - hamiltonian(xm)) / (2.0 * step);
    }
    return g;
}

State4 evaluate_field(const SystemSpec& spec, const State4& x) { return spec.field(x); }

namespace {

struct LinearModel {
    double l1, l2;
    template <class T>
    std::array<T, 4> nonlinearity(const std::array<T, 4>&) const {
        return {T(0.0), T(0.0), T(0.0), T(0.0)};
    }
    template <class T>
    T hamiltonian(const std::array<T, 4>& x) const {
        return l1 * x[0] * x[2] - l2 * x[1] * x[3];
    }
};

struct CubicModel {
    CubicParams p;

    template <class T>
    T hamiltonian(const std::array<T, 4>& x) const {
        const T& u1 = x[0];
        const T& u2 = x[1];
        const T& v1 = x[2];
        const T& v2 = x[3];
        const T i1 = u1 * v1;
        const T i2 = u2 * v2;
        return p.lambda1 * i1 - p.lambda2 * i2 + p.h3 * u2 * v1 * v1 + p.h4 * v2 * u1 * u1 +
               p.k * i1 * i2 + p.q * i2 * i2;
    }

    template <class T>
    std::array<T, 4> nonlinearity(const std::array<T, 4>& x) const {
        const T& u1 = x[0];
        const T& u2 = x[1];
        const T& v1 = x[2];
        const T& v2 = x[3];
        const T i1 = u1 * v1;
        const T i2 = u2 * v2;
        // Nonlinear parts of ∇H; the linear parts pair with the constant
        // entries J13 = −1, J24 = 1 to give the diagonal field exactly.
        const T nu1 = 2.0 * p.h4 * u1 * v2 + p.k * v1 * i2;
        const T nu2 = p.h3 * v1 * v1 + p.k * i1 * v2 + 2.0 * p.q * i2 * v2;
        const T nv1 = 2.0 * p.h3 * u2 * v1 + p.k * u1 * i2;
        const T nv2 = p.h4 * u1 * u1 + p.k * i1 * u2 + 2.0 * p.q * i2 * u2;
        const T hu1 = p.lambda1 * v1 + nu1;
        const T hu2 = -p.lambda2 * v2 + nu2;
        const T hv1 = p.lambda1 * u1 + nv1;
        const T hv2 = -p.lambda2 * u2 + nv2;
        const double r3 = p.h3 / p.lambda1;
        const double r4 = p.h4 / p.lambda1;
        // Non-constant entries of the antisymmetric J.
        const T j12 = p.s1 * u1;
        const T j14 = -r3 * v1;
        const T j23 = -r4 * u1;
        const T j24 = -p.s3 * u2;
        const T j34 = p.s2 * v1;
        return {j12 * hu2 + j14 * hv2 - nv1, -j12 * hu1 + j23 * hv1 + j24 * hv2 + nv2,
                -j23 * hu2 + j34 * hv2 + nu1, -j14 * hu1 - j24 * hu2 - j34 * hv1 - nu2};
    }
};

}  // namespace

SystemSpec linear_system(double lambda1, double lambda2) {
    if (!(lambda1 > 0.0) || !(lambda2 >= lambda1))
        raise(ErrorKind::InvalidArgument, "linear_system requires 0 < lambda1 <= lambda2");
    SystemSpec s;
    s.name = "linear";
    s.lambda1 = lambda1;
    s.lambda2 = lambda2;
    attach_model(s, LinearModel{lambda1, lambda2});
    s.profile = {true, true, true, true, true};
    return s;
}

SystemSpec cubic_system(const CubicParams& p) {
    if (!(p.lambda1 > 0.0) || !(p.lambda2 >= p.lambda1))
        raise(ErrorKind::InvalidArgument, "cubic_system requires 0 < lambda1 <= lambda2");
    const bool resonant = p.lambda1 == p.lambda2;
    const bool has_s = p.s1 != 0.0 || p.s2 != 0.0 || p.s3 != 0.0;
    if (has_s && !resonant)
        raise(ErrorKind::InvalidArgument, "cubic_system s-terms require lambda1 == lambda2");
    SystemSpec s;
    s.name = "cubic";
    s.lambda1 = p.lambda1;
    s.lambda2 = p.lambda2;
    attach_model(s, CubicModel{p});
    s.profile.resonant_form = true;
    s.profile.normal_form = !has_s;
    s.profile.strong_normal_form = !has_s;
    s.profile.symmetric_z2 = true;
    s.profile.symmetric_sigma2 = p.h3 == 0.0 && p.h4 == 0.0 && p.s3 == 0.0;
    return s;
}

SystemSpec reversed_system(const SystemSpec& spec) {
    SystemSpec r;
    r.name = spec.name + "-reversed";
    r.lambda1 = spec.lambda1;
    r.lambda2 = spec.lambda2;
    const auto n = spec.nonlinearity;
    r.nonlinearity = [n](const State4& x) {
        const State4 g = n(swap_uv(x));
        return State4{-g[2], -g[3], -g[0], -g[1]};
    };
    if (spec.nonlinearity_jacobian) {
        const auto jn = spec.nonlinearity_jacobian;
        r.nonlinearity_jacobian = [jn](const State4& x) {
            // −P J(Px) P with P the (u, v) swap.
            const Mat4 j = jn(swap_uv(x));
            static constexpr std::size_t perm[4] = {2, 3, 0, 1};
            Mat4 out{};
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t k = 0; k < 4; ++k) out[i][k] = -j[perm[i]][perm[k]];
            return out;
        };
    }
    const auto h = spec.hamiltonian;
    r.hamiltonian = [h](const State4& x) { return h(swap_uv(x)); };
    if (spec.hamiltonian_gradient) {
        const auto g = spec.hamiltonian_gradient;
        r.hamiltonian_gradient = [g](const State4& x) { return swap_uv(g(swap_uv(x))); };
    }
    r.profile = spec.profile;
    return r;
}

}  // namespace homlab
