#pragma once

#include <functional>
#include <memory>
#include <string>

#include "homlab/dual.hpp"
#include "homlab/linalg.hpp"

namespace homlab {

// Structural claims a system makes; check_identities tests exactly these.
struct IdentityProfile {
    bool resonant_form = false;     // F, G vanish at O only
    bool normal_form = false;       // the f_ij, g_ij vanishing identities
    bool strong_normal_form = false;  // additionally f21 = g21 = 0
    bool symmetric_z2 = false;      // (u1, v1) -> (-u1, -v1)
    bool symmetric_sigma2 = false;  // (u2, v2) -> (-u2, -v2)
};

struct SystemSpec {
    std::string name;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    // Returns (F1, F2, G1, G2); the field is the diagonal linear part plus these.
    std::function<State4(const State4&)> nonlinearity;
    // Empty means central differences with step 1e-6 (1 + |x|).
    std::function<Mat4(const State4&)> nonlinearity_jacobian;
    std::function<double(const State4&)> hamiltonian;
    std::function<State4(const State4&)> hamiltonian_gradient;
    IdentityProfile profile;

    double gamma() const { return lambda1 / lambda2; }
    bool closed_form_jacobian() const { return static_cast<bool>(nonlinearity_jacobian); }

    State4 field(const State4& x) const;
    Mat4 jacobian(const State4& x) const;
    // Jacobian of (F1, F2, G1, G2) alone.
    Mat4 nonlinear_jacobian(const State4& x) const;
    double h(const State4& x) const { return hamiltonian(x); }
    State4 grad_h(const State4& x) const;
};

using SpecPtr = std::shared_ptr<const SystemSpec>;

State4 evaluate_field(const SystemSpec& spec, const State4& x);

// Wraps a model exposing templated nonlinearity<T> and hamiltonian<T> so that
// Jacobian and gradient come from forward-mode differentiation.
template <class Model>
void attach_model(SystemSpec& spec, Model model) {
    spec.nonlinearity = [model](const State4& x) {
        const auto r = model.template nonlinearity<double>({x[0], x[1], x[2], x[3]});
        return State4{r[0], r[1], r[2], r[3]};
    };
    spec.nonlinearity_jacobian = [model](const State4& x) {
        using D = Dual<4>;
        const std::array<D, 4> xd{D::variable(x[0], 0), D::variable(x[1], 1), D::variable(x[2], 2),
                                  D::variable(x[3], 3)};
        const auto r = model.template nonlinearity<D>(xd);
        Mat4 j{};
        for (std::size_t i = 0; i < 4; ++i) j[i] = r[i].d;
        return j;
    };
    spec.hamiltonian = [model](const State4& x) {
        return model.template hamiltonian<double>({x[0], x[1], x[2], x[3]});
    };
    spec.hamiltonian_gradient = [model](const State4& x) {
        using D = Dual<4>;
        const std::array<D, 4> xd{D::variable(x[0], 0), D::variable(x[1], 1), D::variable(x[2], 2),
                                  D::variable(x[3], 3)};
        return model.template hamiltonian<D>(xd).d;
    };
}

// H = λ1 u1 v1 − λ2 u2 v2 with zero nonlinearity.
SystemSpec linear_system(double lambda1, double lambda2);

// Polynomial test family. The field is J(x)∇H with J antisymmetric, so H is
// conserved exactly:
//   H = λ1 u1 v1 − λ2 u2 v2 + h3 u2 v1² + h4 v2 u1² + k I1 I2 + q I2²,
//   I1 = u1 v1, I2 = u2 v2.
// The s-terms perturb J away from normal form and are accepted only when
// λ1 = λ2, where the resonant form imposes no vanishing identities.
struct CubicParams {
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double h3 = 0.8;
    double h4 = -0.6;
    double k = 0.5;
    double q = 0.3;
    double s1 = 0.0;
    double s2 = 0.0;
    double s3 = 0.0;
};

SystemSpec cubic_system(const CubicParams& p);

// Time-reversed, (u, v)-swapped copy: x' = P x, X'(x') = −P X(P x'). Stable
// objects of the original are unstable objects of the copy.
SystemSpec reversed_system(const SystemSpec& spec);

// (u1, u2, v1, v2) -> (v1, v2, u1, u2)
inline State4 swap_uv(const State4& x) { return {x[2], x[3], x[0], x[1]}; }

}  // namespace homlab
