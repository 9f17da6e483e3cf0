#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "homlab/flow.hpp"
#include "homlab/linalg.hpp"
#include "homlab/system.hpp"

namespace homlab {

// u(0) = (u10, u20), v(τ) = (v1tau, v2tau).
struct BvpBoundary {
    double tau = 0.0;
    double u10 = 0.0;
    double u20 = 0.0;
    double v1tau = 0.0;
    double v2tau = 0.0;
    double delta = 0.0;
};

struct BvpOptions {
    double tol = -1.0;  // < 0 selects 1e-12 (1 + δ); 0 iterates to round-off
    int max_iterations = 60;
    std::size_t nodes = 128;
};

// Iterates are stored in exponentially scaled form
//   Ũ_i(t) = e^{λ_i t} u_i(t),  Ṽ_i(t) = e^{λ_i (τ − t)} v_i(t),
// which keeps every component O(δ) on [0, τ] and the residuals ξ, ζ free of
// cancellation against the leading exponentials.
class BvpSolution {
public:
    BvpBoundary boundary;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    int iterations = 0;
    double contraction_ratio = 0.0;
    std::vector<double> changes;  // scaled sup-norm change per application
    std::vector<double> t;        // nodes on [0, τ]
    std::array<std::vector<double>, 4> scaled;

    std::size_t size() const { return t.size(); }
    double lambda(std::size_t i) const { return (i % 2 == 0) ? lambda1 : lambda2; }
    State4 node(std::size_t k) const;
    State4 at(double time) const;
    // Scaled value of component c ∈ {U1, U2, V1, V2} at time.
    double scaled_at(std::size_t c, double time) const;
    // u_i(t) − e^{−λ_i t} u_i0 and v_i(t) − e^{−λ_i (τ−t)} v_iτ, i ∈ {1, 2}.
    double xi(int i, double time) const;
    double zeta(int i, double time) const;
};

BvpSolution solve_bvp(const SystemSpec& spec, const BvpBoundary& boundary, const BvpOptions& opt = {});

// Scaled sup-norm change produced by one further application of the operator.
double fixed_point_defect(const SystemSpec& spec, const BvpSolution& sol);

enum class BvpParameter { U10, U20, V1Tau, V2Tau, Tau };

// Derivative of the BVP solution in θ by successive approximation of the
// linearized operator along the frozen base solution. The result's boundary
// holds the variational boundary values (U10, U20, V1τ, V2τ).
BvpSolution solve_bvp_variational(const SystemSpec& spec, const BvpSolution& base, BvpParameter theta,
                                  const BvpOptions& opt = {});

// Passage from {u2 = u20} to {v2 = v2τ} with |u20| = |v2τ| = δ: Newton on
// (τ, v1τ) so that the BVP reproduces (v1(0), v2(0)) = (v10, v20).
struct LocalPassage {
    double tau = 0.0;
    double v1tau = 0.0;
    double u1tau = 0.0;
    int newton_iterations = 0;
    BvpSolution solution;
    BvpSolution d_tau;    // variational in τ
    BvpSolution d_v1tau;  // variational in v1τ
};

LocalPassage solve_local_passage(const SystemSpec& spec, double u10, double u20, double v10, double v20,
                                 double v2tau, const BvpOptions& opt = {});

// Partial derivatives of the local map (u10, v10) ↦ (η1, η2) = (u1τ, v1τ) on Πs,
// obtained by chaining BVP variational derivatives through the flight-time
// relations.
struct LocalMapJacobian {
    double tau = 0.0;
    double eta1 = 0.0;
    double eta2 = 0.0;
    double deta1_du10 = 0.0;
    double deta1_dv10 = 0.0;
    double deta2_du10 = 0.0;
    double deta2_dv10 = 0.0;
    double dtau_du10 = 0.0;
    double dtau_dv10 = 0.0;
    double deta2_dv1tau_raw = 0.0;  // ∂v1τ/∂v10 at frozen τ, i.e. 1/(∂v1(0)/∂v1τ)
};

LocalMapJacobian chained_local_map_derivatives(const SystemSpec& spec, const LocalPassage& passage,
                                               const BvpOptions& opt = {});

// Independent oracle: Newton on (v1(0), v2(0)) so that the forward flow from
// (u10, u20, v1(0), v2(0)) reaches (v1τ, v2τ) at t = τ, started from the
// linear solution. Returns the start state.
struct ShootingResult {
    State4 start{};
    State4 end{};
    int iterations = 0;
    double residual = 0.0;  // max |v_i(τ) − v_iτ|
};

ShootingResult shoot_bvp(const SystemSpec& spec, const BvpBoundary& boundary, const FlowOptions& flow);

}  // namespace homlab
