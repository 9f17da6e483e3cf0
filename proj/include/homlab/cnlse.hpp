#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "homlab/global_map.hpp"
#include "homlab/system.hpp"

namespace homlab {

// Coordinates of the diagonalized stationary system. With
//   ψ1 = p u1 + q v1, ψ2 = −p u1 + q v1, φ1 = r u2 + s v2, φ2 = ω(−r u2 + s v2),
//   pq = −1/2, rs = 1/(2ω),
// the quadratic part of H is u1 v1 − ω u2 v2 for every choice of p and r.
//   Balanced: p = −q = 1/√2, r = s = 1/√(2ω); the reversing involution is the
//             plain (u, v) swap up to the Z2 sign, so b + c = 0.
//   Half:     p = 1/2, q = −1, r = 1/2, s = 1/ω; v̇1 carries E1/2 and v̇2
//             carries −ωE2/2.
enum class CnlseScaling { Balanced, Half };

std::string to_string(CnlseScaling s);

struct CnlseParams {
    double alpha = 1.0;
    double beta = 1.0;
    double omega = 3.0;
    CnlseScaling scaling = CnlseScaling::Balanced;
};

// β > 0, ω ≥ 1; with require_not_two also ω ≠ 2.
void validate(const CnlseParams& p, bool require_not_two = false);

struct CnlseCoordinates {
    double p, q, r, s;
};

CnlseCoordinates cnlse_coordinates(const CnlseParams& p);

// (ψ1, ψ2, φ1, φ2) ↔ (u1, u2, v1, v2)
State4 to_diagonal(const CnlseParams& p, const State4& psi_phi);
State4 from_diagonal(const CnlseParams& p, const State4& x);

// λ1 = 1, λ2 = ω; H is the stationary Hamiltonian in diagonal coordinates.
SystemSpec cnlse_system(const CnlseParams& p);

// Closed-form figure-eight loop κ = ±1: u1 = v1 = 0 and
//   u2 = κ K ω e^{ωx} sech²(ωx)/√β,  v2 = κ K' ω e^{−ωx} sech²(ωx)/√β
// with (K, K') = (1, ω/2) in the half scaling and (√(ω/2), √(ω/2)) balanced.
State4 explicit_homoclinic(const CnlseParams& p, int kappa, double x);
State4 explicit_homoclinic_derivative(const CnlseParams& p, int kappa, double x);

struct ExplicitSolutionReport {
    double scalar_residual = 0.0;  // max |φ'' − ω²φ + 2βφ³|
    double field_residual = 0.0;   // max ‖d/dx closed form − X‖∞ over κ = ±1
    double h_residual = 0.0;       // max |H| on the orbit
    int points = 0;
};

ExplicitSolutionReport verify_explicit_solution(const CnlseParams& p, const std::vector<double>& x_grid);

// x with v2(x) = κδ on the departing tail (x < 0), u2(x) = κδ on the arriving one.
double departure_point(const CnlseParams& p, double delta);
double arrival_point(const CnlseParams& p, double delta);

HomoclinicData cnlse_homoclinic_data(const CnlseParams& p, int kappa, double delta, const FlowOptions& flow);

struct CnlseCoefficients {
    GlobalMapCoeffs loop1, loop2;
    double symmetry_defect = 0.0;   // max |coeff1 − coeff2|
    double arrival_mismatch = 0.0;  // integrated M^s vs the closed form, both loops
    double transit_time = 0.0;
};

CnlseCoefficients compute_cnlse_coefficients(const CnlseParams& p, double delta = 0.1);

// For β = 1 the variational ψ-equation along the loop is reflectionless with
// solutions e^{±x}(1 ∓ ω tanh ωx), so the coefficients have a closed form.
Mat2 cnlse_coefficients_beta_one(const CnlseParams& p, double delta);

struct OmegaScanRow {
    double omega = 0.0;
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    double ad_minus_bc = 0.0, b_plus_c = 0.0;
    int sign_bd = 0;
    std::string scenario;  // figure-eight-manifolds | per-loop-manifolds | degenerate | trivial | failed
    std::string error;
};

struct OmegaZero {
    double omega_star = 0.0;
    double b_at_zero = 0.0;
    double bracket_width = 0.0;
    std::string scenario_below, scenario_above;
    bool b_unit() const;     // ||b| − 1| ≤ 1e-3
    bool flips() const;      // scenario differs across the zero
};

struct OmegaScan {
    double alpha = 1.0, beta = 1.0, delta = 0.1;
    double omega_lo = 2.0, omega_hi = 20.0;
    std::vector<OmegaScanRow> rows;
    std::vector<OmegaZero> zeros;
    bool extended = false;  // the range was widened once after finding no zero
    double extended_hi = 0.0;
};

struct OmegaScanOptions {
    double delta = 0.1;
    double bisection_width = 1e-4;
    double extend_to = 40.0;  // ≤ omega_hi disables the extension
};

OmegaScanRow omega_row(double alpha, double beta, double omega, double delta);

// Rows at ω_k = lo + k (hi − lo)/n, k = 1..n; zeros of d bracketed by sign
// changes and bisected. Without a zero the scan is repeated once up to extend_to.
OmegaScan scan_omega(double alpha, double beta, double omega_lo, double omega_hi, int n_points,
                     const OmegaScanOptions& opt = {});

void write_scan_csv(std::ostream& os, const OmegaScan& scan);
nlohmann::json zeros_json(const OmegaScan& scan);

}  // namespace homlab
