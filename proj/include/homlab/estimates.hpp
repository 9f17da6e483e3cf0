#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "homlab/bvp.hpp"

namespace homlab {

enum class LambdaCase { Resonant, Intermediate, Strong };  // λ1=λ2 | λ1<λ2<2λ1 | 2λ1<λ2

std::string to_string(LambdaCase c);
LambdaCase lambda_case(const SystemSpec& spec);
LambdaCase parse_lambda_case(const std::string& s);

struct BoundFit {
    std::string name;
    double fitted_M = 0.0;
    // Estimate bounds: 2 M(δ) − M(δ/2). Derivative bounds: C_allowed − fitted C.
    double margin = 0.0;
    double M_halved = 0.0;
    double exponent_fit = std::numeric_limits<double>::quiet_NaN();
    double exponent_se = std::numeric_limits<double>::quiet_NaN();
    double exponent_expected = std::numeric_limits<double>::quiet_NaN();
    bool exponent_ok = true;  // fit ≤ expected + tol |expected|
    bool sharp = false;       // additionally fit ≥ expected − tol |expected|
    bool ill_conditioned = false;
    bool passed() const { return margin >= 0.0 && exponent_ok; }
};

struct EstimateReport {
    std::string case_tag;
    double delta = 0.0;
    std::vector<BoundFit> bounds;
    double runtime_seconds = 0.0;
    bool passed() const;
};

nlohmann::json to_json(const EstimateReport& r);

struct FlowEstimateOptions {
    double delta = 0.05;
    std::vector<double> fit_taus{1.0, 3.0, 6.0, 10.0};
    std::vector<double> regression_taus{4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0};
    int time_samples = 33;
    double exponent_tol = 0.05;
    BvpOptions bvp{};
};

// Fits the constants of the flow lemma for the given case over a boundary
// grid at δ and δ/2, and regresses each residual term against τ with the
// competing terms switched off through the boundary data.
EstimateReport verify_flow_estimates(const SystemSpec& spec, LambdaCase c, const FlowEstimateOptions& opt = {});

struct DerivativeSample {
    double u10 = 0.0, v10 = 0.0;
    LocalMapJacobian jac;
    std::array<double, 4> ratio{};     // chained / leading term, order 11, 12, 21, 22
    std::array<double, 4> fd{};        // finite differences of the integrated local map
    double fd_error = 0.0;             // max relative difference chained vs fd
};

struct DerivativeEstimateOptions {
    double delta = 0.05;
    double m = 4.0;
    double eps = 1e-2;
    double ratio_constant = 5.0;  // ratios must lie in [1 − Cδ, 1 + Cδ]
    bool finite_differences = true;
    double fd_tol = 1e-6;
    BvpOptions bvp{};
};

struct DerivativeReport {
    EstimateReport report;
    std::vector<DerivativeSample> samples;
    double max_fd_error = 0.0;  // fitted_M of each bound is C at δ, M_halved is C at δ/2
    bool fd_passed = true;
    bool passed() const { return report.passed() && fd_passed; }
};

// 50 points of 𝒟2: radii (0.1, 0.3, 0.5, 0.7, 0.9) ε, five log-spaced slopes
// in [1/m, m], both quadrants.
std::vector<Vec2> d2_grid(double m, double eps);

// Throws RegionError for a grid point outside 𝒟2 and InvalidArgument unless
// 2λ1 < λ2.
DerivativeReport verify_derivative_estimates(const SystemSpec& spec, const std::vector<Vec2>& grid,
                                             const DerivativeEstimateOptions& opt = {});

// Local-map Jacobian at (u10, v10) ∈ Πs by Richardson-extrapolated central
// differences of direct integration.
Mat2 local_map_jacobian_fd(const SystemSpec& spec, double delta, double u10, double v10, double rel_step = 1e-3);

}  // namespace homlab
