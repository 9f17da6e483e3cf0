#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "homlab/global_map.hpp"
#include "homlab/interp.hpp"
#include "homlab/poincare.hpp"
#include "homlab/sections.hpp"

namespace homlab {

// w = v10/u10, z = sgn(v10)|v10|^α on 𝒳 = {1/m ≤ w ≤ m, |v10| ≤ ε2}.
struct WZChart {
    double alpha = 0.2;
    double m = 4.0;
    double eps2 = 2.4e-3;

    Vec2 to_wz(const Vec2& p) const;    // throws ChartError when u10 = 0
    Vec2 from_wz(const Vec2& wz) const;
    double z_max() const { return std::pow(eps2, alpha); }
};

double default_chart_alpha(double gamma);  // min{4γ, 1 − 2γ}/2

// A map in cross-form: (w, z̄) ↦ (w̄, z) = (F(w, z̄), G(w, z̄)).
class CrossMap {
public:
    virtual ~CrossMap() = default;
    virtual Vec2 cross(double w, double zbar) const = 0;
};

class FunctionCrossMap final : public CrossMap {
public:
    explicit FunctionCrossMap(std::function<Vec2(double, double)> fg) : fg_(std::move(fg)) {}
    Vec2 cross(double w, double zbar) const override { return fg_(w, zbar); }

private:
    std::function<Vec2(double, double)> fg_;
};

// Cross-form of a planar map 𝒯(w, z) = (f, g) that preserves or flips the
// half-axes of z. G inverts g(w, ·) per half-axis by a safeguarded secant
// iteration on log|z| (exponent hint p: |g| ~ |z|^p), then two Newton steps.
// On z̄ = 0 the extension value (w_star, 0) is returned.
class PlanarCrossMap final : public CrossMap {
public:
    PlanarCrossMap(std::function<Vec2(const Vec2&)> map, double w_star, double z_max, double exponent_hint);
    Vec2 cross(double w, double zbar) const override;
    Vec2 apply(const Vec2& wz) const { return map_(wz); }
    double G(double w, double zbar) const;
    double w_star() const { return w_star_; }

private:
    std::function<Vec2(const Vec2&)> map_;
    double w_star_;
    double z_max_;
    double p_;
};

// 𝒯 = to_wz ∘ T ∘ from_wz for a Poincaré map on Πs.
std::shared_ptr<PlanarCrossMap> poincare_cross_map(std::shared_ptr<const PoincareMap> T, const WZChart& chart,
                                                   double gamma);

// Synthetic model: w̄ = w_star, z̄ = C sgn(z)|z|^{1−2γ}.
std::shared_ptr<PlanarCrossMap> model_cross_map(double w_star, double C, double gamma, double z_max);

struct CrossBounds {
    double Fw = 0.0, Fz = 0.0, Gw = 0.0, Gz = 0.0;  // sup norms over the rectangle
    double sup_FwGz = 0.0;                          // sup of the pointwise product
    double condition1 = 0.0;  // √sup(|F_w||G_z̄|) + √(‖F_z̄‖‖G_w‖)
    double condition2 = 0.0;  // ‖F_w‖ + √(‖F_z̄‖‖G_w‖)
    double lipschitz = 0.0;   // √(‖F_z̄‖/‖G_w‖)
    bool maps_into = true;    // F stays in [1/m, m] and |G| ≤ θ on the samples
    bool contractive() const { return condition1 < 1.0 && condition2 < 1.0 && maps_into; }
};

// Central differences on a 5 × 8 sample of [1/m, m] × ([−θ, θ] \ {0}).
CrossBounds measure_cross_bounds(const CrossMap& cross, double m, double theta);

// Cross-form of T2 ∘ T1 for T1: X1×Y1 → X2×Y2 and T2: X2×Y2 → X1×Y1, with the
// intermediate ȳ found by the contraction ȳ = q2(p1(x, ȳ), ŷ).
class ComposedCrossMap final : public CrossMap {
public:
    // Throws NotComposable unless K1 K2 < 1.
    ComposedCrossMap(std::shared_ptr<const CrossMap> first, std::shared_ptr<const CrossMap> second, double K1,
                     double K2);
    Vec2 cross(double x, double yhat) const override;
    // √(K1 K2)/(1 − √(K1 K2)) in the norm max{√K1|x|, √K2|y|}.
    double derivative_bound() const;
    double K1() const { return k1_; }
    double K2() const { return k2_; }

private:
    std::shared_ptr<const CrossMap> first_, second_;
    double k1_, k2_;
};

struct ManifoldCurve {
    std::vector<double> z;  // ascending on [−θ, θ], denser near ±θ, z[center] = 0
    std::vector<double> w;
    double theta = 0.0;
    double w_star = 0.0;
    double lipschitz = 0.0;  // max chord slope over neighbouring samples
    int iterations = 0;
    std::vector<double> changes;  // sup change per graph-transform application
    double contraction_ratio = 0.0;

    double eval(double zq) const;
    std::size_t center() const { return z.size() / 2; }
};

struct GraphTransformOptions {
    int samples = 1025;
    double tol = 1e-12;
    int max_iterations = 200;
    int window = 10;  // no decrease over this many applications → NoContraction
};

// One application: the graph of h is replaced by the graph of its image.
std::vector<double> graph_transform_step(const CrossMap& cross, const std::vector<double>& z,
                                         const std::vector<double>& h, double w_star);

// Iterates from h ≡ w_star, or from seed when given.
ManifoldCurve graph_transform_fixed_point(const CrossMap& cross, double theta, double w_star,
                                          const GraphTransformOptions& opt = {},
                                          const std::vector<double>* seed = nullptr);

struct ManifoldOptions {
    double gamma = 0.3;
    double m = 4.0;
    double eps = 1e-2;
    double alpha = 0.0;  // 0 selects the default chart exponent
    int max_halvings = 20;
    // false: with bd <= 0 run the construction anyway and let it fail on the
    // measured contraction conditions
    bool sign_precheck = true;
    GraphTransformOptions transform{};
};

struct ManifoldResult {
    WZChart chart;
    double theta = 0.0;
    int halvings = 0;
    CrossBounds bounds;
    ManifoldCurve curve;
    std::shared_ptr<PlanarCrossMap> cross;
    std::shared_ptr<const PoincareMap> map;
    // Unstable: Πs points of the curve. Stable: the curve lives on the swapped
    // Πu chart and is carried to Πs by the global map.
    std::vector<Vec2> points;
    bool stable = false;
};

// W^u_loc(Γ) ∩ Πs as the fixed graph of the cross-map on 𝒟2. Requires
// 2λ1 < λ2 and bd > 0; θ halves from ε2^α until the contraction conditions hold.
ManifoldResult build_unstable_curve(std::shared_ptr<const PoincareMap> T, const ManifoldOptions& opt = {});

// W^s_loc(Γ) ∩ Πs through the time-reversed, (u, v)-swapped construction.
// Requires cd < 0. local_reversed must be the local map of reversed_system(spec).
ManifoldResult build_stable_curve(std::shared_ptr<const LocalMap> local_reversed,
                                  std::shared_ptr<const GlobalMap> global, const PoincareOptions& popt,
                                  const ManifoldOptions& opt = {});

struct ManifoldVerification {
    double invariance_residual = 0.0;  // max |w̄ − h(z̄)| over forward images
    int invariance_samples = 0;
    bool backward_monotone = true;     // preimages shrink toward M^s
    std::vector<double> backward_norms;
    std::vector<double> seed_distances;  // sup distance of iterated seed to the curve
    std::vector<double> seed_ratios;
    double tangency_slope = 0.0;  // w on the curve at z = θ/100
    double tangency_error = 0.0;  // |tangency_slope − w_star|
    double theta_final = 0.0;
    double alpha_chart = 0.0;
};

ManifoldVerification verify_manifold(const ManifoldResult& r, int n_iter = 10);

nlohmann::json to_json(const ManifoldVerification& v);

// Joint unstable curve of Γ1 ∪ Γ2 for the alternating route
// Πs1 ⊃ 𝔻₂¹ → Πu2 → Πs2 ⊃ 𝔻₂² → Πu1 → Πs1. Both charts are reflected,
// w = −v1/u1, so the sectors u1 v1 < 0 become the usual rectangle.
struct FigureEightManifold {
    WZChart chart;  // shared by Πs1 and Πs2
    double theta = 0.0;
    int halvings = 0;
    CrossBounds bounds12, bounds21;  // one-crossing cross-forms
    double K1 = 0.0, K2 = 0.0;       // max partial derivative of each
    double composed_bound = 0.0;     // √(K1K2)/(1 − √(K1K2))
    CrossBounds composed;            // measured on the composition
    ManifoldCurve curve;             // on Πs1, reflected chart
    std::shared_ptr<ComposedCrossMap> cross;
    std::vector<Vec2> points;        // Πs1 coordinates
};

// θ halves until the composition bound is below 1 and the measured composed
// cross-map passes the contraction conditions. Requires b_i d_i < 0 for both loops (otherwise the route leaves 𝔻₂ and
// DomainExit is raised unless sign_precheck is off).
FigureEightManifold build_figure_eight_unstable(std::shared_ptr<const FigureEightMap> map,
                                                const ManifoldOptions& opt = {});

// Per-loop curves W^u_loc(Γi) ∩ 𝒟₂ⁱ from the single-loop maps Πs_i → Πu_i → Πs_i.
std::array<ManifoldResult, 2> per_loop_unstable_curves(std::shared_ptr<const LocalMap> local,
                                                       std::shared_ptr<const GlobalMap> global1,
                                                       std::shared_ptr<const GlobalMap> global2,
                                                       const PoincareOptions& popt, const ManifoldOptions& opt = {});

struct AlternationReport {
    std::vector<SectionKind> sections;  // forward orbit p0, p1, … of a curve point
    std::vector<double> norms;
    std::vector<Region> regions;
    double max_curve_distance = 0.0;  // |w − h(z)| at the Πs1 members
    // Πs1, Πs2, Πs1, …, every member in 𝔻₂ and norms increasing, so the
    // backward orbit of the last member alternates while shrinking to M^s
    bool alternates = false;
};

// Follows a curve point close to M^s forward until it leaves the ε-ball. The
// orbit is recorded forward because T⁻¹ near M^s loses the u-component to
// cancellation; read in reverse it is the backward orbit.
AlternationReport track_alternation(const FigureEightMap& map, const FigureEightManifold& r, double z0 = 1e-12,
                                    int max_steps = 12);

enum class ManifoldVerdict { Trivial, Curve };
enum class GammaCase { Resonant, GammaGtHalf, GammaLtHalf };

std::string to_string(ManifoldVerdict v);
std::string to_string(GammaCase g);

struct Classification {
    GammaCase gamma_case = GammaCase::Resonant;
    ManifoldVerdict s_manifold = ManifoldVerdict::Trivial;
    ManifoldVerdict u_manifold = ManifoldVerdict::Trivial;
    bool figure_eight = false;
    // Figure-eight only: verdicts of the individual loops.
    ManifoldVerdict s_loop1 = ManifoldVerdict::Trivial, s_loop2 = ManifoldVerdict::Trivial;
    ManifoldVerdict u_loop1 = ManifoldVerdict::Trivial, u_loop2 = ManifoldVerdict::Trivial;
};

// Throws DegenerateCoefficients when b, c or d vanishes.
Classification classify_homoclinic(double gamma, double b, double c, double d);
Classification classify_figure_eight(double gamma, double b1, double c1, double d1, double b2, double c2,
                                     double d2);

nlohmann::json to_json(const Classification& c);

void write_curve_csv(const std::string& path, const ManifoldResult& r);

}  // namespace homlab
