#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "homlab/linalg.hpp"

namespace homlab {

// Ordered samples on Πs. params holds the generating seed parameter of each
// sample (log σ for unstable families, log τ for stable ones) when known.
struct PlanarCurve {
    std::vector<Vec2> samples;
    std::vector<double> params;
    std::string tag;  // "Lu3", "Ls2", "mu1", "seed", ...

    double length() const;
};

struct CurveWindow {
    Vec2 center{};
    double radius = 0.0;
    bool punctured = false;  // the center itself is excluded

    bool contains(const Vec2& p) const;
};

// n samples at uniform arc length along the polyline; params follow linearly.
PlanarCurve resample_uniform(const PlanarCurve& c, std::size_t n);

// Pointwise image restricted to the window, longest contiguous run kept and
// resampled to the input sample count. Samples the map rejects are dropped.
// Throws EmptyCurve when nothing remains.
PlanarCurve iterate_curve(const std::function<Vec2(const Vec2&)>& map, const PlanarCurve& curve,
                          const CurveWindow& window);

struct CurveIntersection {
    Vec2 point{};
    double angle = 0.0;  // in [0, π/2]
    bool tangential = false;  // angle < 1e-3
    std::size_t seg1 = 0, seg2 = 0;
    double t1 = 0.0, t2 = 0.0;  // position inside the segments
};

// Segment-pair sweep on orientation sign changes, refined by bisection along
// the first segment until the signed distance to the second is below tol.
std::vector<CurveIntersection> curve_intersections(const PlanarCurve& a, const PlanarCurve& b, double tol = 1e-14);

// Symmetric vertex-to-polyline Hausdorff distance.
double hausdorff_distance(const PlanarCurve& a, const PlanarCurve& b);

// Synthetic super-homoclinic setting: closed-form normal-form local passage
// (λ1 = γ, λ2 = 1), affine global map A, and T_S(x) = q^s + R(rotation)(x − q^u)
// between balls of radius ball_fraction·|q| centred on the fixed curves.
// Everything runs in 600-digit arithmetic: the curve families converge
// superexponentially and neighbouring members differ far below double resolution.
struct SyntheticMultipulseConfig {
    double gamma = 0.3;
    double delta = 0.1;
    double eps = 0.1;    // ℬ_ε on Πs
    double eps_u = 0.5;  // admissible radius on Πu
    Mat2 A{{{1.0, 1.0}, {-1.0, 1.0}}};
    double radius_u = 0.06;  // |q^u|
    double radius_s = 0.06;  // |q^s|
    double ball_fraction = 0.2;
    double rotation_degrees = 90.0;
    // Negative control: choose the rotation that carries the unstable tangent
    // at q^u onto the stable tangent at q^s.
    bool align_tangents = false;
    int i_max = 5;
    int j_max = 5;
    int reference_extra = 2;  // fixed curves are represented by L_{k_max + reference_extra}
    int window_samples = 33;
    int hausdorff_samples = 9;
};

struct PulsePoint {
    int i = 0, j = 0;
    Vec2 p{};                    // rounded to double
    std::string u1_text, v1_text;  // full working precision
    double angle = 0.0;          // crossing angle of m^u_i and l^s_j
    int n_forward = -1;          // Πs returns until the orbit lies on W^s_loc(O)
    int n_backward = -1;         // backward returns until it lies on W^u_loc(O)
    int pulses = 0;              // n_forward + n_backward + pulse offset
    bool verified = false;
    double residual_log10 = 0.0;
    double separation_log10 = 0.0;  // to the nearest other point
    std::string escape;             // why orbit tracking stopped early
};

struct MultipulseResult {
    int working_digits = 0;
    int pulse_offset = 2;
    double tol_log10 = 0.0;  // point tolerance
    Vec2 q_u{}, q_s{};
    // Full-precision T_S data, so that orbit tracking reuses the exact transfer map.
    std::string q_u_text[2], q_s_text[2], rotation_text;
    double ball_u = 0.0, ball_s = 0.0;
    double transversality_margin = 0.0;  // |sin| of the angle between T_S(T W^u) and T W^s at q^s
    double map_agreement = 0.0;          // high-precision T vs the double PoincareMap on samples
    double graph_transform_agreement = 0.0;  // reference unstable curve vs the graph-transform curve
    double role_swap_defect_log10 = 0.0;
    std::vector<PulsePoint> points;
    std::vector<double> hausdorff_u_log10;  // k = 0..i_max against the reference curve
    std::vector<double> hausdorff_s_log10;  // k = 0..j_max
    std::vector<PlanarCurve> curves;        // l^u_i, m^u_i, l^s_j rounded to double
    int achieved_i = 0, achieved_j = 0;
    bool partial = false;
    int tangential = 0;
    double min_separation_log10 = 0.0;

    bool all_verified() const;
    bool all_distinct() const;  // separations ≥ 10 tol
    bool hausdorff_decreasing() const;
    bool pulses_increasing() const;  // n strictly increasing in i + j
};

// Builds L^u_k from T^glo(W^u_loc(O) ∩ Πu), L^s_k from W^s_loc(O) ∩ Πs, pushes
// l^u_i through T_S and solves m^u_i ∩ l^s_j in seed parameters.
MultipulseResult find_multipulse(const SyntheticMultipulseConfig& cfg);

struct PulseCount {
    int n_forward = -1;
    int n_backward = -1;
    std::string escape;
};

// Orbit tracking from a point given by its full-precision coordinates. A step
// counts as landed when the point's distance to the level set of the trace
// offset, |f|/|∇f|, is below the result's tolerance.
PulseCount count_pulses(const SyntheticMultipulseConfig& cfg, const MultipulseResult& r, const std::string& u1,
                        const std::string& v1, int max_steps);

// Recounts p (optionally displaced by offset_tols·tol along (1, 1)/√2) and
// compares with (i, j).
bool verify_multipulse_point(const SyntheticMultipulseConfig& cfg, const MultipulseResult& r, const PulsePoint& p,
                             double offset_tols = 0.0);

nlohmann::json to_json(const MultipulseResult& r);
void write_curves_csv(std::ostream& os, const MultipulseResult& r);

}  // namespace homlab
