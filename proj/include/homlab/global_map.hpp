#pragma once

#include <memory>
#include <string>

#include "homlab/flow.hpp"
#include "homlab/sections.hpp"

namespace homlab {

// Γ from its Πu trace M^u to its Πs trace M^s.
struct HomoclinicData {
    SpecPtr spec;
    SectionChart unstable_chart;  // contains M^u
    SectionChart stable_chart;    // contains M^s
    State4 mu{};
    State4 ms{};
    double transit_time = 0.0;
    Trajectory orbit;
    double tube = 0.0;  // admissible sup distance from Γ at equal times
    FlowOptions flow{};
};

// Integrates from mu to the first crossing of the stable chart's section
// toward O. tube_fraction scales sup|Γ| into the tube radius.
HomoclinicData build_homoclinic_data(SpecPtr spec, const SectionChart& unstable_chart,
                                     const SectionChart& stable_chart, const State4& mu,
                                     double tube_fraction = 0.25, const FlowOptions& flow = {});

class GlobalMap {
public:
    virtual ~GlobalMap() = default;
    virtual SectionKind source() const = 0;
    virtual SectionKind target() const = 0;
    virtual Vec2 forward(const Vec2& p) const = 0;
    virtual Vec2 backward(const Vec2& p) const = 0;
    // Differential at the trace M^u by a route independent of forward().
    virtual Mat2 differential() const = 0;
};

// Chart-affine synthetic global map p ↦ A p + quadratic(p); a = d = 1,
// b = c = 0 without quadratic terms is the identity tube.
class AffineGlobalMap final : public GlobalMap {
public:
    AffineGlobalMap(const Mat2& a, SectionKind source = SectionKind::Pu, SectionKind target = SectionKind::Ps,
                    double quadratic = 0.0);
    SectionKind source() const override { return source_; }
    SectionKind target() const override { return target_; }
    Vec2 forward(const Vec2& p) const override;
    Vec2 backward(const Vec2& p) const override;
    Mat2 differential() const override { return a_; }
    const Mat2& matrix() const { return a_; }

private:
    Mat2 a_;
    Mat2 inv_;
    SectionKind source_, target_;
    double q_;  // adds q (u1 v1, u1 v1) before the linear part
};

// Integration along the tube of Γ between the chart sections.
class FlowGlobalMap final : public GlobalMap {
public:
    explicit FlowGlobalMap(std::shared_ptr<const HomoclinicData> data);
    SectionKind source() const override { return data_->unstable_chart.kind; }
    SectionKind target() const override { return data_->stable_chart.kind; }
    Vec2 forward(const Vec2& p) const override;
    Vec2 backward(const Vec2& p) const override;
    // Variational equation along Γ, projected onto Πs along the flow.
    Mat2 differential() const override;
    const HomoclinicData& data() const { return *data_; }

private:
    std::shared_ptr<const HomoclinicData> data_;
};

// (u1, v1) ↦ P g⁻¹ P with P the (u1, v1) swap: the global map of the
// time-reversed, (u, v)-swapped system, running from its Πu (the original Πs)
// to its Πs (the original Πu).
class SwappedInverseGlobalMap final : public GlobalMap {
public:
    explicit SwappedInverseGlobalMap(std::shared_ptr<const GlobalMap> g) : g_(std::move(g)) {}
    SectionKind source() const override { return SectionKind::Pu; }
    SectionKind target() const override { return SectionKind::Ps; }
    Vec2 forward(const Vec2& p) const override;
    Vec2 backward(const Vec2& p) const override;
    Mat2 differential() const override;
    const GlobalMap& original() const { return *g_; }

private:
    std::shared_ptr<const GlobalMap> g_;
};

struct GlobalMapCoeffs {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    std::string source = "variational";
    Mat2 finite_difference{};
    double route_discrepancy = 0.0;  // relative, max-entry
    double ad_minus_bc = 0.0;
    double b_plus_c = 0.0;
    bool non_transversal = false;  // |d| < 1e-8
    double condition = 0.0;        // ‖A‖ ‖A⁻¹‖ in max-row norm, inf when singular
};

// Route (i) is GlobalMap::differential; route (ii) is Richardson-extrapolated
// central differences of forward() with steps h and h/2. The routes must agree
// to agree_tol relative.
GlobalMapCoeffs global_map_coefficients(const GlobalMap& map, double fd_step = 1e-4, double agree_tol = 1e-5);

// Tangent directions at the traces: W^u(O) ∩ Πs is the image of the v1-axis of
// Πu, W^s(O) ∩ Πu is the preimage of the u1-axis of Πs.
struct TangentSlopes {
    Vec2 unstable_direction{};  // on Πs
    Vec2 stable_direction{};    // on Πu
    double slope_u = 0.0;       // v1/u1 of unstable_direction
    double slope_s = 0.0;
    bool slope_u_vertical = false;
    bool slope_s_vertical = false;
    int sign_bd = 0;
    int sign_cd = 0;
};

TangentSlopes manifold_tangent_slopes(const GlobalMap& map);

}  // namespace homlab
