#pragma once

#include <memory>

#include "homlab/bvp.hpp"
#include "homlab/flow.hpp"
#include "homlab/sections.hpp"

namespace homlab {

// One passage between a stable-side and an unstable-side section near O.
struct Passage {
    SectionKind target = SectionKind::Pu;
    Vec2 point{};
    double time = 0.0;
    State4 state{};
};

struct LocalMapOptions {
    double eps_u = 5e-2;
    bool dual_route = true;   // also solve the BVP route and compare
    double route_tol = 1e-7;  // on (u1τ, v1τ)
    double t_max = 400.0;
    FlowOptions flow{};       // box 0 selects 2δ
};

// Direct integration from the lifted start on a stable-side chart to the first
// crossing of v2 = ±δ; with dual_route, the BVP route must agree.
// Membership ‖(u1τ, v1τ)‖ < eps_u is reported, not enforced.
struct LocalMapResult {
    Passage exit;
    bool in_domain = false;
    double route_discrepancy = 0.0;
    int newton_iterations = 0;
};

LocalMapResult local_map(const SystemSpec& spec, const SectionChart& from, double u10, double v10,
                         const LocalMapOptions& opt = {});

// Unstable-side section reached from a stable-side section by the sign of v2τ.
SectionKind exit_section(SectionKind from, bool positive_v2);
// Stable-side section reached backward from an unstable-side section.
SectionKind entry_section(SectionKind from, bool positive_u2);

class LocalMap {
public:
    virtual ~LocalMap() = default;
    virtual double delta() const = 0;
    virtual Passage forward(SectionKind from, const Vec2& p) const = 0;
    virtual Passage backward(SectionKind from, const Vec2& p) const = 0;
};

// Flow-defined local map; backward passages integrate in reverse time.
class FlowLocalMap final : public LocalMap {
public:
    FlowLocalMap(SpecPtr spec, double delta, LocalMapOptions opt = {});
    double delta() const override { return delta_; }
    Passage forward(SectionKind from, const Vec2& p) const override;
    Passage backward(SectionKind from, const Vec2& p) const override;
    const SystemSpec& spec() const { return *spec_; }

private:
    SpecPtr spec_;
    double delta_;
    LocalMapOptions opt_;
};

// Closed-form local map of the linear saddle with H = λ1 u1 v1 − λ2 u2 v2:
// the flight time solves e^{−λ2 τ} = γ|u1 v1|/δ², and u1 v1 is invariant.
class LinearLocalMap final : public LocalMap {
public:
    LinearLocalMap(double lambda1, double lambda2, double delta);
    double delta() const override { return delta_; }
    Passage forward(SectionKind from, const Vec2& p) const override;
    Passage backward(SectionKind from, const Vec2& p) const override;
    double lambda1() const { return l1_; }
    double lambda2() const { return l2_; }

private:
    double l1_, l2_, delta_;
};

}  // namespace homlab
