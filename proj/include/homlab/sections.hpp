#pragma once

#include <array>
#include <string>

#include "homlab/flow.hpp"
#include "homlab/linalg.hpp"
#include "homlab/system.hpp"

namespace homlab {

// Πs, Πs1: u2 = δ.  Πs2: u2 = −δ.  Πu, Πu1: v2 = δ.  Σ, Πu2: v2 = −δ.
// Every chart uses (u1, v1); the remaining coordinate is recovered from H = 0.
enum class SectionKind { Ps, Pu, Sigma, Ps1, Pu1, Ps2, Pu2 };

std::string to_string(SectionKind k);

struct SectionChart {
    SectionKind kind = SectionKind::Ps;
    double delta = 0.1;

    bool stable_side() const;  // u2 fixed
    Coord fixed() const { return stable_side() ? U2 : V2; }
    Coord free() const { return stable_side() ? V2 : U2; }
    double value() const;
    SectionSurface surface() const { return {fixed(), value()}; }
};

struct SectionPoint {
    SectionChart chart;
    double u1 = 0.0;
    double v1 = 0.0;
    State4 lifted{};
};

// Safeguarded Newton on the free coordinate from the seed given by the
// quadratic part λ1 u1 v1 − λ2 u2 v2 of H.
State4 lift_section_point(const SystemSpec& spec, const SectionChart& chart, double u1, double v1);
SectionPoint make_section_point(const SystemSpec& spec, const SectionChart& chart, double u1, double v1);

// ∂x/∂u1 and ∂x/∂v1 of the lift at a lifted state.
std::array<State4, 2> lift_tangents(const SystemSpec& spec, const SectionChart& chart, const State4& x);

inline Vec2 chart_coordinates(const State4& x) { return {x[U1], x[V1]}; }

enum class YSector { Y1, Y2, Y3 };
enum class Region { D1, D2, D3, DD1, DD2, DD3, Outside };

std::string to_string(YSector y);
std::string to_string(Region r);

struct RegionLabel {
    YSector y = YSector::Y2;
    Region d = Region::Outside;
    // Y3 labels come from the sign of u1 v1 alone; the exit section decides.
    bool provisional = false;
};

// Ties on |v1| = m^{±1}|u1| resolve to Y2.
RegionLabel classify_region(double u1, double v1, double m, double eps);

inline bool in_D2(double u1, double v1, double m) {
    const double a = std::fabs(u1), b = std::fabs(v1);
    return u1 * v1 > 0.0 && b * m >= a && b <= m * a;
}

}  // namespace homlab
