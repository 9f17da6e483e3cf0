#include "homlab/sections.hpp"

#include <cmath>
#include <limits>

#include "homlab/error.hpp"

namespace homlab {

std::string to_string(SectionKind k) {
    switch (k) {
        case SectionKind::Ps: return "Ps";
        case SectionKind::Pu: return "Pu";
        case SectionKind::Sigma: return "Sigma";
        case SectionKind::Ps1: return "Ps1";
        case SectionKind::Pu1: return "Pu1";
        case SectionKind::Ps2: return "Ps2";
        case SectionKind::Pu2: return "Pu2";
    }
    return "?";
}

std::string to_string(YSector y) {
    switch (y) {
        case YSector::Y1: return "Y1";
        case YSector::Y2: return "Y2";
        case YSector::Y3: return "Y3";
    }
    return "?";
}

std::string to_string(Region r) {
    switch (r) {
        case Region::D1: return "D1";
        case Region::D2: return "D2";
        case Region::D3: return "D3";
        case Region::DD1: return "DD1";
        case Region::DD2: return "DD2";
        case Region::DD3: return "DD3";
        case Region::Outside: return "Outside";
    }
    return "?";
}

bool SectionChart::stable_side() const {
    return kind == SectionKind::Ps || kind == SectionKind::Ps1 || kind == SectionKind::Ps2;
}

double SectionChart::value() const {
    const bool negative = kind == SectionKind::Ps2 || kind == SectionKind::Sigma || kind == SectionKind::Pu2;
    return negative ? -delta : delta;
}

State4 lift_section_point(const SystemSpec& spec, const SectionChart& chart, double u1, double v1) {
    State4 x{};
    x[U1] = u1;
    x[V1] = v1;
    const Coord fc = chart.fixed(), yc = chart.free();
    x[fc] = chart.value();
    x[yc] = spec.lambda1 * u1 * v1 / (spec.lambda2 * chart.value());
    const double cap = chart.delta;
    double prev_step = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 60; ++it) {
        const double h = spec.h(x);
        const double hy = spec.grad_h(x)[yc];
        if (!std::isfinite(h) || !std::isfinite(hy) || hy == 0.0)
            raise(ErrorKind::LiftError, "lift Newton hit a singular or non-finite derivative");
        double step = -h / hy;
        if (std::fabs(step) > cap) step = std::copysign(cap, step);
        x[yc] += step;
        const double size = std::max(std::fabs(x[yc]), std::numeric_limits<double>::min());
        if (std::fabs(step) <= 2.0 * std::numeric_limits<double>::epsilon() * size || h == 0.0) return x;
        // Round-off plateau: the step stopped shrinking at the last bits.
        if (it > 3 && std::fabs(step) >= prev_step && std::fabs(step) <= 1e-13 * std::max(size, norm_inf(x))) return x;
        prev_step = std::fabs(step);
        if (std::fabs(x[yc]) > 4.0 * chart.delta)
            raise(ErrorKind::LiftError, "lift Newton left the section neighbourhood");
    }
    raise(ErrorKind::LiftError, "lift Newton did not converge");
}

SectionPoint make_section_point(const SystemSpec& spec, const SectionChart& chart, double u1, double v1) {
    return {chart, u1, v1, lift_section_point(spec, chart, u1, v1)};
}

std::array<State4, 2> lift_tangents(const SystemSpec& spec, const SectionChart& chart, const State4& x) {
    const State4 g = spec.grad_h(x);
    const Coord yc = chart.free();
    if (g[yc] == 0.0) raise(ErrorKind::LiftError, "lift is singular at this state");
    State4 du{}, dv{};
    du[U1] = 1.0;
    du[yc] = -g[U1] / g[yc];
    dv[V1] = 1.0;
    dv[yc] = -g[V1] / g[yc];
    return {du, dv};
}

RegionLabel classify_region(double u1, double v1, double m, double eps) {
    RegionLabel r;
    const double a = std::fabs(u1), b = std::fabs(v1);
    if (b * m < a)
        r.y = YSector::Y1;
    else if (b <= m * a)
        r.y = YSector::Y2;
    else
        r.y = YSector::Y3;
    if (std::hypot(u1, v1) >= eps || u1 * v1 == 0.0) {
        r.d = Region::Outside;
        return r;
    }
    const bool same = u1 * v1 > 0.0;
    switch (r.y) {
        case YSector::Y1: r.d = same ? Region::D1 : Region::DD1; break;
        case YSector::Y2: r.d = same ? Region::D2 : Region::DD2; break;
        case YSector::Y3:
            r.d = same ? Region::D3 : Region::DD3;
            r.provisional = true;
            break;
    }
    return r;
}

}  // namespace homlab
