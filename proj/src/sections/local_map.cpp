#include "homlab/local_map.hpp"

#include <cmath>

#include "homlab/error.hpp"

namespace homlab {

namespace {

bool figure_eight(SectionKind k) {
    return k == SectionKind::Ps1 || k == SectionKind::Ps2 || k == SectionKind::Pu1 || k == SectionKind::Pu2;
}

FlowOptions box_options(const LocalMapOptions& opt, double delta) {
    FlowOptions f = opt.flow;
    if (f.box <= 0.0) f.box = 2.0 * delta;
    return f;
}

}  // namespace

SectionKind exit_section(SectionKind from, bool positive_v2) {
    if (figure_eight(from)) return positive_v2 ? SectionKind::Pu1 : SectionKind::Pu2;
    return positive_v2 ? SectionKind::Pu : SectionKind::Sigma;
}

SectionKind entry_section(SectionKind from, bool positive_u2) {
    if (figure_eight(from)) return positive_u2 ? SectionKind::Ps1 : SectionKind::Ps2;
    return positive_u2 ? SectionKind::Ps : SectionKind::Ps2;
}

LocalMapResult local_map(const SystemSpec& spec, const SectionChart& from, double u10, double v10,
                         const LocalMapOptions& opt) {
    if (!from.stable_side()) raise(ErrorKind::InvalidArgument, "local_map starts on a stable-side section");
    const double delta = from.delta;
    const State4 x0 = lift_section_point(spec, from, u10, v10);
    const SectionEvent events[2] = {{{V2, delta}, Crossing::Any}, {{V2, -delta}, Crossing::Any}};
    const SectionHit hit = integrate_to_sections(spec, x0, events, opt.t_max, box_options(opt, delta));

    LocalMapResult r;
    r.exit.target = exit_section(from.kind, hit.event == 0);
    r.exit.point = chart_coordinates(hit.x);
    r.exit.time = hit.t;
    r.exit.state = hit.x;
    r.in_domain = std::hypot(hit.x[U1], hit.x[V1]) < opt.eps_u;
    if (opt.dual_route) {
        const double v2tau = hit.event == 0 ? delta : -delta;
        const LocalPassage p = solve_local_passage(spec, u10, from.value(), v10, x0[V2], v2tau);
        r.newton_iterations = p.newton_iterations;
        r.route_discrepancy = std::max(std::fabs(p.u1tau - hit.x[U1]), std::fabs(p.v1tau - hit.x[V1]));
        if (!(r.route_discrepancy <= opt.route_tol))
            raise(ErrorKind::ConsistencyError, "local map routes disagree: integration vs boundary-value problem");
    }
    return r;
}

FlowLocalMap::FlowLocalMap(SpecPtr spec, double delta, LocalMapOptions opt)
    : spec_(std::move(spec)), delta_(delta), opt_(std::move(opt)) {}

Passage FlowLocalMap::forward(SectionKind from, const Vec2& p) const {
    return local_map(*spec_, SectionChart{from, delta_}, p[0], p[1], opt_).exit;
}

Passage FlowLocalMap::backward(SectionKind from, const Vec2& p) const {
    const SectionChart chart{from, delta_};
    if (chart.stable_side()) raise(ErrorKind::InvalidArgument, "backward passage starts on an unstable-side section");
    const State4 x0 = lift_section_point(*spec_, chart, p[0], p[1]);
    const SectionEvent events[2] = {{{U2, delta_}, Crossing::Any}, {{U2, -delta_}, Crossing::Any}};
    const SectionHit hit = integrate_to_sections(*spec_, x0, events, -opt_.t_max, box_options(opt_, delta_));
    return {entry_section(from, hit.event == 0), chart_coordinates(hit.x), hit.t, hit.x};
}

LinearLocalMap::LinearLocalMap(double lambda1, double lambda2, double delta)
    : l1_(lambda1), l2_(lambda2), delta_(delta) {
    if (!(lambda1 > 0.0) || !(lambda2 >= lambda1) || !(delta > 0.0))
        raise(ErrorKind::InvalidArgument, "linear local map needs 0 < lambda1 <= lambda2 and delta > 0");
}

Passage LinearLocalMap::forward(SectionKind from, const Vec2& p) const {
    const double prod = p[0] * p[1];
    const double r = (l1_ / l2_) * std::fabs(prod) / (delta_ * delta_);
    if (!(r > 0.0) || !(r < 1.0)) raise(ErrorKind::DomainExit, "start has no passage to an exit section");
    const double tau = -std::log(r) / l2_;
    const double P = std::pow(r, l1_ / l2_);
    const SectionKind to = exit_section(from, SectionChart{from, delta_}.value() * prod > 0.0);
    const Vec2 q{p[0] * P, p[1] / P};
    const SectionChart tc{to, delta_};
    State4 x{q[0], 0.0, q[1], tc.value()};
    x[U2] = l1_ * q[0] * q[1] / (l2_ * tc.value());
    return {to, q, tau, x};
}

Passage LinearLocalMap::backward(SectionKind from, const Vec2& p) const {
    const double prod = p[0] * p[1];
    const double r = (l1_ / l2_) * std::fabs(prod) / (delta_ * delta_);
    if (!(r > 0.0) || !(r < 1.0)) raise(ErrorKind::DomainExit, "start has no backward passage");
    const double tau = -std::log(r) / l2_;
    const double P = std::pow(r, l1_ / l2_);
    const SectionKind to = entry_section(from, SectionChart{from, delta_}.value() * prod > 0.0);
    const Vec2 q{p[0] / P, p[1] * P};
    const SectionChart tc{to, delta_};
    State4 x{q[0], tc.value(), q[1], 0.0};
    x[V2] = l1_ * q[0] * q[1] / (l2_ * tc.value());
    return {to, q, -tau, x};
}

}  // namespace homlab
