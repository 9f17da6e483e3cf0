#include "homlab/poincare.hpp"

#include <algorithm>
#include <cmath>

#include "homlab/error.hpp"

namespace homlab {

PoincareMap::PoincareMap(std::shared_ptr<const LocalMap> local, std::shared_ptr<const GlobalMap> global,
                         PoincareOptions opt)
    : local_(std::move(local)), global_(std::move(global)), opt_(opt) {}

PoincareMap::Step PoincareMap::step(const Vec2& p) const {
    if (p[0] == 0.0 && p[1] == 0.0) return {p, {}};
    const Passage loc = local_->forward(global_->target(), p);
    if (loc.target != global_->source())
        raise(ErrorKind::DomainExit, "local passage leaves along the other branch of the unstable manifold");
    if (!(std::hypot(loc.point[0], loc.point[1]) < opt_.eps_u))
        raise(ErrorKind::DomainExit, "local passage lands outside the eps_u ball on the unstable section");
    return {global_->forward(loc.point), loc};
}

Vec2 PoincareMap::inverse(const Vec2& p) const {
    if (p[0] == 0.0 && p[1] == 0.0) return p;
    const Vec2 q = global_->backward(p);
    if (!(std::hypot(q[0], q[1]) < opt_.eps_u))
        raise(ErrorKind::DomainExit, "global preimage lies outside the eps_u ball");
    const Passage back = local_->backward(global_->source(), q);
    if (back.target != global_->target())
        raise(ErrorKind::DomainExit, "backward local passage reaches the other stable section");
    return back.point;
}

FigureEightMap::FigureEightMap(std::shared_ptr<const LocalMap> local, std::shared_ptr<const GlobalMap> global1,
                               std::shared_ptr<const GlobalMap> global2, PoincareOptions opt)
    : local_(std::move(local)), g1_(std::move(global1)), g2_(std::move(global2)), opt_(opt) {}

FigureEightMap::Step FigureEightMap::apply(SectionKind from, const Vec2& p) const {
    if (p[0] == 0.0 && p[1] == 0.0) return {from, p, {}};
    const Passage loc = local_->forward(from, p);
    if (!(std::hypot(loc.point[0], loc.point[1]) < opt_.eps_u))
        raise(ErrorKind::DomainExit, "local passage lands outside the eps_u ball");
    const GlobalMap& g = (loc.target == g1_->source()) ? *g1_ : *g2_;
    if (loc.target != g.source()) raise(ErrorKind::DomainExit, "local passage reaches no loop section");
    return {g.target(), g.forward(loc.point), loc};
}

FigureEightMap::Step FigureEightMap::inverse(SectionKind from, const Vec2& p) const {
    if (p[0] == 0.0 && p[1] == 0.0) return {from, p, {}};
    const GlobalMap& g = (from == g1_->target()) ? *g1_ : *g2_;
    if (from != g.target()) raise(ErrorKind::InvalidArgument, "section is not a loop's stable section");
    const Vec2 q = g.backward(p);
    if (!(std::hypot(q[0], q[1]) < opt_.eps_u))
        raise(ErrorKind::DomainExit, "global preimage lies outside the eps_u ball");
    const Passage back = local_->backward(g.source(), q);
    return {back.target, back.point, back};
}

FigureEightBundle figure_eight_maps(const SystemSpec& spec, std::shared_ptr<const LocalMap> local,
                                    std::shared_ptr<const GlobalMap> global1,
                                    std::shared_ptr<const GlobalMap> global2, PoincareOptions opt) {
    FigureEightBundle b;
    b.coeffs1 = global_map_coefficients(*global1);
    b.coeffs2 = global_map_coefficients(*global2);
    b.symmetry_defect = std::max({std::fabs(b.coeffs1.a - b.coeffs2.a), std::fabs(b.coeffs1.b - b.coeffs2.b),
                                  std::fabs(b.coeffs1.c - b.coeffs2.c), std::fabs(b.coeffs1.d - b.coeffs2.d)});
    if (spec.profile.symmetric_sigma2 && !(b.symmetry_defect <= 1e-6))
        raise(ErrorKind::ConsistencyError, "symmetric loops have unequal global map coefficients");
    b.map = std::make_shared<FigureEightMap>(std::move(local), std::move(global1), std::move(global2), opt);
    return b;
}

}  // namespace homlab

namespace homlab {

bool RecurrenceReport::no_return() const {
    for (const auto& l : levels)
        if (l.returns != 0) return false;
    return true;
}

bool RecurrenceReport::deviation_decreasing() const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i].in_domain == 0) return false;
        if (i > 0 && !(levels[i].max_deviation < levels[i - 1].max_deviation)) return false;
    }
    return !levels.empty();
}

namespace {

bool defined_at(const PoincareMap& T, const Vec2& p) {
    if (!(std::hypot(p[0], p[1]) < T.options().eps)) return false;
    try {
        T.step(p);
        return true;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::DomainExit) throw;
        return false;
    }
}

}  // namespace

RecurrenceReport recurrence_check(std::shared_ptr<const LocalMap> local, std::shared_ptr<const GlobalMap> global,
                                  const std::vector<double>& eps_grid, double eps_u, int n_slopes) {
    RecurrenceReport rep;
    const Mat2 A = global->differential();
    if (A[0][1] == 0.0) raise(ErrorKind::DegenerateCoefficients, "b = 0: the accumulation line is vertical");
    rep.w_star = A[1][1] / A[0][1];
    static constexpr double radii[] = {0.9, 0.6, 0.3, 0.1, 3e-2, 1e-2, 1e-3, 1e-4};
    for (double eps : eps_grid) {
        const PoincareMap T(local, global, {eps, eps_u});
        RecurrenceLevel lvl;
        lvl.eps = eps;
        for (double rf : radii)
            for (int k = 0; k < n_slopes; ++k) {
                // |v/u| log-spaced over [1e-8, 1e8]; the domain hugs the u-axis
                const double t = std::pow(10.0, -8.0 + 16.0 * k / std::max(1, n_slopes - 1));
                const double c = rf * eps / std::sqrt(1.0 + t * t);
                for (double su : {1.0, -1.0})
                    for (double sv : {1.0, -1.0}) {
                        const Vec2 p{su * c, sv * c * t};
                        ++lvl.samples;
                        if (!defined_at(T, p)) continue;
                        ++lvl.in_domain;
                        const Vec2 q = T.apply(p);
                        if (q[0] != 0.0)
                            lvl.max_deviation = std::max(lvl.max_deviation, std::fabs(q[1] / q[0] - rep.w_star));
                        if (defined_at(T, q)) ++lvl.returns;
                    }
            }
        rep.levels.push_back(lvl);
    }
    return rep;
}

ExpansionFit expansion_fit(const PoincareMap& T, double gamma, double m, int n_radii, int n_slopes) {
    ExpansionFit f;
    const double eps = T.options().eps;
    for (int i = 0; i < n_radii; ++i) {
        const double r = eps * std::pow(10.0, -3.0 * i / std::max(1, n_radii - 1)) * 0.9;
        for (int j = 0; j < n_slopes; ++j) {
            const double s = std::exp(std::log(1.0 / m) + 2.0 * std::log(m) * j / std::max(1, n_slopes - 1));
            for (double sign : {1.0, -1.0}) {
                const double u = sign * r / std::sqrt(1.0 + s * s);
                const Vec2 p{u, s * u};
                Vec2 q;
                try {
                    q = T.apply(p);
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::DomainExit) throw;
                    continue;
                }
                f.C = std::max(f.C, std::pow(std::hypot(p[0], p[1]), 1.0 - 2.0 * gamma) / std::hypot(q[0], q[1]));
                ++f.samples;
            }
        }
    }
    return f;
}

}  // namespace homlab
