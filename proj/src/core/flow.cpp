#include "homlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "homlab/error.hpp"
#include "homlab/io.hpp"

namespace homlab {

namespace {

struct FieldRhs {
    const SystemSpec& spec;
    void operator()(const State4& y, State4& dy) const { dy = spec.field(y); }
};

struct VariationalRhs {
    const SystemSpec& spec;
    void operator()(const VecN<20>& y, VecN<20>& dy) const {
        const State4 x{y[0], y[1], y[2], y[3]};
        const State4 fx = spec.field(x);
        const Mat4 j = spec.jacobian(x);
        for (std::size_t i = 0; i < 4; ++i) dy[i] = fx[i];
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 4; ++c) {
                double s = 0.0;
                for (std::size_t k = 0; k < 4; ++k) s += j[r][k] * y[4 + 4 * k + c];
                dy[4 + 4 * r + c] = s;
            }
    }
};

void check_box(const FlowOptions& opt, double t, const State4& x) {
    if (opt.box > 0.0 && norm_inf(x) > opt.box)
        throw Error(ErrorKind::DomainExit, "trajectory left the configured box", t, x);
}

bool direction_ok(Crossing dir, double g0, double g1) {
    switch (dir) {
        case Crossing::Any: return true;
        case Crossing::Increasing: return g0 < g1;
        case Crossing::Decreasing: return g0 > g1;
    }
    return true;
}

// Bisection/secant (Illinois) root of g on the dense segment between ta and tb.
double refine_root(const DenseSegment<4>& seg, const SectionSurface& s, double ta, double tb, double tol) {
    double ga = s(seg(ta)), gb = s(seg(tb));
    int side = 0;
    double tc = tb;
    for (int it = 0; it < 200; ++it) {
        tc = (ta * gb - tb * ga) / (gb - ga);
        if (!(std::min(ta, tb) < tc && tc < std::max(ta, tb))) tc = 0.5 * (ta + tb);
        const double gc = s(seg(tc));
        if (gc == 0.0) return tc;
        if (std::fabs(gc) <= tol * 1e-3 || std::fabs(tb - ta) <= 4e-16 * std::max(1.0, std::fabs(tc)))
            return tc;
        if ((gc > 0) == (gb > 0)) {
            tb = tc;
            gb = gc;
            if (side == -1) ga *= 0.5;
            side = -1;
        } else {
            ta = tc;
            ga = gc;
            if (side == 1) gb *= 0.5;
            side = 1;
        }
        if (it % 3 == 2) {
            // Periodic bisection keeps the bracket shrinking geometrically.
            const double tm = 0.5 * (ta + tb);
            const double gm = s(seg(tm));
            if (gm == 0.0) return tm;
            if ((gm > 0) == (gb > 0)) {
                tb = tm;
                gb = gm;
            } else {
                ta = tm;
                ga = gm;
            }
            side = 0;
        }
    }
    return tc;
}

}  // namespace

State4 Trajectory::at(double time) const {
    if (t.empty()) return {};
    const bool forward = t.size() < 2 || t.back() >= t.front();
    auto idx_of = [&](double tv) -> std::size_t {
        if (forward) {
            auto it = std::upper_bound(t.begin(), t.end(), tv);
            return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - t.begin()) - 1));
        }
        auto it = std::upper_bound(t.begin(), t.end(), tv, [](double a, double b) { return a > b; });
        return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - t.begin()) - 1));
    };
    std::size_t i = idx_of(time);
    if (i >= t.size() - 1) return x.back();
    if (time == t[i]) return x[i];
    return segments[i](time);
}

Trajectory integrate(const SystemSpec& spec, const State4& x0, double t0, double t1, const FlowOptions& opt) {
    Trajectory traj;
    traj.t.push_back(t0);
    traj.x.push_back(x0);
    const double h0 = spec.h(x0);
    check_box(opt, t0, x0);
    State4 y = x0;
    FieldRhs rhs{spec};
    dop853_integrate<4>(rhs, y, t0, t1, opt.step, [&](const auto& step) {
        check_box(opt, step.t1(), step.y1());
        traj.segments.push_back(step.dense());
        traj.t.push_back(step.t1());
        traj.x.push_back(step.y1());
        traj.h_drift = std::max(traj.h_drift, std::fabs(spec.h(step.y1()) - h0));
        return false;
    });
    return traj;
}

State4 flow(const SystemSpec& spec, const State4& x0, double t, const FlowOptions& opt) {
    State4 y = x0;
    check_box(opt, 0.0, x0);
    FieldRhs rhs{spec};
    dop853_integrate<4>(rhs, y, 0.0, t, opt.step, [&](const auto& step) {
        check_box(opt, step.t1(), step.y1());
        return false;
    });
    return y;
}

SectionHit integrate_to_sections(const SystemSpec& spec, const State4& x0, std::span<const SectionEvent> events,
                                 double t_max, const FlowOptions& opt) {
    for (std::size_t e = 0; e < events.size(); ++e)
        if (events[e].surface(x0) == 0.0) return {x0, 0.0, e};
    check_box(opt, 0.0, x0);
    FieldRhs rhs{spec};
    State4 y = x0;
    bool found = false;
    SectionHit hit;
    dop853_integrate<4>(rhs, y, 0.0, t_max, opt.step, [&](const auto& step) {
        double best_t = 0.0;
        std::size_t best_e = 0;
        bool any = false;
        for (std::size_t e = 0; e < events.size(); ++e) {
            const auto& ev = events[e];
            const double g0 = ev.surface(step.y0());
            const double g1 = ev.surface(step.y1());
            if (g0 == 0.0 || (g0 > 0) == (g1 > 0)) continue;
            if (!direction_ok(ev.direction, g0, g1)) continue;
            const double tr = refine_root(step.dense(), ev.surface, step.t0(), step.t1(), opt.event_tol);
            if (!any || std::fabs(tr - step.t0()) < std::fabs(best_t - step.t0())) {
                best_t = tr;
                best_e = e;
                any = true;
            }
        }
        if (any) {
            // Polish: exact substeps from the step start, Newton on the section function.
            const auto& ev = events[best_e];
            double ts = best_t;
            State4 xs{};
            for (int it = 0; it < 3; ++it) {
                xs = dop853_fixed_step<4>(rhs, step.y0(), ts - step.t0());
                const double g = ev.surface(xs);
                const double gd = spec.field(xs)[ev.surface.index];
                if (gd == 0.0) break;
                ts -= g / gd;
            }
            xs = dop853_fixed_step<4>(rhs, step.y0(), ts - step.t0());
            const State4 fx = spec.field(xs);
            if (std::fabs(fx[ev.surface.index]) <= 1e-10 * norm_inf(fx))
                throw Error(ErrorKind::TangencyError, "tangential section crossing");
            if (std::fabs(ev.surface(xs)) > std::max(opt.event_tol, 1e-12 * std::fabs(ev.surface.value)))
                throw Error(ErrorKind::TangencyError, "section residual not reduced below tolerance");
            xs[ev.surface.index] = ev.surface.value;
            hit = {xs, ts, best_e};
            found = true;
            return true;
        }
        check_box(opt, step.t1(), step.y1());
        if (opt.monitor) opt.monitor(step.t1(), step.y1());
        return false;
    });
    if (!found) throw Error(ErrorKind::NoCrossing, "no section crossing before t_max");
    return hit;
}

SectionHit integrate_to_section(const SystemSpec& spec, const State4& x0, const SectionSurface& section,
                                Crossing direction, double t_max, const FlowOptions& opt) {
    const SectionEvent ev{section, direction};
    return integrate_to_sections(spec, x0, std::span<const SectionEvent>(&ev, 1), t_max, opt);
}

VariationalPath integrate_variational(const SystemSpec& spec, const State4& x0, double t0, double t1,
                                      const FlowOptions& opt) {
    VariationalPath out;
    VecN<20> y{};
    for (std::size_t i = 0; i < 4; ++i) {
        y[i] = x0[i];
        y[4 + 4 * i + i] = 1.0;
    }
    auto unpack = [](const VecN<20>& v, State4& x, Mat4& phi) {
        for (std::size_t i = 0; i < 4; ++i) x[i] = v[i];
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 4; ++c) phi[r][c] = v[4 + 4 * r + c];
    };
    out.base.t.push_back(t0);
    out.base.x.push_back(x0);
    out.phi.push_back(identity4());
    const double h0 = spec.h(x0);
    check_box(opt, t0, x0);
    VariationalRhs rhs{spec};
    dop853_integrate<20>(rhs, y, t0, t1, opt.step, [&](const auto& step) {
        State4 x{};
        Mat4 phi{};
        unpack(step.y1(), x, phi);
        check_box(opt, step.t1(), x);
        const auto& seg = step.dense();
        DenseSegment<4> s4;
        s4.t0 = seg.t0;
        s4.h = seg.h;
        for (std::size_t k = 0; k < 8; ++k)
            for (std::size_t i = 0; i < 4; ++i) s4.r[k][i] = seg.r[k][i];
        out.base.segments.push_back(s4);
        out.base.t.push_back(step.t1());
        out.base.x.push_back(x);
        out.base.h_drift = std::max(out.base.h_drift, std::fabs(spec.h(x) - h0));
        out.phi.push_back(phi);
        return false;
    });
    return out;
}

void write_trajectory_csv(std::ostream& os, const SystemSpec& spec, const Trajectory& traj) {
    os << "t,u1,u2,v1,v2,H\n";
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        const auto& x = traj.x[i];
        os << format_double(traj.t[i]) << ',' << format_double(x[0]) << ',' << format_double(x[1]) << ','
           << format_double(x[2]) << ',' << format_double(x[3]) << ',' << format_double(spec.h(x)) << '\n';
    }
}

void write_phi_csv(std::ostream& os, const VariationalPath& path) {
    os << "t";
    for (int r = 1; r <= 4; ++r)
        for (int c = 1; c <= 4; ++c) os << ",phi" << r << c;
    os << '\n';
    for (std::size_t i = 0; i < path.phi.size(); ++i) {
        os << format_double(path.base.t[i]);
        for (const auto& row : path.phi[i])
            for (double v : row) os << ',' << format_double(v);
        os << '\n';
    }
}

}  // namespace homlab
