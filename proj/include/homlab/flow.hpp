#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "homlab/dop853.hpp"
#include "homlab/system.hpp"

namespace homlab {

struct FlowOptions {
    StepControl step{};
    double box = 0.0;          // > 0 enforces |x_i| <= box, else unbounded
    double event_tol = 1e-12;  // on the section function
    // Called after every accepted step of integrate_to_sections; may throw.
    std::function<void(double, const State4&)> monitor;
};

// Coordinate hyperplane x[index] = value.
struct SectionSurface {
    std::size_t index = V2;
    double value = 0.0;
    double operator()(const State4& x) const { return x[index] - value; }
};

enum class Crossing { Any, Increasing, Decreasing };

struct SectionEvent {
    SectionSurface surface;
    Crossing direction = Crossing::Any;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<State4> x;
    std::vector<DenseSegment<4>> segments;  // segments[i] spans [t[i], t[i+1]]
    double h_drift = 0.0;                   // max |H(x(t)) − H(x(0))| over samples

    // Dense evaluation; exact at sample times.
    State4 at(double time) const;
};

Trajectory integrate(const SystemSpec& spec, const State4& x0, double t0, double t1,
                     const FlowOptions& opt = {});

// Endpoint of the flow without storing the path.
State4 flow(const SystemSpec& spec, const State4& x0, double t, const FlowOptions& opt = {});

struct SectionHit {
    State4 x{};
    double t = 0.0;
    std::size_t event = 0;  // index into the event list
};

// First crossing of any listed event within t_max (negative t_max integrates
// backward). A start already on an event surface returns immediately.
// Crossing directions refer to the integration direction.
SectionHit integrate_to_sections(const SystemSpec& spec, const State4& x0, std::span<const SectionEvent> events,
                                 double t_max, const FlowOptions& opt = {});

SectionHit integrate_to_section(const SystemSpec& spec, const State4& x0, const SectionSurface& section,
                                Crossing direction, double t_max, const FlowOptions& opt = {});

struct VariationalPath {
    Trajectory base;
    std::vector<Mat4> phi;  // fundamental matrix at base.t[i]
    const Mat4& final_phi() const { return phi.back(); }
};

VariationalPath integrate_variational(const SystemSpec& spec, const State4& x0, double t0, double t1,
                                      const FlowOptions& opt = {});

void write_trajectory_csv(std::ostream& os, const SystemSpec& spec, const Trajectory& traj);
void write_phi_csv(std::ostream& os, const VariationalPath& path);

}  // namespace homlab
