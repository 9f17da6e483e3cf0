#pragma once

#include <memory>
#include <vector>

#include "homlab/global_map.hpp"
#include "homlab/local_map.hpp"

namespace homlab {

struct PoincareOptions {
    double eps = 1e-2;    // start radius on Πs
    double eps_u = 5e-2;  // admissible exit radius on Πu
};

// T = T^glo ∘ T^loc on Πs. M^s is mapped to itself by convention.
class PoincareMap {
public:
    PoincareMap(std::shared_ptr<const LocalMap> local, std::shared_ptr<const GlobalMap> global,
                PoincareOptions opt = {});

    struct Step {
        Vec2 point{};
        Passage local;
    };

    // Throws DomainExit when the local passage misses the loop's Πu or lands
    // outside the eps_u ball.
    Step step(const Vec2& p) const;
    Vec2 apply(const Vec2& p) const { return step(p).point; }
    // (T^loc)⁻¹ ∘ (T^glo)⁻¹; throws DomainExit when the preimage is not on Πs.
    Vec2 inverse(const Vec2& p) const;

    const LocalMap& local() const { return *local_; }
    const GlobalMap& global() const { return *global_; }
    const PoincareOptions& options() const { return opt_; }

private:
    std::shared_ptr<const LocalMap> local_;
    std::shared_ptr<const GlobalMap> global_;
    PoincareOptions opt_;
};

// Two loops sharing O: Γ1 runs Πu1 → Πs1, Γ2 runs Πu2 → Πs2. A point of Πs_i
// passes near O to Πu1 or Πu2 and returns along the matching loop.
class FigureEightMap {
public:
    FigureEightMap(std::shared_ptr<const LocalMap> local, std::shared_ptr<const GlobalMap> global1,
                   std::shared_ptr<const GlobalMap> global2, PoincareOptions opt = {});

    struct Step {
        SectionKind section = SectionKind::Ps1;
        Vec2 point{};
        Passage local;
    };

    Step apply(SectionKind from, const Vec2& p) const;
    Step inverse(SectionKind from, const Vec2& p) const;
    const GlobalMap& global(int loop) const { return loop == 1 ? *g1_ : *g2_; }
    const LocalMap& local() const { return *local_; }
    const PoincareOptions& options() const { return opt_; }

private:
    std::shared_ptr<const LocalMap> local_;
    std::shared_ptr<const GlobalMap> g1_, g2_;
    PoincareOptions opt_;
};

struct FigureEightBundle {
    std::shared_ptr<FigureEightMap> map;
    GlobalMapCoeffs coeffs1;
    GlobalMapCoeffs coeffs2;
    double symmetry_defect = 0.0;  // max |coeff1 − coeff2|
};

// Computes both coefficient sets; when the system claims the σ2 symmetry the sets
// must agree to 1e-6.
FigureEightBundle figure_eight_maps(const SystemSpec& spec, std::shared_ptr<const LocalMap> local,
                                    std::shared_ptr<const GlobalMap> global1,
                                    std::shared_ptr<const GlobalMap> global2, PoincareOptions opt = {});


struct RecurrenceLevel {
    double eps = 0.0;
    int samples = 0;
    int in_domain = 0;      // samples on which T is defined
    int returns = 0;        // images that are again in the domain of T
    double max_deviation = 0.0;  // max |w̄ − d/b| over images
};

struct RecurrenceReport {
    double w_star = 0.0;  // d/b
    std::vector<RecurrenceLevel> levels;
    bool no_return() const;
    // Strictly decreasing along the grid and every level nonempty.
    bool deviation_decreasing() const;
};

// Samples radii × log-spaced slopes × quadrants of the ε-ball on Πs for each ε (same relative layout on
// every level) and records where the images of the domain of T land.
RecurrenceReport recurrence_check(std::shared_ptr<const LocalMap> local, std::shared_ptr<const GlobalMap> global,
                                  const std::vector<double>& eps_grid, double eps_u = 5e-2, int n_slopes = 33);

struct ExpansionFit {
    double C = 0.0;  // max ‖p‖^{1−2γ} / ‖T(p)‖ over the sampled 𝒟2 points
    int samples = 0;
};

// Single constant C with ‖p‖^{1−2γ} ≤ C ‖T(p)‖ on a 𝒟2 grid.
ExpansionFit expansion_fit(const PoincareMap& T, double gamma, double m, int n_radii = 8, int n_slopes = 5);

}  // namespace homlab
