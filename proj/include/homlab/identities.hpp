#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homlab/system.hpp"

namespace homlab {

struct IdentityCheck {
    std::string name;
    double max_violation = 0.0;
};

struct IdentityReport {
    std::vector<IdentityCheck> checks;  // only the identities the profile claims
    double max_flow_derivative_of_h = 0.0;  // max |∇H · X| over samples
    double h_at_origin = 0.0;
    bool closed_form_jacobian = false;

    double worst() const;
    const IdentityCheck* find(const std::string& name) const;
};

// Samples uniformly in the box |x_i| <= radius with a fixed-seed generator.
IdentityReport check_identities(const SystemSpec& spec, int sample_count, double radius, std::uint64_t seed = 7);

// The f_ij, g_ij split of the nonlinearity: every monomial of F1 carrying u2
// goes to f12, the rest to f11 (likewise for F2, G1 with v2, G2 with v2).
struct CoefficientSplit {
    double f11, f12, f21, f22, g11, g12, g21, g22;
};
CoefficientSplit split_nonlinearity(const SystemSpec& spec, const State4& x);

}  // namespace homlab
