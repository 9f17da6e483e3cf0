#include <cmath>

#include "homlab/bvp.hpp"
#include "homlab/error.hpp"
#include "homlab/flow.hpp"

namespace homlab {

ShootingResult shoot_bvp(const SystemSpec& spec, const BvpBoundary& b, const FlowOptions& flow) {
    ShootingResult r;
    r.start = {b.u10, b.u20, std::exp(-spec.lambda1 * b.tau) * b.v1tau, std::exp(-spec.lambda2 * b.tau) * b.v2tau};
    const double scale = std::max(std::fabs(b.v1tau), std::fabs(b.v2tau));
    for (r.iterations = 1; r.iterations <= 30; ++r.iterations) {
        const VariationalPath path = integrate_variational(spec, r.start, 0.0, b.tau, flow);
        r.end = path.base.x.back();
        const Mat4& phi = path.final_phi();
        const double f1 = r.end[V1] - b.v1tau, f2 = r.end[V2] - b.v2tau;
        r.residual = std::max(std::fabs(f1), std::fabs(f2));
        if (r.residual <= 1e-15 * (1.0 + scale)) return r;
        const double j11 = phi[V1][V1], j12 = phi[V1][V2], j21 = phi[V2][V1], j22 = phi[V2][V2];
        const double det = j11 * j22 - j12 * j21;
        if (det == 0.0 || !std::isfinite(det)) break;
        r.start[V1] -= (j22 * f1 - j12 * f2) / det;
        r.start[V2] -= (j11 * f2 - j21 * f1) / det;
    }
    if (r.residual <= 1e-12 * (1.0 + scale)) return r;
    raise(ErrorKind::NoContraction, "shooting Newton did not converge");
}

}  // namespace homlab
