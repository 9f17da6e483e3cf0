#include "homlab/error.hpp"
#include "homlab/manifold.hpp"

namespace homlab {

std::string to_string(ManifoldVerdict v) { return v == ManifoldVerdict::Curve ? "Curve" : "Trivial"; }

std::string to_string(GammaCase g) {
    switch (g) {
        case GammaCase::Resonant: return "resonant";
        case GammaCase::GammaGtHalf: return "gamma_gt_half";
        case GammaCase::GammaLtHalf: return "gamma_lt_half";
    }
    return "?";
}

namespace {

GammaCase gamma_case(double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) raise(ErrorKind::InvalidArgument, "gamma must lie in (0, 1]");
    if (gamma == 1.0) return GammaCase::Resonant;
    if (gamma == 0.5) raise(ErrorKind::InvalidArgument, "gamma = 1/2 is excluded from the classification");
    return gamma > 0.5 ? GammaCase::GammaGtHalf : GammaCase::GammaLtHalf;
}

ManifoldVerdict curve_if(bool c) { return c ? ManifoldVerdict::Curve : ManifoldVerdict::Trivial; }

void require_nonzero(double b, double c, double d) {
    if (b == 0.0 || c == 0.0 || d == 0.0)
        raise(ErrorKind::DegenerateCoefficients, "classification needs nonzero b, c and d");
}

}  // namespace

Classification classify_homoclinic(double gamma, double b, double c, double d) {
    require_nonzero(b, c, d);
    Classification r;
    r.gamma_case = gamma_case(gamma);
    if (r.gamma_case == GammaCase::GammaLtHalf) {
        r.s_manifold = curve_if(c * d < 0.0);
        r.u_manifold = curve_if(b * d > 0.0);
    }
    return r;
}

Classification classify_figure_eight(double gamma, double b1, double c1, double d1, double b2, double c2,
                                     double d2) {
    const Classification l1 = classify_homoclinic(gamma, b1, c1, d1);
    const Classification l2 = classify_homoclinic(gamma, b2, c2, d2);
    Classification r;
    r.figure_eight = true;
    r.gamma_case = l1.gamma_case;
    r.s_loop1 = l1.s_manifold;
    r.s_loop2 = l2.s_manifold;
    r.u_loop1 = l1.u_manifold;
    r.u_loop2 = l2.u_manifold;
    if (r.gamma_case == GammaCase::GammaLtHalf) {
        r.s_manifold = curve_if(c1 * d1 > 0.0 && c2 * d2 > 0.0);
        r.u_manifold = curve_if(b1 * d1 < 0.0 && b2 * d2 < 0.0);
    }
    return r;
}

nlohmann::json to_json(const Classification& c) {
    nlohmann::json j{{"gamma_case", to_string(c.gamma_case)},
                     {"s_manifold", to_string(c.s_manifold)},
                     {"u_manifold", to_string(c.u_manifold)},
                     {"figure_eight", c.figure_eight}};
    if (c.figure_eight) {
        j["loops"] = {{{"s_manifold", to_string(c.s_loop1)}, {"u_manifold", to_string(c.u_loop1)}},
                      {{"s_manifold", to_string(c.s_loop2)}, {"u_manifold", to_string(c.u_loop2)}}};
    }
    return j;
}

}  // namespace homlab
