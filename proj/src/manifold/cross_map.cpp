#include <algorithm>
#include <cmath>

#include "homlab/error.hpp"
#include "homlab/manifold.hpp"

namespace homlab {

double default_chart_alpha(double gamma) { return 0.5 * std::min(4.0 * gamma, 1.0 - 2.0 * gamma); }

Vec2 WZChart::to_wz(const Vec2& p) const {
    if (p[0] == 0.0) raise(ErrorKind::ChartError, "w = v10/u10 is undefined for u10 = 0");
    return {p[1] / p[0], std::copysign(std::pow(std::fabs(p[1]), alpha), p[1])};
}

Vec2 WZChart::from_wz(const Vec2& wz) const {
    if (wz[0] == 0.0) raise(ErrorKind::ChartError, "w = 0 has no preimage in the chart");
    const double v = std::copysign(std::pow(std::fabs(wz[1]), 1.0 / alpha), wz[1]);
    return {v / wz[0], v};
}

PlanarCrossMap::PlanarCrossMap(std::function<Vec2(const Vec2&)> map, double w_star, double z_max,
                               double exponent_hint)
    : map_(std::move(map)), w_star_(w_star), z_max_(z_max), p_(exponent_hint) {
    if (!(z_max > 0.0) || !(exponent_hint > 0.0))
        raise(ErrorKind::InvalidArgument, "cross map needs a positive z range and exponent hint");
}

namespace {

struct Root {
    double z = 0.0;
    Vec2 image{};
};

}  // namespace

// Solves g(w, z) = z̄ on the half-axis whose image has the sign of z̄.
static Root invert_g(const std::function<Vec2(const Vec2&)>& map, double w, double zbar, double z_max, double p) {
    const double target = std::log(std::fabs(zbar));
    // choose the half-axis and an evaluable upper end
    double hi = z_max;
    Vec2 img_hi{};
    double sigma = 0.0;
    for (int k = 0; k < 40 && sigma == 0.0; ++k, hi *= 0.5) {
        try {
            const Vec2 plus = map({w, hi});
            if (plus[1] * zbar > 0.0) {
                sigma = 1.0;
                img_hi = plus;
            } else {
                const Vec2 minus = map({w, -hi});
                if (minus[1] * zbar > 0.0) {
                    sigma = -1.0;
                    img_hi = minus;
                }
            }
        } catch (const Error&) {
        }
        if (sigma != 0.0) break;
    }
    if (sigma == 0.0) raise(ErrorKind::InversionError, "no half-axis of z maps to the sign of zbar");

    struct Eval {
        double L, f;
        Vec2 img;
    };
    auto eval = [&](double L) {
        const Vec2 img = map({w, sigma * std::exp(L)});
        if (!(img[1] * zbar > 0.0)) raise(ErrorKind::InversionError, "g changes sign on a half-axis");
        return Eval{L, std::log(std::fabs(img[1])) - target, img};
    };
    Eval b{std::log(hi), std::log(std::fabs(img_hi[1])) - target, img_hi};
    if (b.f < 0.0) raise(ErrorKind::InversionError, "zbar lies beyond the image of the chart");
    if (b.f == 0.0) return {sigma * hi, img_hi};
    // the magnitude law |g| ~ |z|^p gives the first lower guess
    Eval a = eval(b.L - b.f / p);
    for (int k = 0; a.f > 0.0; ++k) {
        if (k > 60) raise(ErrorKind::InversionError, "root of g could not be bracketed");
        b = a;
        a = eval(a.L - std::max(a.f / p, 0.5) - 1.0);
    }
    if (a.f == 0.0) return {sigma * std::exp(a.L), a.img};
    // Illinois on log|z|; f is nearly affine with slope p
    int side = 0;
    Eval c = a;
    for (int it = 0; it < 200 && (b.L - a.L) > 1e-13 * std::max(1.0, std::fabs(a.L)); ++it) {
        const double L = (a.L * b.f - b.L * a.f) / (b.f - a.f);
        c = eval(std::clamp(L, a.L, b.L));
        if (c.f == 0.0) break;
        if (c.f < 0.0) {
            a = c;
            if (side == -1) b.f *= 0.5;
            side = -1;
        } else {
            b = c;
            if (side == 1) a.f *= 0.5;
            side = 1;
        }
    }
    // two Newton polish steps
    for (int k = 0; k < 2 && c.f != 0.0; ++k) {
        const double h = 1e-6;
        const Eval e = eval(c.L + h);
        const double slope = (e.f - c.f) / h;
        if (!(slope > 0.0)) break;
        const Eval n = eval(c.L - c.f / slope);
        if (std::fabs(n.f) >= std::fabs(c.f)) break;
        c = n;
    }
    return {sigma * std::exp(c.L), c.img};
}

double PlanarCrossMap::G(double w, double zbar) const {
    if (zbar == 0.0) return 0.0;
    return invert_g(map_, w, zbar, z_max_, p_).z;
}

Vec2 PlanarCrossMap::cross(double w, double zbar) const {
    if (zbar == 0.0) return {w_star_, 0.0};
    const Root r = invert_g(map_, w, zbar, z_max_, p_);
    return {r.image[0], r.z};
}

std::shared_ptr<PlanarCrossMap> poincare_cross_map(std::shared_ptr<const PoincareMap> T, const WZChart& chart,
                                                   double gamma) {
    const Mat2 A = T->global().differential();
    const double w_star = A[1][1] / A[0][1];
    auto map = [T, chart](const Vec2& wz) { return chart.to_wz(T->apply(chart.from_wz(wz))); };
    return std::make_shared<PlanarCrossMap>(map, w_star, chart.z_max(), 1.0 - 2.0 * gamma);
}

std::shared_ptr<PlanarCrossMap> model_cross_map(double w_star, double C, double gamma, double z_max) {
    const double p = 1.0 - 2.0 * gamma;
    auto map = [w_star, C, p](const Vec2& wz) {
        return Vec2{w_star, C * std::copysign(std::pow(std::fabs(wz[1]), p), wz[1])};
    };
    return std::make_shared<PlanarCrossMap>(map, w_star, z_max, p);
}

CrossBounds measure_cross_bounds(const CrossMap& cross, double m, double theta) {
    CrossBounds b;
    const double lo = 1.0 / m, hi = m;
    const double hw = 1e-5 * (hi - lo);
    for (int i = 0; i < 5; ++i) {
        const double w = lo + (hi - lo) * i / 4.0;
        for (double side : {-1.0, 1.0})
            for (double frac : {1.0, 0.5, 0.25, 0.125}) {
                const double zb = side * frac * theta;
                const double hz = 1e-4 * std::fabs(zb);
                const Vec2 c0 = cross.cross(w, zb);
                const Vec2 wp = cross.cross(w + hw, zb), wm = cross.cross(w - hw, zb);
                const Vec2 zp = cross.cross(w, zb + hz), zm = cross.cross(w, zb - hz);
                const double Fw = std::fabs(wp[0] - wm[0]) / (2 * hw), Gw = std::fabs(wp[1] - wm[1]) / (2 * hw);
                const double Fz = std::fabs(zp[0] - zm[0]) / (2 * hz), Gz = std::fabs(zp[1] - zm[1]) / (2 * hz);
                b.Fw = std::max(b.Fw, Fw);
                b.Gw = std::max(b.Gw, Gw);
                b.Fz = std::max(b.Fz, Fz);
                b.Gz = std::max(b.Gz, Gz);
                b.sup_FwGz = std::max(b.sup_FwGz, Fw * Gz);
                if (!(c0[0] >= lo && c0[0] <= hi) || !(std::fabs(c0[1]) <= theta)) b.maps_into = false;
            }
    }
    const double mixed = std::sqrt(b.Fz * b.Gw);
    b.condition1 = std::sqrt(b.sup_FwGz) + mixed;
    b.condition2 = b.Fw + mixed;
    b.lipschitz = b.Gw > 0.0 ? std::sqrt(b.Fz / b.Gw) : (b.Fz > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return b;
}

ComposedCrossMap::ComposedCrossMap(std::shared_ptr<const CrossMap> first, std::shared_ptr<const CrossMap> second,
                                   double K1, double K2)
    : first_(std::move(first)), second_(std::move(second)), k1_(K1), k2_(K2) {
    if (!(K1 * K2 < 1.0)) raise(ErrorKind::NotComposable, "cross-forms compose only when K1 K2 < 1");
}

Vec2 ComposedCrossMap::cross(double x, double yhat) const {
    double ybar = 0.0;
    for (int it = 0; it < 500; ++it) {
        const double xbar = first_->cross(x, ybar)[0];
        const double next = second_->cross(xbar, yhat)[1];
        const bool done = std::fabs(next - ybar) <= 1e-15 * std::max(1.0, std::fabs(next));
        ybar = next;
        if (done) break;
        if (it == 499) raise(ErrorKind::NotComposable, "intermediate coordinate did not converge");
    }
    const double xbar = first_->cross(x, ybar)[0];
    return {second_->cross(xbar, yhat)[0], first_->cross(x, ybar)[1]};
}

double ComposedCrossMap::derivative_bound() const {
    const double s = std::sqrt(k1_ * k2_);
    return s / (1.0 - s);
}

}  // namespace homlab
