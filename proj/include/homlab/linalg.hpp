#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace homlab {

// Coordinate order is (u1, u2, v1, v2) everywhere.
using State4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;
using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

enum Coord : std::size_t { U1 = 0, U2 = 1, V1 = 2, V2 = 3 };

template <std::size_t N>
std::array<double, N> operator+(const std::array<double, N>& a, const std::array<double, N>& b) {
    std::array<double, N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
    return r;
}

template <std::size_t N>
std::array<double, N> operator-(const std::array<double, N>& a, const std::array<double, N>& b) {
    std::array<double, N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
    return r;
}

template <std::size_t N>
std::array<double, N> operator*(double s, const std::array<double, N>& a) {
    std::array<double, N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
    return r;
}

template <std::size_t N>
double dot(const std::array<double, N>& a, const std::array<double, N>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

template <std::size_t N>
double norm_inf(const std::array<double, N>& a) {
    double m = 0.0;
    for (double x : a) m = std::fmax(m, std::fabs(x));
    return m;
}

template <std::size_t N>
double norm2(const std::array<double, N>& a) {
    return std::sqrt(dot(a, a));
}

template <std::size_t N>
bool all_finite(const std::array<double, N>& a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

inline Mat4 identity4() {
    Mat4 m{};
    for (std::size_t i = 0; i < 4; ++i) m[i][i] = 1.0;
    return m;
}

inline State4 mul(const Mat4& m, const State4& x) {
    State4 r{};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) r[i] += m[i][j] * x[j];
    return r;
}

inline Mat4 mul(const Mat4& a, const Mat4& b) {
    Mat4 r{};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t k = 0; k < 4; ++k)
            for (std::size_t j = 0; j < 4; ++j) r[i][j] += a[i][k] * b[k][j];
    return r;
}

double det(const Mat4& m);

inline Vec2 mul(const Mat2& m, const Vec2& x) {
    return {m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]};
}

inline double det(const Mat2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

// Solves m·x = rhs by Cramer's rule; caller checks det beforehand.
inline Vec2 solve(const Mat2& m, const Vec2& rhs) {
    const double d = det(m);
    return {(rhs[0] * m[1][1] - m[0][1] * rhs[1]) / d, (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / d};
}

inline Mat2 inverse(const Mat2& m) {
    const double d = det(m);
    return {{{m[1][1] / d, -m[0][1] / d}, {-m[1][0] / d, m[0][0] / d}}};
}

// (u1, u2, v1, v2) -> (-u1, u2, -v1, v2)
inline State4 sigma_z2(const State4& x) { return {-x[0], x[1], -x[2], x[3]}; }
// (u1, u2, v1, v2) -> (u1, -u2, v1, -v2)
inline State4 sigma_2(const State4& x) { return {x[0], -x[1], x[2], -x[3]}; }

}  // namespace homlab
