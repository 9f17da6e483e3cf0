#pragma once

#include <array>
#include <cstddef>

namespace homlab {

// Forward-mode dual number carrying N directional derivatives.
template <std::size_t N>
struct Dual {
    double v = 0.0;
    std::array<double, N> d{};

    Dual() = default;
    Dual(double value) : v(value) {}  // NOLINT: constants promote implicitly

    static Dual variable(double value, std::size_t slot) {
        Dual r(value);
        r.d[slot] = 1.0;
        return r;
    }
};

template <std::size_t N>
Dual<N> operator+(const Dual<N>& a, const Dual<N>& b) {
    Dual<N> r(a.v + b.v);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
}

template <std::size_t N>
Dual<N> operator-(const Dual<N>& a, const Dual<N>& b) {
    Dual<N> r(a.v - b.v);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
}

template <std::size_t N>
Dual<N> operator-(const Dual<N>& a) {
    Dual<N> r(-a.v);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
}

template <std::size_t N>
Dual<N> operator*(const Dual<N>& a, const Dual<N>& b) {
    Dual<N> r(a.v * b.v);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}

template <std::size_t N>
Dual<N> operator+(const Dual<N>& a, double b) { return a + Dual<N>(b); }
template <std::size_t N>
Dual<N> operator+(double a, const Dual<N>& b) { return Dual<N>(a) + b; }
template <std::size_t N>
Dual<N> operator-(const Dual<N>& a, double b) { return a - Dual<N>(b); }
template <std::size_t N>
Dual<N> operator-(double a, const Dual<N>& b) { return Dual<N>(a) - b; }
template <std::size_t N>
Dual<N> operator*(const Dual<N>& a, double b) {
    Dual<N> r(a.v * b);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] * b;
    return r;
}
template <std::size_t N>
Dual<N> operator*(double a, const Dual<N>& b) { return b * a; }
template <std::size_t N>
Dual<N> operator/(const Dual<N>& a, double b) { return a * (1.0 / b); }

}  // namespace homlab
