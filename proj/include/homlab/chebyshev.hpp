#pragma once

#include <cstddef>
#include <vector>

namespace homlab {

// Chebyshev–Lobatto nodes on [0, 1] in ascending order with the cumulative
// integration matrix of the degree n−1 interpolant (Clenshaw–Curtis weights are
// its last row).
class ChebyshevGrid {
public:
    explicit ChebyshevGrid(std::size_t n);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }

    // out[k] = ∫_0^{s_k L} g, with g sampled at the scaled nodes of [0, L].
    void cumulative(const double* g, double length, double* out) const;
    // out[k] = ∫_{s_k L}^{L} g.
    void reverse_cumulative(const double* g, double length, double* out) const;
    double integral(const double* g, double length) const;
    // Barycentric interpolation at s ∈ [0, 1].
    double interpolate(const double* values, double s) const;

    // Process-wide cache; grids are immutable once built.
    static const ChebyshevGrid& shared(std::size_t n);

private:
    std::vector<double> nodes_;
    std::vector<double> bary_;
    std::vector<double> cum_;  // row-major n × n on [0, 1]
};

}  // namespace homlab
