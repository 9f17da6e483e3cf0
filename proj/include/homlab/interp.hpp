#pragma once

#include <vector>

namespace homlab {

// Fritsch–Carlson monotone piecewise-cubic Hermite interpolant on strictly
// increasing nodes; monotone data stay monotone between nodes.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);
    // Constant extrapolation outside [x.front(), x.back()].
    double operator()(double xq) const;

private:
    std::vector<double> x_, y_, m_;
};

}  // namespace homlab
