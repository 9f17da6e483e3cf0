#include "homlab/chebyshev.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "homlab/error.hpp"

namespace homlab {

ChebyshevGrid::ChebyshevGrid(std::size_t n) {
    if (n < 3) raise(ErrorKind::InvalidArgument, "Chebyshev grid needs at least 3 nodes");
    const std::size_t N = n - 1;
    const double pi = std::numbers::pi;
    nodes_.resize(n);
    bary_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        nodes_[j] = 0.5 * (1.0 - std::cos(pi * double(j) / double(N)));
        bary_[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == N) ? 0.5 : 1.0);
    }
    nodes_.front() = 0.0;
    nodes_.back() = 1.0;

    // T_k(x_j) with x_j = 2 s_j − 1 = −cos(π j / N).
    std::vector<double> T((N + 2) * n);
    for (std::size_t k = 0; k <= N + 1; ++k)
        for (std::size_t j = 0; j < n; ++j)
            T[k * n + j] = ((k % 2 == 0) ? 1.0 : -1.0) * std::cos(pi * double(k * j % (2 * N)) / double(N));

    cum_.assign(n * n, 0.0);
    std::vector<double> c(N + 3), b(N + 2);
    for (std::size_t j = 0; j < n; ++j) {
        const double wj = (j == 0 || j == N) ? 0.5 : 1.0;
        for (std::size_t k = 0; k <= N; ++k) c[k] = 2.0 / double(N) * wj * T[k * n + j];
        c[0] *= 0.5;
        c[N] *= 0.5;
        c[N + 1] = c[N + 2] = 0.0;
        b[0] = 0.0;
        b[1] = c[0] - 0.5 * c[2];
        for (std::size_t k = 2; k <= N + 1; ++k) b[k] = (c[k - 1] - c[k + 1]) / (2.0 * double(k));
        // T_k(−1) = (−1)^k fixes the constant.
        double at_left = 0.0;
        for (std::size_t k = 1; k <= N + 1; ++k) at_left += (k % 2 == 0 ? b[k] : -b[k]);
        for (std::size_t i = 0; i < n; ++i) {
            double v = 0.0;
            for (std::size_t k = 1; k <= N + 1; ++k) v += b[k] * T[k * n + i];
            // Jacobian of x = 2 s − 1.
            cum_[i * n + j] = 0.5 * (v - at_left);
        }
    }
    for (std::size_t j = 0; j < n; ++j) cum_[j] = 0.0;
}

void ChebyshevGrid::cumulative(const double* g, double length, double* out) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = &cum_[i * n];
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * g[j];
        out[i] = length * s;
    }
}

void ChebyshevGrid::reverse_cumulative(const double* g, double length, double* out) const {
    const std::size_t n = size();
    const double* last = &cum_[(n - 1) * n];
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = &cum_[i * n];
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += (last[j] - row[j]) * g[j];
        out[i] = length * s;
    }
}

double ChebyshevGrid::integral(const double* g, double length) const {
    const std::size_t n = size();
    const double* last = &cum_[(n - 1) * n];
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += last[j] * g[j];
    return length * s;
}

double ChebyshevGrid::interpolate(const double* values, double s) const {
    const std::size_t n = size();
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = s - nodes_[j];
        if (d == 0.0) return values[j];
        const double w = bary_[j] / d;
        num += w * values[j];
        den += w;
    }
    return num / den;
}

const ChebyshevGrid& ChebyshevGrid::shared(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, std::unique_ptr<ChebyshevGrid>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<ChebyshevGrid>(n);
    return *slot;
}

}  // namespace homlab
