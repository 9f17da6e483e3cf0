#include "homlab/error.hpp"

namespace homlab {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NonFiniteField: return "NonFiniteField";
        case ErrorKind::StiffnessFailure: return "StiffnessFailure";
        case ErrorKind::DomainExit: return "DomainExit";
        case ErrorKind::NoCrossing: return "NoCrossing";
        case ErrorKind::TangencyError: return "TangencyError";
        case ErrorKind::NoContraction: return "NoContraction";
        case ErrorKind::QuadratureError: return "QuadratureError";
        case ErrorKind::RegionError: return "RegionError";
        case ErrorKind::LiftError: return "LiftError";
        case ErrorKind::ConsistencyError: return "ConsistencyError";
        case ErrorKind::TubeExit: return "TubeExit";
        case ErrorKind::NonTransversal: return "NonTransversal";
        case ErrorKind::InversionError: return "InversionError";
        case ErrorKind::NotContractive: return "NotContractive";
        case ErrorKind::NotComposable: return "NotComposable";
        case ErrorKind::DegenerateCoefficients: return "DegenerateCoefficients";
        case ErrorKind::ChartError: return "ChartError";
        case ErrorKind::EmptyCurve: return "EmptyCurve";
        case ErrorKind::PartialResult: return "PartialResult";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

Error::Error(ErrorKind kind, const std::string& what, double t, const State4& x)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), t_(t), x_(x) {}

void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

double det(const Mat4& m) {
    // Gaussian elimination with partial pivoting on a copy.
    Mat4 a = m;
    double d = 1.0;
    for (std::size_t c = 0; c < 4; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < 4; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
        if (a[p][c] == 0.0) return 0.0;
        if (p != c) {
            std::swap(a[p], a[c]);
            d = -d;
        }
        d *= a[c][c];
        for (std::size_t r = c + 1; r < 4; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < 4; ++k) a[r][k] -= f * a[c][k];
        }
    }
    return d;
}

}  // namespace homlab
