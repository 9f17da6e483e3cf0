#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "homlab/linalg.hpp"

namespace homlab {

enum class ErrorKind {
    NonFiniteField,
    StiffnessFailure,
    DomainExit,
    NoCrossing,
    TangencyError,
    NoContraction,
    QuadratureError,
    RegionError,
    LiftError,
    ConsistencyError,
    TubeExit,
    NonTransversal,
    InversionError,
    NotContractive,
    NotComposable,
    DegenerateCoefficients,
    ChartError,
    EmptyCurve,
    PartialResult,
    ConfigError,
    InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    Error(ErrorKind kind, const std::string& what, double t, const State4& x);

    ErrorKind kind() const { return kind_; }
    // Set only for DomainExit and TubeExit.
    std::optional<double> time() const { return t_; }
    std::optional<State4> state() const { return x_; }

private:
    ErrorKind kind_;
    std::optional<double> t_;
    std::optional<State4> x_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& what);

}  // namespace homlab
