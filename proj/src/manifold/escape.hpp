#pragma once

#include "homlab/error.hpp"

namespace homlab::detail {

// Failures meaning a sampled point is not carried across the rectangle.
inline bool escape(ErrorKind k) {
    return k == ErrorKind::DomainExit || k == ErrorKind::InversionError || k == ErrorKind::NoCrossing ||
           k == ErrorKind::ChartError || k == ErrorKind::TubeExit;
}

}  // namespace homlab::detail
