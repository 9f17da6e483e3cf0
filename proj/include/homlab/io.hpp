#pragma once

#include <string>

namespace homlab {

// Shortest representation that round-trips to the same double.
std::string format_double(double x);

}  // namespace homlab
