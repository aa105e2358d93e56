#pragma once

#include <string>

namespace defectmc {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

} // namespace defectmc
