#pragma once

#include <string>
#include <vector>

#include "pareidolia/types.hpp"

namespace pareidolia::csv {

/// Curve as CSV with 17-significant-digit values (round-trips doubles
/// exactly).  The ci column is emitted only when `ci_name` is nonempty.
std::string write_curve(const Curve& curve, const std::string& x_name,
                        const std::string& y_name, const std::string& ci_name = "");

/// Reads a 2- or 3-column numeric CSV with one header line back into a Curve.
Curve read_curve(const std::string& content);

}  // namespace pareidolia::csv
