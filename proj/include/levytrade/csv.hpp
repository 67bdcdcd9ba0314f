#pragma once

#include <string>
#include <vector>

namespace levytrade {

/// Float formatting used by every CSV artifact: 6 significant digits.
std::string fmt6(double value);

/// Joins fields with commas, no quoting (fields never contain commas).
std::string csv_row(const std::vector<std::string>& fields);

}  // namespace levytrade
