#pragma once

#include <vector>

namespace oracle {

// Average-depth ask ladder: sizes ascending and the VWAP depth of each size.
// Returns the ladder after inserting `slice` units at `price` into the
// unit-by-unit marginal price list and re-averaging the cheapest units.
std::vector<double> vwap_insert(const std::vector<int>& sizes, const std::vector<double>& depths, int slice,
                                double price);

}  // namespace oracle
