#pragma once

#include <span>

namespace cadoc {

// Sample Pearson correlation. Throws on length mismatch, fewer than two
// points, or a zero-variance argument.
double pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace cadoc
