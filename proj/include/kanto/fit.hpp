#pragma once

#include <span>
#include <utility>

namespace kanto {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares line through (ln w, ln value). Needs at least 3 points with
/// positive w and value; throws std::invalid_argument otherwise. R^2 of a
/// perfectly constant series is reported as 1.
SlopeFit fit_slope(std::span<const std::pair<double, double>> points);

}  // namespace kanto
