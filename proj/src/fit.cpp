#include "kanto/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kanto {

SlopeFit fit_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw std::invalid_argument("fit_slope: at least 3 points required");
  double sx = 0, sy = 0;
  for (const auto& [w, v] : points) {
    if (!(w > 0.0) || !(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("fit_slope: abscissae and values must be positive and finite");
    sx += std::log(w);
    sy += std::log(v);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [w, v] : points) {
    const double dx = std::log(w) - mx, dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_slope: abscissae must not all coincide");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  // Residual form keeps R^2 in [0, 1]; a flat series is fitted exactly.
  double sse = 0;
  for (const auto& [w, v] : points) {
    const double r = std::log(v) - (fit.intercept + fit.slope * std::log(w));
    sse += r * r;
  }
  fit.r2 = syy <= 1e-300 ? 1.0 : std::clamp(1.0 - sse / syy, 0.0, 1.0);
  return fit;
}

}  // namespace kanto
