#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kanto {

/// Axis-aligned closed box [lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> lower, std::vector<double> upper) : lo(std::move(lower)), hi(std::move(upper)) {
    if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("Box: corner dimensions differ or are empty");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] <= hi[i])) throw std::invalid_argument("Box: lower corner exceeds upper corner");
  }

  /// Cube [lo, hi]^n.
  static Box cube(std::size_t n, double lower, double upper) {
    return Box(std::vector<double>(n, lower), std::vector<double>(n, upper));
  }

  std::size_t dim() const { return lo.size(); }
  double width(std::size_t i) const { return hi[i] - lo[i]; }

  double measure() const {
    double m = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) m *= hi[i] - lo[i];
    return m;
  }

  bool contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
  }

  Box padded(double margin) const {
    Box b = *this;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      b.lo[i] -= margin;
      b.hi[i] += margin;
    }
    return b;
  }
};

inline std::string to_string(const Box& b) {
  std::string s;
  for (std::size_t i = 0; i < b.dim(); ++i) {
    if (i) s += "x";
    s += "[" + std::to_string(b.lo[i]) + "," + std::to_string(b.hi[i]) + "]";
  }
  return s;
}

}  // namespace kanto
