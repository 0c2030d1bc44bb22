#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace kanto {

/// A certified rate exponent: either a finite value or Exact, meaning the
/// condition holds for every exponent (it is dropped from rate minima).
class Exponent {
 public:
  static Exponent exact() { return Exponent(true, std::numeric_limits<double>::infinity()); }
  static Exponent of(double v) {
    if (!(v >= 0.0)) throw std::invalid_argument("Exponent: value must be nonnegative");
    return Exponent(false, v);
  }

  bool is_exact() const { return exact_; }
  /// +inf for Exact.
  double value() const { return value_; }

  std::string to_string() const { return exact_ ? "exact" : std::to_string(value_); }

  friend bool operator==(const Exponent&, const Exponent&) = default;

 private:
  Exponent(bool e, double v) : exact_(e), value_(v) {}
  bool exact_;
  double value_;
};

}  // namespace kanto
