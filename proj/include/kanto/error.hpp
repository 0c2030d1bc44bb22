#pragma once

#include <stdexcept>

namespace kanto {

/// Adaptive quadrature exhausted its refinement budget before meeting tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed external input: PGM bytes, node tables, spec strings.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kanto
