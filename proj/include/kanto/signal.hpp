#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kanto/box.hpp"
#include "kanto/sampling.hpp"

namespace kanto {

/// A field function R^n -> R. When `support` is set the function is taken to
/// vanish outside it; `bound` is a certified sup |f| used for truncation error.
struct Analytic {
  std::function<double(std::span<const double>)> fn;
  std::size_t dim = 1;
  std::optional<Box> support;
  std::optional<double> bound;
  std::string tag;
};

enum class Boundary { Zero, Replicate };

/// Piecewise constant data on pixels [o_i + j h, o_i + (j+1) h). Axis 0 is
/// stored fastest. Outside the grid the value is 0 (Zero) or the nearest
/// edge pixel (Replicate).
struct GridSignal {
  std::vector<double> origin;
  double h = 1.0;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  Boundary boundary = Boundary::Zero;

  std::size_t dim() const { return shape.size(); }
  Box extent() const;
  double at(std::span<const std::size_t> idx) const;
};

using Signal = std::variant<Analytic, GridSignal>;

std::size_t signal_dim(const Signal& f);
double evaluate(const Signal& f, std::span<const double> x);
/// Box outside which f vanishes, if any.
std::optional<Box> signal_support(const Signal& f);
/// Certified sup |f|, if known.
std::optional<double> signal_bound(const Signal& f);
/// Checks the GridSignal layout and finiteness; throws std::invalid_argument.
void validate(const Signal& f);

struct MeanValue {
  double value = 0.0;
  bool converged = true;  // orders q and q+1 agree to 1e-8 relative (exact for grids)
};

/// (w^n / A_k) * integral of f over the cell, i.e. the cell average.
MeanValue mean_value(const Signal& f, const Cell& cell, int order);
/// Cell average without the convergence check (single quadrature order).
double mean_value_fast(const Signal& f, const Cell& cell, int order);

}  // namespace kanto
