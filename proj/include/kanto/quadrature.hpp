#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "kanto/box.hpp"

namespace kanto {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point Gauss-Legendre rule; Newton iteration on P_n. n >= 1.
const GaussRule& gauss_legendre(int n);

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;      // summed |K15 - G7| over the final partition
  bool converged = false;  // error <= max(abs_tol, rel_tol*|value|) within budget
  std::size_t regions = 0;
};

struct AdaptiveOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  std::size_t max_regions = 200000;
};

using Fn1 = std::function<double(double)>;
using FnN = std::function<double(std::span<const double>)>;

/// Globally adaptive Gauss-Kronrod 7-15 on [a, b].
IntegrationResult integrate_adaptive(const Fn1& f, double a, double b, const AdaptiveOptions& opt = {});

/// Same, seeded with the panels between consecutive breakpoints (sorted,
/// at least two). Initial panels are evaluated concurrently.
IntegrationResult integrate_panels(const Fn1& f, std::span<const double> breakpoints, const AdaptiveOptions& opt = {});

/// Uniform panels of width at most `panel` on [a, b], aligned so that every
/// multiple of `panel` inside [a, b] is a breakpoint.
std::vector<double> aligned_breakpoints(double a, double b, double panel);

/// Tensor Gauss-Kronrod adaptive cubature over a box. Regions are bisected in
/// every axis. `axis_breaks[i]`, when given, seeds the initial partition.
IntegrationResult integrate_box(const FnN& f, const Box& box, const AdaptiveOptions& opt = {},
                                const std::vector<std::vector<double>>& axis_breaks = {});

/// Fixed tensor Gauss-Legendre of `order` points per axis over a box.
double integrate_gauss(const FnN& f, const Box& box, int order);

}  // namespace kanto
