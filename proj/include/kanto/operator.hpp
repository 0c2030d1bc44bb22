#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kanto/box.hpp"
#include "kanto/kernels.hpp"
#include "kanto/sampling.hpp"
#include "kanto/signal.hpp"

namespace kanto {

struct OperatorConfig {
  KernelND kernel;
  SamplingScheme scheme;
  double tolerance = 1e-8;   // series truncation tolerance (ignored by compact kernels)
  int quadrature_order = 8;  // Gauss-Legendre points per axis for analytic cell means
  bool check_quadrature = false;
};

void validate(const OperatorConfig& cfg);

/// Tensor grid with endpoint-inclusive nodes; a single node sits at the centre.
struct GridSpec {
  Box box;
  std::vector<std::size_t> resolution;
};

std::vector<double> grid_axis(const GridSpec& grid, std::size_t axis);

struct Evaluation {
  double value = 0.0;
  double truncation_bound = 0.0;  // |value - full series| <= this
};

/// Values in grid order, axis 0 fastest.
struct Field {
  std::vector<double> values;
  std::vector<std::size_t> shape;
  double truncation_bound = 0.0;
  bool quadrature_converged = true;
};

/// S_w f restricted to a region: cell means over every index that can reach
/// the region are computed once, then points or tensor grids are contracted
/// axis by axis. For Replicate grid signals the cells beyond each edge share
/// one mean per axis and are lumped into extra slots.
class SeriesEvaluator {
 public:
  SeriesEvaluator(const OperatorConfig& cfg, const Signal& f, double w, const Box& region);

  /// x must lie in the region.
  double operator()(std::span<const double> x) const;
  Field grid(const GridSpec& grid) const;

  double truncation_bound() const { return truncation_bound_; }
  bool quadrature_converged() const { return converged_; }
  double w() const { return w_; }
  /// Index window {k : |w x_i - t_{k_i}| <= R_i} per axis.
  std::vector<IndexRange> window(std::span<const double> x) const;
  const std::vector<double>& radii() const { return radii_; }
  /// Explicitly summed indices per axis (without lumped edge slots).
  const std::vector<IndexRange>& explicit_ranges() const { return ranges_; }
  /// Sum of |cell mean| over the explicitly stored cells.
  double abs_mean_sum() const;

 private:
  struct Band {
    std::size_t begin = 0;  // first slot
    std::vector<double> weights;
  };
  Band band(std::size_t axis, double x) const;
  std::size_t slots(std::size_t axis) const;

  OperatorConfig cfg_;
  double w_;
  Box region_;
  std::vector<double> radii_;
  std::vector<IndexRange> ranges_;
  std::vector<bool> lumped_;
  std::vector<double> means_;
  double truncation_bound_ = 0.0;
  bool converged_ = true;
};

Evaluation apply(const OperatorConfig& cfg, const Signal& f, double w, std::span<const double> x);
Field apply_grid(const OperatorConfig& cfg, const Signal& f, double w, const GridSpec& grid);
/// Scattered evaluation; one evaluator covers the bounding box of the points.
std::vector<double> apply_points(const OperatorConfig& cfg, const Signal& f, double w,
                                 const std::vector<std::vector<double>>& points, double* truncation_bound = nullptr);

}  // namespace kanto
