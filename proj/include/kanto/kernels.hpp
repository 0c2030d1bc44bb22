#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace kanto {

/// |chi(x)| is exactly 0 for |x| > radius.
struct CompactSupport {
  double radius;
};

/// |chi(x)| <= constant * |x|^-power for |x| >= 1, power > 1.
struct DecaySupport {
  double power;
  double constant;
};

using Support = std::variant<CompactSupport, DecaySupport>;

double eval_sinc(double x);
double eval_fejer(double x);
/// Central B-spline of order k by the alternating truncated-power sum.
/// k = 1 is the half-open indicator of (-1/2, 1/2].
double eval_bspline(int k, double x);

class Kernel1D {
 public:
  enum class Family { Fejer, BSpline, Custom };

  /// Custom kernel. `sup_abs` bounds |chi| globally; `breakpoints` lists
  /// points where chi is not smooth (quadrature panel edges).
  Kernel1D(std::string name, std::function<double(double)> eval, Support support, double sup_abs,
           std::vector<double> breakpoints = {});

  static Kernel1D fejer();
  static Kernel1D bspline(int k);

  double operator()(double x) const;
  /// chi(u - k) for integer k; uses the Fejer sin^2 periodicity to avoid
  /// recomputing the sine across a row of shifts.
  double shifted(double u, long long k, double sin2_half_pi_u) const;
  /// Precomputed helper for `shifted` (sin^2(pi u / 2) for Fejer, unused otherwise).
  double shift_context(double u) const;

  const std::string& name() const { return name_; }
  const Support& support() const { return support_; }
  Family family() const { return family_; }
  int order() const { return order_; }
  bool compact() const { return std::holds_alternative<CompactSupport>(support_); }
  /// Support radius, +inf for decaying kernels.
  double radius() const;
  double sup_abs() const { return sup_abs_; }
  const std::vector<double>& breakpoints() const { return breaks_; }
  /// Period of the oscillation envelope used to align quadrature panels, 0 if none.
  double period() const { return period_; }

  /// sup_u sum over nodes with |u - t_k| > R of |chi(u - t_k)| |u - t_k|^beta,
  /// for nodes with gaps >= delta. +inf when the sum diverges.
  double tail_sum_bound(double R, double delta, double beta = 0.0) const;
  /// sup_u sum_k |chi(u - t_k)| for gaps in [delta, ...).
  double sum_bound(double delta) const;
  /// Smallest R >= 1 (or the support radius) with tail_sum_bound(R) <= tol.
  double radius_for(double tol, double delta, double beta = 0.0) const;
  /// Integral of |chi| over |x| > R, bounded via the decay envelope.
  double integral_tail_bound(double R, double nu = 0.0) const;

 private:
  Kernel1D() = default;
  std::string name_;
  std::function<double(double)> eval_;
  Support support_{CompactSupport{0.0}};
  double sup_abs_ = 0.0;
  std::vector<double> breaks_;
  double period_ = 0.0;
  Family family_ = Family::Custom;
  int order_ = 0;
};

/// chi(x) = prod_i chi_i(x_i).
class KernelND {
 public:
  explicit KernelND(std::vector<Kernel1D> factors);

  double operator()(std::span<const double> x) const;
  std::size_t dim() const { return factors_.size(); }
  const Kernel1D& factor(std::size_t i) const { return factors_[i]; }
  const std::vector<Kernel1D>& factors() const { return factors_; }
  bool compact() const;
  /// Canonical id, e.g. "bspline:3" or "product:(fejer,bspline:2)".
  std::string id() const;

 private:
  std::vector<Kernel1D> factors_;
};

KernelND make_product_kernel(std::vector<Kernel1D> factors);

/// Parses "fejer", "bspline:k", "product:(id,...)". Unknown ids throw
/// std::invalid_argument.
KernelND parse_kernel(const std::string& id);

/// A 1D kernel replicated as an n-fold product; an n-D kernel is returned as is.
KernelND promote(const KernelND& kernel, std::size_t n);

/// Per-axis window radii so that the omitted part of the separable series
/// sum_k |chi(u - t_k)| is at most tol for node gaps >= delta.
std::vector<double> truncation_radii(const KernelND& kernel, double tol, std::span<const double> delta);
/// Euclidean norm of the per-axis radii for unit-gap nodes.
double truncation_radius(const KernelND& kernel, double tol);
/// Bound on the omitted series mass when axis windows are `radii`.
double truncation_tail_bound(const KernelND& kernel, std::span<const double> radii, std::span<const double> delta);

}  // namespace kanto
