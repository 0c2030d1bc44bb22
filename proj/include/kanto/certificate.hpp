#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kanto/exponent.hpp"
#include "kanto/kernels.hpp"
#include "kanto/sampling.hpp"

namespace kanto {

struct MomentOptions {
  double tol = 1e-6;          // target for the certified tail of the series
  double max_radius = 1e6;    // per-axis window cap (1D); n-D uses its n-th root
  double search_extent = 8.0; // half width of the sup search box for non-uniform schemes
};

struct MomentEstimate {
  double value = 0.0;       // sup of the truncated series over the search grid
  double tail_bound = 0.0;  // certified bound on the omitted part, +inf when divergent
  bool divergent = false;
  std::vector<double> argmax;
};

/// Grid search for sup_u sum_k |chi(u - t_k)| |u - t_k|_2^beta, with a
/// parabolic refinement step per axis at the best node.
MomentEstimate discrete_moment(const KernelND& kernel, const SamplingScheme& scheme, double beta, double grid_step,
                               const MomentOptions& opt = {});

struct PartitionDeviation {
  std::vector<double> w;
  std::vector<double> deviation;   // sup over the test grid of |truncated A_w - 1|
  std::vector<double> tail_bound;  // certified omitted mass
  Exponent mu = Exponent::exact();
  double r2 = 1.0;
};

/// Test grid: `points` nodes per axis on [0, 1]^n.
PartitionDeviation partition_deviation(const KernelND& kernel, const SamplingScheme& scheme, const std::vector<double>& w_list,
                                       double tol = 1e-5, std::size_t points = 257);

struct TailMass {
  std::vector<double> w, values, errors;
  Exponent alpha = Exponent::exact();
  double r2 = 1.0;
};

/// Integral of w^n |chi(w u)| over |u|_2 > M, i.e. of |chi| over |t|_2 > w M.
TailMass tail_mass(const KernelND& kernel, double M, const std::vector<double>& w_list);

struct WeightedTailMoment {
  std::vector<double> w, values;
  double theta = 0.0;
  double r2 = 0.0;
};

/// Integral over |t|_2 <= gamma of w^n |chi(w t)| |t|_2^nu, with theta fitted
/// from at least 3 values of w.
WeightedTailMoment weighted_tail_moment(const KernelND& kernel, double nu, double gamma, const std::vector<double>& w_list);

/// Integral of |chi(u)| |u|_2^nu; +inf when a decaying factor has p - nu <= 1.
double continuous_moment(const KernelND& kernel, double nu);

/// prod_i |chi_i|_1.
double l1_norm(const KernelND& kernel);

/// Integral of |chi| over [-R, R] per factor plus the decay-envelope tail bound.
struct TruncatedL1 {
  double value = 0.0, tail_bound = 0.0;
};
TruncatedL1 truncated_l1(const Kernel1D& kernel, double R);

/// |chi_hat(2 pi k) - delta_{k0}| for k in [kmin, kmax].
std::map<int, double> fourier_check(const Kernel1D& kernel, int kmin, int kmax);

struct CertifyOptions {
  std::vector<double> betas{0.5, 1.0};
  std::vector<double> nus{0.5, 1.0};
  std::vector<double> w_list{4, 8, 16, 32, 64, 128, 256};
  double M = 1.0;
  double gamma = 1.0;
  double grid_step = 0.0;  // 0 picks 1e-3 for compact kernels, 1e-2 otherwise
  MomentOptions moments{};
  double partition_tol = 1e-5;
  int fourier_k = 3;
};

struct Condition {
  bool ok = false;
  std::string detail;
};

struct KernelCertificate {
  std::string kernel_id;
  std::string scheme_spec;
  double l1 = 0.0;
  MomentEstimate m0;
  std::map<double, MomentEstimate> m_beta;
  PartitionDeviation partition;
  TailMass tail;
  std::map<double, WeightedTailMoment> theta;
  std::map<double, double> continuous;
  std::vector<std::map<int, double>> fourier;  // one per factor
  std::map<std::string, Condition> conditions;
  CertifyOptions config;
  std::vector<double> unit_deltas;
  KernelND kernel{std::vector<Kernel1D>{Kernel1D::bspline(1)}};

  /// Truncation radius of the certified kernel for a given tolerance.
  double truncation_radius(double tol) const;
  /// chi1..chi4 all hold.
  bool certified() const;
  nlohmann::json to_json() const;
};

KernelCertificate certify_kernel(const KernelND& kernel, const SamplingScheme& scheme, const CertifyOptions& opt = {});

/// "0.5", "1", "2.25": shortest decimal form used for JSON keys.
std::string format_key(double v);

}  // namespace kanto
