#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kanto/box.hpp"

namespace kanto {

/// Strictly increasing node sequence t_k, k in Z, along one axis.
class AxisNodes {
 public:
  enum class Rule { Uniform, JitterSin, JitterHash, Tabulated };

  static AxisNodes uniform();
  /// t_k = k + a sin k. Requires 0 <= a < 1/2.
  static AxisNodes jitter_sin(double a);
  /// t_k = k + a rho(k), rho in [-1, 1] from a seeded splitmix64 hash.
  static AxisNodes jitter_hash(double a, std::uint64_t seed);
  /// t_k = table[k] for 0 <= k < size; beyond the table nodes continue with
  /// the largest tabulated gap unless `strict`, in which case node() throws.
  static AxisNodes tabulated(std::vector<double> table, bool strict = false);

  double node(long long k) const;
  /// Largest k with t_k <= t.
  long long lower_index(double t) const;
  double delta() const { return delta_; }
  double Delta() const { return Delta_; }
  Rule rule() const { return rule_; }
  double amplitude() const { return amplitude_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& table() const { return table_; }
  bool strict() const { return strict_; }
  /// Human readable description of the rule and its extension policy.
  std::string describe() const;

 private:
  AxisNodes() = default;
  Rule rule_ = Rule::Uniform;
  double amplitude_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<double> table_;
  bool strict_ = false;
  double delta_ = 1.0, Delta_ = 1.0;
};

/// R_k^w: product of [t_{k_i}/w, t_{k_i+1}/w].
struct Cell {
  std::vector<double> lo, hi;
  double measure = 0.0;
  Box box() const { return Box(lo, hi); }
};

struct IndexRange {
  long long first = 0, last = -1;  // inclusive; empty when last < first
  long long size() const { return last >= first ? last - first + 1 : 0; }
};

/// The node family Pi^n: one AxisNodes per axis.
class SamplingScheme {
 public:
  SamplingScheme(std::vector<AxisNodes> axes, std::string spec = "");
  static SamplingScheme uniform(std::size_t n);

  std::size_t dim() const { return axes_.size(); }
  const AxisNodes& axis(std::size_t i) const { return axes_[i]; }
  bool is_uniform() const;
  /// Per-axis min / max gaps.
  std::vector<double> deltas() const;
  std::vector<double> Deltas() const;
  /// min over axes of delta and max of Delta.
  double delta() const;
  double Delta() const;
  const std::string& spec() const { return spec_; }

  std::vector<double> node(std::span<const long long> k) const;
  Cell cell(std::span<const long long> k, double w) const;
  /// Per-axis index intervals of all cells whose closure meets the box.
  std::vector<IndexRange> cells_in_box(double w, const Box& box) const;

 private:
  std::vector<AxisNodes> axes_;
  std::string spec_;
};

/// Parses "uniform", "jitter:sin:a=A", "jitter:hash:a=A:seed=S",
/// "table:path.csv[:strict]". The CSV holds one node per line; axis blocks
/// are separated by blank lines and a single block is reused for all axes.
SamplingScheme parse_scheme(const std::string& spec, std::size_t n);

}  // namespace kanto
