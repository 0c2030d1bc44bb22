#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kanto/box.hpp"
#include "kanto/operator.hpp"
#include "kanto/quadrature.hpp"
#include "kanto/signal.hpp"

namespace kanto {

class PhiFunction {
 public:
  enum class Kind { Power, AlphaBeta, Exponential, Custom };

  /// u^p, p >= 1.
  static PhiFunction power(double p);
  /// u^alpha log^beta(u + e), alpha >= 1, beta > 0.
  static PhiFunction alpha_beta(double alpha, double beta);
  /// exp(u^gamma) - 1, gamma > 0.
  static PhiFunction exponential(double gamma);
  /// Arbitrary phi; `convex` is the caller's claim.
  static PhiFunction custom(std::function<double(double)> fn, bool convex, std::string name = "custom");

  /// Throws std::invalid_argument for u < 0.
  double operator()(double u) const;
  Kind kind() const { return kind_; }
  bool convex() const { return convex_; }
  const std::string& name() const { return name_; }
  double p() const { return a_; }
  /// Exponent q with phi(lambda u) = lambda^q phi(u), if phi is a power.
  bool homogeneous() const { return kind_ == Kind::Power; }

 private:
  PhiFunction() = default;
  Kind kind_ = Kind::Power;
  double a_ = 1.0, b_ = 0.0;
  bool convex_ = true;
  std::function<double(double)> fn_;
  std::string name_;
};

/// "p:2", "ab:1:1", "exp:1".
PhiFunction parse_phi(const std::string& spec);

using Field1 = std::function<double(std::span<const double>)>;

struct QuadratureSpec {
  AdaptiveOptions options{1e-13, 1e-9, 400000};
  /// Optional initial per-axis partition (see integrate_box).
  std::vector<std::vector<double>> axis_breaks;
};

/// I^phi[g] over a box containing the support of g. Throws ConvergenceError
/// when the refinement budget runs out.
double modular(const PhiFunction& phi, const Field1& g, const Box& domain, const QuadratureSpec& quad = {});
/// Same, returning the quadrature result without throwing.
IntegrationResult modular_estimate(const PhiFunction& phi, const Field1& g, const Box& domain, const QuadratureSpec& quad = {});

/// I^phi[lambda (approx - f)].
double modular_error(const PhiFunction& phi, double lambda, const Signal& f, const Field1& approx, const Box& domain,
                     const QuadratureSpec& quad = {});

/// max |approx - f| over grid nodes; a lower bound for the sup norm.
double sup_error(const Signal& f, const Field1& approx, const GridSpec& grid);

struct TestFunction {
  enum class Family { Hat, Cusp, GaussianTruncated, Indicator, Constant };
  Family family = Family::Cusp;
  std::size_t dim = 1;
  double nu = 1.0;  // declared Hoelder exponent
  Box support;      // for Constant: the box on which the function is sampled
  double sup = 1.0;
  Field1 fn;

  /// Analytic signal carrying support and bound (Constant has no support).
  Signal signal() const;
  double operator()(std::span<const double> x) const { return fn(x); }
};

/// ((1 - |x|_2)_+)^nu on the unit ball.
TestFunction make_cusp(double nu, std::size_t n);
/// make_cusp(1, n).
TestFunction make_hat(std::size_t n);
/// Indicator of [-half_width, half_width]^n; Hoelder exponent 0 in sup norm.
TestFunction make_indicator(std::size_t n, double half_width = 0.5);
/// exp(-|x|^2 / (2 s^2)) - exp(-1/(2 s^2)) clipped to the unit ball; Lipschitz.
TestFunction make_truncated_gaussian(std::size_t n, double s = 0.4);
/// f == c everywhere.
TestFunction make_constant(std::size_t n, double c, double half_extent = 1.0);
/// "hat", "cusp" (uses nu), "indicator", "gaussian", "constant".
TestFunction make_test_function(const std::string& family, double nu, std::size_t n);

struct HolderMode {
  enum class Kind { Sup, Modular };
  Kind kind = Kind::Sup;
  PhiFunction phi = PhiFunction::power(1.0);
  double lambda = 1.0;
};

struct HolderEstimate {
  double exponent = 0.0;
  double r2 = 0.0;
  std::vector<double> norms, differences;
};

/// Fits log diff(t) against log |t|_2 where diff is the sup (grid of spacing
/// |t|/16) or modular difference of f and f(. + t). Needs at least 3 offsets
/// whose norms span 2 decades.
HolderEstimate holder_estimate(const TestFunction& f, const std::vector<std::vector<double>>& offsets, const HolderMode& mode);

}  // namespace kanto
