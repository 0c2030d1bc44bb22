#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kanto/box.hpp"
#include "kanto/exponent.hpp"
#include "kanto/fit.hpp"
#include "kanto/kernels.hpp"
#include "kanto/sampling.hpp"
#include "kanto/spaces.hpp"

namespace kanto {

enum class RateMode { Uniform, Orlicz, OrliczCompact, OrliczMoment };

std::string to_string(RateMode mode);

/// Predicted decay exponent for a mode. Exact exponents drop out of the
/// minimum; an exponent the mode needs but that is missing throws
/// std::invalid_argument.
double predicted_exponent(double nu, std::optional<Exponent> beta, std::optional<Exponent> mu,
                          std::optional<Exponent> alpha, std::optional<Exponent> theta, RateMode mode);

struct ErrorMode {
  enum class Kind { Sup, Modular };
  Kind kind = Kind::Sup;
  PhiFunction phi = PhiFunction::power(1.0);
  double lambda = 1.0;

  static ErrorMode sup() { return {}; }
  static ErrorMode modular(PhiFunction phi, double lambda = 1.0) { return {Kind::Modular, std::move(phi), lambda}; }
  std::string describe() const;
};

struct RateExperiment {
  std::string kernel_id = "bspline:3";
  std::string scheme_spec = "uniform";
  std::string function = "hat";  // family name accepted by make_test_function
  double nu = 1.0;
  std::size_t dim = 1;
  ErrorMode mode;
  std::vector<double> w{4, 8, 16, 32, 64, 128, 256};
  /// Sup-mode reporting box; defaults to the support doubled about its centre.
  std::optional<Box> box;
  std::size_t resolution = 2049;  // grid nodes per axis (sup mode)
  double tolerance = 1e-8;        // series truncation tolerance
  int quadrature_order = 8;
  /// Modular mode: the certified tail outside the integration box is kept
  /// below this fraction of the integral over the inner box.
  double tail_fraction = 0.01;
  double slack_factor = 10.0;  // rows with error <= factor * slack are not fitted
};

/// Throws std::invalid_argument naming the first offending field.
void validate(const RateExperiment& exp);

struct RateRow {
  double w = 0.0;
  double error = 0.0;
  double slack = 0.0;  // truncation, tail and quadrature allowance
  bool fitted = false;
  bool quadrature_converged = true;
};

/// Exponents that enter the predicted rate.
struct RateExponents {
  Exponent beta = Exponent::exact();
  Exponent mu = Exponent::exact();
  Exponent alpha = Exponent::exact();
  Exponent theta = Exponent::exact();
  double continuous_moment = 0.0;  // m_nu of the kernel, +inf if divergent
};

/// beta, mu, alpha, theta for a kernel, scheme and smoothness nu. Results are
/// cached per (kernel, scheme, nu) for the lifetime of the process.
RateExponents rate_exponents(const KernelND& kernel, const SamplingScheme& scheme, double nu);

/// Uniform for sup errors; in modular mode OrliczCompact for compact kernels,
/// OrliczMoment when m_nu is finite, Orlicz otherwise.
RateMode rate_mode(const KernelND& kernel, const ErrorMode& mode, const RateExponents& ex);

struct RateReport {
  enum class Verdict { Pass, Fail, Inconclusive };

  RateExperiment experiment;
  std::vector<RateRow> rows;
  SlopeFit fit;
  bool fitted = false;
  RateMode mode = RateMode::Uniform;
  RateExponents exponents;
  double epsilon = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::string reason;

  /// Header "w,error,slack", 17 significant digits.
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

std::string to_string(RateReport::Verdict v);

/// Runs S_w f over the ladder, measures the errors and fits the slope.
/// Pass needs slope <= -epsilon + 0.2 and R^2 >= 0.95; an R^2 below that,
/// or fewer than 3 rows above the slack floor, is inconclusive.
RateReport run_experiment(const RateExperiment& exp);

/// Modular error of one row, exposed for tests and the continuity check.
struct ModularValue {
  double value = 0.0;
  double tail_bound = 0.0;  // certified bound on the part outside `domain`
  double quadrature_error = 0.0;
  bool converged = true;
  Box domain;
};

/// I^phi[lambda (S_w f - f)] (or of S_w f alone when `subtract` is false),
/// integrated over a box grown until the certified tail falls below
/// `tail_fraction` of the inner integral.
ModularValue modular_series_error(const OperatorConfig& cfg, const TestFunction& f, double w, const PhiFunction& phi,
                                  double lambda, bool subtract = true, double tail_fraction = 0.01);

struct ContinuityCheck {
  double lhs = 0.0;        // I^phi[lambda S_w f], plus its tail and quadrature allowance
  double rhs = 0.0;        // |chi|_1 / (delta^n m0) * I^phi[lambda m0 f]
  double l1 = 0.0, m0 = 0.0, delta = 0.0;
  bool holds = false;
};

/// Numeric check of the modular continuity inequality with a relative
/// slack on the right-hand side.
ContinuityCheck modular_continuity_check(const KernelND& kernel, const SamplingScheme& scheme, const PhiFunction& phi,
                                         double lambda, const TestFunction& f, double w, double rel_slack = 0.01);

}  // namespace kanto
