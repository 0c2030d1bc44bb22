#include "kanto/rates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "kanto/certificate.hpp"
#include "kanto/operator.hpp"
#include "kanto/quadrature.hpp"

namespace kanto {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<double> kExponentLadder{4, 8, 16, 32, 64, 128, 256};

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

nlohmann::json exponent_json(const Exponent& e) {
  if (e.is_exact()) return "exact";
  return e.value();
}

// sup |chi_i(u)| over |u| >= d
double envelope(const Kernel1D& k, double d) {
  if (k.compact()) return d > k.radius() ? 0.0 : k.sup_abs();
  const auto& s = std::get<DecaySupport>(k.support());
  if (d < 1.0) return k.sup_abs();
  return std::min(k.sup_abs(), s.constant * std::pow(d, -s.power));
}

// sorted cut list on [lo, hi] from candidate points
std::vector<double> axis_cuts(double lo, double hi, std::vector<double> pts) {
  pts.push_back(lo);
  pts.push_back(hi);
  std::vector<double> out;
  std::sort(pts.begin(), pts.end());
  const double eps = 1e-12 * std::max(1.0, hi - lo);
  for (double p : pts) {
    if (p < lo || p > hi) continue;
    if (!out.empty() && p - out.back() <= eps) continue;
    out.push_back(p);
  }
  if (out.back() != hi) {
    if (out.size() > 1 && hi - out.back() <= eps) out.back() = hi;
    else out.push_back(hi);
  }
  return out;
}

std::vector<double> function_breaks(const TestFunction& f, std::size_t axis) {
  const double a = f.support.lo[axis], b = f.support.hi[axis];
  return {a, 0.5 * (a + b), b};
}

}  // namespace

std::string to_string(RateMode mode) {
  switch (mode) {
    case RateMode::Uniform: return "uniform";
    case RateMode::Orlicz: return "orlicz";
    case RateMode::OrliczCompact: return "orlicz-compact";
    case RateMode::OrliczMoment: return "orlicz-moment";
  }
  return "?";
}

std::string to_string(RateReport::Verdict v) {
  switch (v) {
    case RateReport::Verdict::Pass: return "pass";
    case RateReport::Verdict::Fail: return "fail";
    case RateReport::Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

double predicted_exponent(double nu, std::optional<Exponent> beta, std::optional<Exponent> mu,
                          std::optional<Exponent> alpha, std::optional<Exponent> theta, RateMode mode) {
  if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("predicted_exponent: nu must lie in (0, 1]");
  double eps = nu;
  auto use = [&](const std::optional<Exponent>& e, const char* name) {
    if (!e) throw std::invalid_argument(std::string("predicted_exponent: mode ") + to_string(mode) + " needs " + name);
    if (e->is_exact()) return;
    if (!(e->value() > 0.0)) {
      eps = 0.0;
      return;
    }
    eps = std::min(eps, e->value());
  };
  switch (mode) {
    case RateMode::Uniform:
      use(beta, "beta");
      use(mu, "mu");
      break;
    case RateMode::Orlicz:
      use(theta, "theta");
      use(mu, "mu");
      use(alpha, "alpha");
      break;
    case RateMode::OrliczCompact:
      use(mu, "mu");
      break;
    case RateMode::OrliczMoment:
      use(mu, "mu");
      use(alpha, "alpha");
      break;
  }
  return eps;
}

std::string ErrorMode::describe() const {
  if (kind == Kind::Sup) return "sup";
  std::ostringstream os;
  os << "modular(" << phi.name() << ", lambda=" << format_key(lambda) << ")";
  return os.str();
}

void validate(const RateExperiment& exp) {
  if (exp.w.size() < 4) throw std::invalid_argument("rate experiment: w ladder needs at least 4 values");
  for (std::size_t i = 0; i < exp.w.size(); ++i) {
    if (!(exp.w[i] > 0.0) || !std::isfinite(exp.w[i])) throw std::invalid_argument("rate experiment: w values must be positive");
    if (i > 0 && !(exp.w[i] > exp.w[i - 1])) throw std::invalid_argument("rate experiment: w ladder must be strictly increasing");
  }
  if (exp.dim == 0) throw std::invalid_argument("rate experiment: dimension must be positive");
  if (exp.resolution < 2) throw std::invalid_argument("rate experiment: grid resolution must be at least 2");
  if (!(exp.tolerance > 0.0)) throw std::invalid_argument("rate experiment: tolerance must be positive");
  if (exp.quadrature_order < 1) throw std::invalid_argument("rate experiment: quadrature order must be positive");
  if (!(exp.tail_fraction > 0.0)) throw std::invalid_argument("rate experiment: tail fraction must be positive");
  if (!(exp.slack_factor >= 1.0)) throw std::invalid_argument("rate experiment: slack factor must be at least 1");
  if (exp.mode.kind == ErrorMode::Kind::Modular && !(exp.mode.lambda > 0.0))
    throw std::invalid_argument("rate experiment: lambda must be positive");
  if (exp.box && exp.box->dim() != exp.dim) throw std::invalid_argument("rate experiment: box dimension mismatch");
  if (!(exp.nu > 0.0 && exp.nu <= 1.0)) throw std::invalid_argument("rate experiment: nu must lie in (0, 1]");
  // These throw invalid_argument on bad ids.
  (void)parse_kernel(exp.kernel_id);
  (void)parse_scheme(exp.scheme_spec, exp.dim);
  (void)make_test_function(exp.function, exp.nu, exp.dim);
}

RateExponents rate_exponents(const KernelND& kernel, const SamplingScheme& scheme, double nu) {
  static std::mutex mutex;
  static std::map<std::string, RateExponents> cache;
  std::string key = kernel.id() + "|";
  for (std::size_t i = 0; i < scheme.dim(); ++i) key += scheme.axis(i).describe() + ";";
  key += "|" + format_key(nu);
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  RateExponents ex;
  double pmin = kInf;
  for (const auto& f : kernel.factors())
    if (!f.compact()) pmin = std::min(pmin, std::get<DecaySupport>(f.support()).power);
  // Largest admissible moment order, capped at 1 where every moment is finite.
  ex.beta = std::isfinite(pmin) ? Exponent::of(std::clamp(pmin - 1.0, 0.0, 1.0)) : Exponent::exact();
  ex.mu = partition_deviation(kernel, scheme, kExponentLadder).mu;
  ex.alpha = tail_mass(kernel, 1.0, kExponentLadder).alpha;
  ex.continuous_moment = continuous_moment(kernel, nu);
  if (std::isfinite(ex.continuous_moment))
    ex.theta = Exponent::of(nu);
  else
    ex.theta = Exponent::of(std::max(0.0, weighted_tail_moment(kernel, nu, 1.0, kExponentLadder).theta));

  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(key, ex);
  return ex;
}

RateMode rate_mode(const KernelND& kernel, const ErrorMode& mode, const RateExponents& ex) {
  if (mode.kind == ErrorMode::Kind::Sup) return RateMode::Uniform;
  if (kernel.compact()) return RateMode::OrliczCompact;
  if (std::isfinite(ex.continuous_moment)) return RateMode::OrliczMoment;
  return RateMode::Orlicz;
}

ModularValue modular_series_error(const OperatorConfig& cfg, const TestFunction& f, double w, const PhiFunction& phi,
                                  double lambda, bool subtract, double tail_fraction) {
  if (!(lambda > 0.0)) throw std::invalid_argument("modular_series_error: lambda must be positive");
  const std::size_t n = f.dim;
  if (cfg.kernel.dim() != n || cfg.scheme.dim() != n)
    throw std::invalid_argument("modular_series_error: dimension mismatch");
  const Signal sig = f.signal();
  const bool constant = f.family == TestFunction::Family::Constant;
  const QuadratureSpec qs;
  const auto& kern = cfg.kernel;

  std::vector<double> pad(n);
  bool decaying = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& k = kern.factor(i);
    const double spread = cfg.scheme.axis(i).Delta();
    if (k.compact()) {
      pad[i] = (k.radius() + spread) / w * (1.0 + 1e-12) + 1e-12;
    } else {
      pad[i] = (1.0 + spread) / w;
      decaying = true;
    }
    if (constant) pad[i] = 0.0;
  }
  auto grown = [&](double extra) {
    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = kern.factor(i).compact() ? pad[i] : std::max(pad[i], extra);
      lo[i] = f.support.lo[i] - p;
      hi[i] = f.support.hi[i] + p;
    }
    return Box(lo, hi);
  };
  const Box inner = grown(0.0);

  auto integrand = [&](const SeriesEvaluator& ev) {
    return [&ev, &f, &phi, lambda, subtract](std::span<const double> x) {
      double v = ev(x);
      if (subtract) v -= f(x);
      return phi(lambda * std::abs(v));
    };
  };
  auto cuts_for = [&](const Box& b, const SeriesEvaluator& ev, bool aligned_only) {
    std::vector<std::vector<double>> cuts(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& k = kern.factor(i);
      std::vector<double> pts;
      if (!aligned_only) pts = function_breaks(f, i);
      if (n == 1 && !aligned_only && k.compact()) {
        const auto& ax = cfg.scheme.axis(i);
        const auto r = ev.explicit_ranges()[i];
        for (long long j = r.first; j <= r.last; ++j)
          for (double bp : k.breakpoints()) pts.push_back((ax.node(j) + bp) / w);
      }
      if (n == 1 && !k.compact() && k.period() > 0.0) {
        const auto a = aligned_breakpoints(b.lo[i], b.hi[i], k.period() / w);
        pts.insert(pts.end(), a.begin(), a.end());
      }
      cuts[i] = axis_cuts(b.lo[i], b.hi[i], std::move(pts));
    }
    return cuts;
  };

  ModularValue out;
  const SeriesEvaluator ev0(cfg, sig, w, inner);
  const auto r0 = integrate_box(integrand(ev0), inner, qs.options, cuts_for(inner, ev0, false));
  out.value = r0.value;
  out.quadrature_error = r0.error;
  out.converged = r0.converged;
  out.domain = inner;
  const double tau = ev0.truncation_bound();
  if (tau > 0.0) out.tail_bound += inner.measure() * phi(lambda * tau);
  if (!decaying || constant) return out;

  if (!phi.convex()) throw std::invalid_argument("modular_series_error: tail bound needs a convex phi");
  const double mass = ev0.abs_mean_sum();
  std::vector<double> l1(n), sup(n);
  for (std::size_t i = 0; i < n; ++i) {
    l1[i] = n > 1 ? l1_norm(KernelND({kern.factor(i)})) : 1.0;
    sup[i] = kern.factor(i).sup_abs();
  }
  const auto& ranges = ev0.explicit_ranges();
  // Certified bound on the modular outside b: per axis and side,
  // phi(lambda U) / (lambda U) * lambda * int |S_w f| with U the sup there.
  auto tail = [&](const Box& b) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& k = kern.factor(i);
      if (k.compact()) continue;
      const auto& ax = cfg.scheme.axis(i);
      const double d_hi = w * b.hi[i] - ax.node(ranges[i].last);
      const double d_lo = ax.node(ranges[i].first) - w * b.lo[i];
      for (double d : {d_hi, d_lo}) {
        if (!(d > 0.0)) return kInf;
        double integral = mass * 0.5 * k.integral_tail_bound(d) / w;
        double bound = mass * envelope(k, d);
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          integral *= l1[j] / w;
          bound *= sup[j];
        }
        if (bound > 0.0) total += phi(lambda * bound) / (lambda * bound) * lambda * integral;
      }
    }
    return total;
  };

  double extra = 2.0 * *std::max_element(pad.begin(), pad.end());
  const double cap = 512.0 * std::max(1.0, f.support.width(0));
  const double target = tail_fraction * r0.value;
  double t = tail(grown(extra));
  while (t > target && extra < cap) {
    extra *= 2.0;
    t = tail(grown(extra));
  }
  const Box outer = grown(extra);
  out.domain = outer;
  out.tail_bound += t;
  if (!(t < kInf)) return out;

  // Integrate the shell outer \ inner as slabs.
  const SeriesEvaluator ev1(cfg, sig, w, outer);
  const auto g1 = integrand(ev1);
  std::vector<double> lo = outer.lo, hi = outer.hi;
  for (std::size_t i = 0; i < n; ++i) {
    for (int side = 0; side < 2; ++side) {
      std::vector<double> slo = lo, shi = hi;
      if (side == 0) {
        shi[i] = inner.lo[i];
      } else {
        slo[i] = inner.hi[i];
      }
      if (!(shi[i] > slo[i])) continue;
      const Box slab(slo, shi);
      const auto r = integrate_box(g1, slab, qs.options, cuts_for(slab, ev1, true));
      out.value += r.value;
      out.quadrature_error += r.error;
      out.converged = out.converged && r.converged;
    }
    lo[i] = inner.lo[i];
    hi[i] = inner.hi[i];
  }
  return out;
}

RateReport run_experiment(const RateExperiment& exp) {
  validate(exp);
  RateReport rep;
  rep.experiment = exp;
  const KernelND kernel = promote(parse_kernel(exp.kernel_id), exp.dim);
  if (kernel.dim() != exp.dim) throw std::invalid_argument("rate experiment: kernel dimension does not match dim");
  const SamplingScheme scheme = parse_scheme(exp.scheme_spec, exp.dim);
  const TestFunction f = make_test_function(exp.function, exp.nu, exp.dim);
  const Signal sig = f.signal();

  OperatorConfig cfg{kernel, scheme};
  cfg.tolerance = exp.tolerance;
  cfg.quadrature_order = exp.quadrature_order;
  validate(cfg);

  rep.exponents = rate_exponents(kernel, scheme, f.nu);
  rep.mode = rate_mode(kernel, exp.mode, rep.exponents);
  const bool sup_mode = exp.mode.kind == ErrorMode::Kind::Sup;
  const bool has_rate = !(sup_mode && f.family == TestFunction::Family::Indicator);
  if (has_rate) {
    const auto& e = rep.exponents;
    rep.epsilon = predicted_exponent(f.nu, e.beta, e.mu, e.alpha, e.theta, rep.mode);
  }

  Box box = exp.box ? *exp.box : f.support;
  if (!exp.box && f.family != TestFunction::Family::Constant) {
    std::vector<double> lo(exp.dim), hi(exp.dim);
    for (std::size_t i = 0; i < exp.dim; ++i) {
      const double c = 0.5 * (f.support.lo[i] + f.support.hi[i]), h = f.support.width(i);
      lo[i] = c - h;
      hi[i] = c + h;
    }
    box = Box(lo, hi);
  }
  rep.experiment.box = box;
  const double noise = 1e-12 * std::max(1.0, f.sup);

  for (double w : exp.w) {
    RateRow row;
    row.w = w;
    if (sup_mode) {
      const GridSpec grid{box, std::vector<std::size_t>(exp.dim, exp.resolution)};
      const SeriesEvaluator ev(cfg, sig, w, box);
      const Field fld = ev.grid(grid);
      std::vector<std::vector<double>> axes(exp.dim);
      for (std::size_t i = 0; i < exp.dim; ++i) axes[i] = grid_axis(grid, i);
      std::vector<double> x(exp.dim);
      double err = 0.0;
      for (std::size_t id = 0; id < fld.values.size(); ++id) {
        std::size_t rem = id;
        for (std::size_t i = 0; i < exp.dim; ++i) {
          x[i] = axes[i][rem % axes[i].size()];
          rem /= axes[i].size();
        }
        err = std::max(err, std::abs(fld.values[id] - f(x)));
      }
      row.error = err;
      row.slack = fld.truncation_bound + noise;
      row.quadrature_converged = fld.quadrature_converged;
    } else {
      const auto mv = modular_series_error(cfg, f, w, exp.mode.phi, exp.mode.lambda, true, exp.tail_fraction);
      row.error = mv.value;
      const double floor = mv.domain.measure() * exp.mode.phi(exp.mode.lambda * noise);
      row.slack = mv.tail_bound + mv.quadrature_error + floor;
      row.quadrature_converged = mv.converged;
    }
    row.fitted = row.error > exp.slack_factor * row.slack && row.error > 0.0 && std::isfinite(row.slack);
    rep.rows.push_back(row);
  }

  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rep.rows)
    if (r.fitted) pts.emplace_back(r.w, r.error);
  if (pts.size() < 3) {
    rep.verdict = RateReport::Verdict::Inconclusive;
    rep.reason = "fewer than 3 rows exceed " + format_key(exp.slack_factor) + "x their slack";
    return rep;
  }
  rep.fit = fit_slope(pts);
  rep.fitted = true;
  if (!has_rate) {
    rep.verdict = RateReport::Verdict::Inconclusive;
    rep.reason = "test function is not uniformly continuous; no predicted sup rate";
  } else if (rep.fit.r2 < 0.95) {
    rep.verdict = RateReport::Verdict::Inconclusive;
    rep.reason = "fit R^2 below 0.95";
  } else if (rep.fit.slope <= -rep.epsilon + 0.2) {
    rep.verdict = RateReport::Verdict::Pass;
  } else {
    rep.verdict = RateReport::Verdict::Fail;
    rep.reason = "fitted slope above -epsilon + 0.2";
  }
  return rep;
}

std::string RateReport::to_csv() const {
  std::string out = "w,error,slack\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.w, r.error, r.slack);
    out += buf;
  }
  return out;
}

nlohmann::json RateReport::to_json() const {
  using nlohmann::json;
  const auto& e = experiment;
  json j;
  j["kernel"] = e.kernel_id;
  j["scheme"] = e.scheme_spec;
  j["function"] = e.function;
  j["nu"] = e.nu;
  j["dim"] = e.dim;
  j["error_mode"] = e.mode.kind == ErrorMode::Kind::Sup ? "sup" : "modular";
  if (e.mode.kind == ErrorMode::Kind::Modular) {
    j["phi"] = e.mode.phi.name();
    j["lambda"] = e.mode.lambda;
    j["tail_fraction"] = e.tail_fraction;
  } else {
    if (e.box) j["box"] = {{"lo", e.box->lo}, {"hi", e.box->hi}};
    j["resolution"] = e.resolution;
  }
  j["w"] = e.w;
  j["tolerance"] = e.tolerance;
  j["quadrature_order"] = e.quadrature_order;
  j["slack_factor"] = e.slack_factor;
  j["rate_mode"] = to_string(mode);
  j["exponents"] = {{"beta", exponent_json(exponents.beta)},
                    {"mu", exponent_json(exponents.mu)},
                    {"alpha", exponent_json(exponents.alpha)},
                    {"theta", exponent_json(exponents.theta)},
                    {"continuous_moment", num(exponents.continuous_moment)}};
  j["epsilon"] = epsilon;
  j["threshold"] = -epsilon + 0.2;
  if (fitted) {
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["r2"] = fit.r2;
  } else {
    j["slope"] = nullptr;
    j["intercept"] = nullptr;
    j["r2"] = nullptr;
  }
  j["verdict"] = to_string(verdict);
  if (!reason.empty()) j["reason"] = reason;
  json rs = json::array();
  for (const auto& r : rows)
    rs.push_back({{"w", r.w}, {"error", r.error}, {"slack", num(r.slack)}, {"fitted", r.fitted},
                  {"quadrature_converged", r.quadrature_converged}});
  j["rows"] = rs;
  return j;
}

ContinuityCheck modular_continuity_check(const KernelND& kernel, const SamplingScheme& scheme, const PhiFunction& phi,
                                         double lambda, const TestFunction& f, double w, double rel_slack) {
  OperatorConfig cfg{kernel, scheme};
  validate(cfg);
  ContinuityCheck c;
  const auto lhs = modular_series_error(cfg, f, w, phi, lambda, false);
  c.lhs = lhs.value + lhs.tail_bound + lhs.quadrature_error;

  const std::size_t n = kernel.dim();
  double step = 0.0;
  if (n == 1) step = kernel.compact() ? 1e-3 : 1e-2;
  else step = kernel.compact() ? 1.0 / 64 : 1.0 / 16;
  c.m0 = discrete_moment(kernel, scheme, 0.0, step).value;
  c.l1 = l1_norm(kernel);
  c.delta = 1.0;
  for (double d : scheme.deltas()) c.delta *= d;

  QuadratureSpec qs;
  for (std::size_t i = 0; i < n; ++i)
    qs.axis_breaks.push_back(axis_cuts(f.support.lo[i], f.support.hi[i], function_breaks(f, i)));
  const double m0 = c.m0;
  const auto rhs = modular_estimate(phi, [&f, lambda, m0](std::span<const double> x) { return lambda * m0 * f(x); },
                                    f.support, qs);
  c.rhs = c.l1 / (c.delta * c.m0) * rhs.value;
  c.holds = c.lhs <= c.rhs * (1.0 + rel_slack);
  return c;
}

}  // namespace kanto
