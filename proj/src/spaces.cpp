#include "kanto/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kanto/error.hpp"
#include "kanto/fit.hpp"
#include "kanto/parallel.hpp"

namespace kanto {

PhiFunction PhiFunction::power(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("phi_p: p must be >= 1");
  PhiFunction f;
  f.kind_ = Kind::Power;
  f.a_ = p;
  std::ostringstream s;
  s << "p:" << p;
  f.name_ = s.str();
  return f;
}

PhiFunction PhiFunction::alpha_beta(double alpha, double beta) {
  if (!(alpha >= 1.0) || !(beta > 0.0)) throw std::invalid_argument("phi_ab: need alpha >= 1 and beta > 0");
  PhiFunction f;
  f.kind_ = Kind::AlphaBeta;
  f.a_ = alpha;
  f.b_ = beta;
  std::ostringstream s;
  s << "ab:" << alpha << ":" << beta;
  f.name_ = s.str();
  return f;
}

PhiFunction PhiFunction::exponential(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("phi_exp: gamma must be positive");
  PhiFunction f;
  f.kind_ = Kind::Exponential;
  f.a_ = gamma;
  // exp(u^gamma) - 1 is convex for gamma >= 1; for smaller gamma only eventually.
  f.convex_ = gamma >= 1.0;
  std::ostringstream s;
  s << "exp:" << gamma;
  f.name_ = s.str();
  return f;
}

PhiFunction PhiFunction::custom(std::function<double(double)> fn, bool convex, std::string name) {
  if (!fn) throw std::invalid_argument("phi: empty evaluator");
  PhiFunction f;
  f.kind_ = Kind::Custom;
  f.fn_ = std::move(fn);
  f.convex_ = convex;
  f.name_ = std::move(name);
  return f;
}

double PhiFunction::operator()(double u) const {
  if (!(u >= 0.0)) throw std::invalid_argument("phi: argument must be >= 0");
  switch (kind_) {
    case Kind::Power: return a_ == 1.0 ? u : (a_ == 2.0 ? u * u : std::pow(u, a_));
    case Kind::AlphaBeta: return std::pow(u, a_) * std::pow(std::log(u + std::numbers::e), b_);
    case Kind::Exponential: return std::expm1(std::pow(u, a_));
    case Kind::Custom: return fn_(u);
  }
  return 0.0;
}

namespace {

double spec_number(const std::string& t, const std::string& spec) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size()) throw std::invalid_argument("invalid phi spec: " + spec);
  return v;
}

}  // namespace

PhiFunction parse_phi(const std::string& spec) {
  std::vector<std::string> parts;
  std::istringstream in(spec);
  for (std::string p; std::getline(in, p, ':');) parts.push_back(p);
  if (parts.size() == 2 && parts[0] == "p") return PhiFunction::power(spec_number(parts[1], spec));
  if (parts.size() == 3 && parts[0] == "ab")
    return PhiFunction::alpha_beta(spec_number(parts[1], spec), spec_number(parts[2], spec));
  if (parts.size() == 2 && parts[0] == "exp") return PhiFunction::exponential(spec_number(parts[1], spec));
  throw std::invalid_argument("invalid phi spec: " + spec);
}

IntegrationResult modular_estimate(const PhiFunction& phi, const Field1& g, const Box& domain, const QuadratureSpec& quad) {
  const FnN integrand = [&](std::span<const double> x) { return phi(std::abs(g(x))); };
  return integrate_box(integrand, domain, quad.options, quad.axis_breaks);
}

double modular(const PhiFunction& phi, const Field1& g, const Box& domain, const QuadratureSpec& quad) {
  const IntegrationResult r = modular_estimate(phi, g, domain, quad);
  if (!r.converged) {
    std::ostringstream s;
    s << "modular: quadrature did not converge (value " << r.value << ", error estimate " << r.error << ")";
    throw ConvergenceError(s.str());
  }
  return r.value;
}

double modular_error(const PhiFunction& phi, double lambda, const Signal& f, const Field1& approx, const Box& domain,
                     const QuadratureSpec& quad) {
  if (!(lambda > 0.0)) throw std::invalid_argument("modular_error: lambda must be positive");
  const Field1 diff = [&](std::span<const double> x) { return lambda * (approx(x) - evaluate(f, x)); };
  return modular(phi, diff, domain, quad);
}

double sup_error(const Signal& f, const Field1& approx, const GridSpec& grid) {
  const std::size_t n = grid.box.dim();
  std::vector<std::vector<double>> axes(n);
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    axes[i] = grid_axis(grid, i);
    total *= axes[i].size();
  }
  std::vector<double> err(total);
  parallel_for(total, [&](std::size_t id) {
    std::vector<double> x(n);
    std::size_t rem = id;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = axes[i][rem % axes[i].size()];
      rem /= axes[i].size();
    }
    err[id] = std::abs(approx(x) - evaluate(f, x));
  }, 256);
  return err.empty() ? 0.0 : *std::max_element(err.begin(), err.end());
}

Signal TestFunction::signal() const {
  Analytic a;
  a.fn = fn;
  a.dim = dim;
  if (family != Family::Constant) a.support = support;
  a.bound = sup;
  switch (family) {
    case Family::Hat: a.tag = "hat"; break;
    case Family::Cusp: a.tag = "cusp"; break;
    case Family::GaussianTruncated: a.tag = "gaussian"; break;
    case Family::Indicator: a.tag = "indicator"; break;
    case Family::Constant: a.tag = "constant"; break;
  }
  return a;
}

namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TestFunction make_cusp(double nu, std::size_t n) {
  if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("make_cusp: nu must lie in (0, 1]");
  if (n == 0) throw std::invalid_argument("make_cusp: dimension must be positive");
  TestFunction t;
  t.family = nu == 1.0 ? TestFunction::Family::Hat : TestFunction::Family::Cusp;
  t.dim = n;
  t.nu = nu;
  t.support = Box::cube(n, -1.0, 1.0);
  t.sup = 1.0;
  t.fn = [nu](std::span<const double> x) {
    const double r = 1.0 - norm2(x);
    if (r <= 0.0) return 0.0;
    return nu == 1.0 ? r : std::pow(r, nu);
  };
  return t;
}

TestFunction make_hat(std::size_t n) { return make_cusp(1.0, n); }

TestFunction make_indicator(std::size_t n, double half_width) {
  if (!(half_width > 0.0)) throw std::invalid_argument("make_indicator: half width must be positive");
  TestFunction t;
  t.family = TestFunction::Family::Indicator;
  t.dim = n;
  t.nu = 1.0;  // in the modular (L^1) sense only
  t.support = Box::cube(n, -half_width, half_width);
  t.sup = 1.0;
  t.fn = [half_width](std::span<const double> x) {
    for (double v : x)
      if (v < -half_width || v > half_width) return 0.0;
    return 1.0;
  };
  return t;
}

TestFunction make_truncated_gaussian(std::size_t n, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("make_truncated_gaussian: width must be positive");
  TestFunction t;
  t.family = TestFunction::Family::GaussianTruncated;
  t.dim = n;
  t.nu = 1.0;
  t.support = Box::cube(n, -1.0, 1.0);
  const double floor = std::exp(-1.0 / (2.0 * s * s));
  t.sup = 1.0 - floor;
  t.fn = [s, floor](std::span<const double> x) {
    const double r = norm2(x);
    if (r >= 1.0) return 0.0;
    return std::exp(-r * r / (2.0 * s * s)) - floor;
  };
  return t;
}

TestFunction make_constant(std::size_t n, double c, double half_extent) {
  TestFunction t;
  t.family = TestFunction::Family::Constant;
  t.dim = n;
  t.nu = 1.0;
  t.support = Box::cube(n, -half_extent, half_extent);
  t.sup = std::abs(c);
  t.fn = [c](std::span<const double>) { return c; };
  return t;
}

TestFunction make_test_function(const std::string& family, double nu, std::size_t n) {
  if (family == "hat") return make_hat(n);
  if (family == "cusp") return make_cusp(nu, n);
  if (family == "indicator") return make_indicator(n);
  if (family == "gaussian") return make_truncated_gaussian(n);
  if (family == "constant") return make_constant(n, 1.0);
  throw std::invalid_argument("unknown test function: " + family);
}

HolderEstimate holder_estimate(const TestFunction& f, const std::vector<std::vector<double>>& offsets, const HolderMode& mode) {
  if (offsets.size() < 3) throw std::invalid_argument("holder_estimate: at least 3 offsets required");
  HolderEstimate out;
  double tmin = std::numeric_limits<double>::infinity(), tmax = 0.0;
  for (const auto& t : offsets) {
    if (t.size() != f.dim) throw std::invalid_argument("holder_estimate: offset dimension mismatch");
    const double r = norm2(t);
    if (!(r > 0.0)) throw std::invalid_argument("holder_estimate: zero offset");
    tmin = std::min(tmin, r);
    tmax = std::max(tmax, r);
  }
  if (tmax < 100.0 * tmin * (1.0 - 1e-12)) throw std::invalid_argument("holder_estimate: offsets must span at least 2 decades");
  const std::size_t n = f.dim;
  std::vector<std::pair<double, double>> pts;
  for (const auto& t : offsets) {
    const double r = norm2(t);
    const Box domain = f.support.padded(r);
    double diff = 0.0;
    if (mode.kind == HolderMode::Kind::Sup) {
      // Spacing |t|/16 per axis, capped at 4e6 nodes in total.
      const double per_axis_cap = std::floor(std::pow(4e6, 1.0 / static_cast<double>(n)));
      GridSpec g{domain, std::vector<std::size_t>(n)};
      for (std::size_t i = 0; i < n; ++i)
        g.resolution[i] = static_cast<std::size_t>(std::min(per_axis_cap, std::ceil(domain.width(i) / (r / 16.0)) + 1.0));
      Signal shifted = Analytic{[&](std::span<const double> x) {
                                  std::vector<double> y(x.begin(), x.end());
                                  for (std::size_t i = 0; i < n; ++i) y[i] += t[i];
                                  return f.fn(y);
                                },
                                n, std::nullopt, f.sup, "shift"};
      diff = sup_error(shifted, f.fn, g);
    } else {
      QuadratureSpec quad;
      quad.axis_breaks.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> b = {domain.lo[i], domain.hi[i], f.support.lo[i], f.support.hi[i],
                                 f.support.lo[i] - t[i], f.support.hi[i] - t[i], 0.0, -t[i]};
        std::erase_if(b, [&](double v) { return v < domain.lo[i] || v > domain.hi[i]; });
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        quad.axis_breaks[i] = b;
      }
      const Field1 g = [&](std::span<const double> x) {
        std::vector<double> y(x.begin(), x.end());
        for (std::size_t i = 0; i < n; ++i) y[i] += t[i];
        return mode.lambda * (f.fn(x) - f.fn(y));
      };
      diff = modular_estimate(mode.phi, g, domain, quad).value;
    }
    out.norms.push_back(r);
    out.differences.push_back(diff);
    if (diff > 0.0) pts.emplace_back(r, diff);
  }
  const SlopeFit fit = fit_slope(pts);
  out.exponent = fit.slope;
  out.r2 = fit.r2;
  return out;
}

}  // namespace kanto
