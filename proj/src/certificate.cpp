#include "kanto/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "kanto/error.hpp"
#include "kanto/fit.hpp"
#include "kanto/parallel.hpp"
#include "kanto/quadrature.hpp"

namespace kanto {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const AdaptiveOptions kFine{1e-15, 1e-12, 400000};

double pow_abs(double d, double beta) {
  if (beta == 0.0) return 1.0;
  if (beta == 1.0) return d;
  if (beta == 0.5) return std::sqrt(d);
  return std::pow(d, beta);
}

// Panel width for quadrature along a kernel: the oscillation period for
// Fejer-type kernels, 1 otherwise.
double panel_of(const Kernel1D& k) { return k.period() > 0.0 ? k.period() : 1.0; }

struct HalfLine {
  double value = 0.0, error = 0.0;
};

// Integral of g over [a, inf) for an integrand whose mean decays like t^-q.
// Integrates to X and 2X on aligned panels, then removes the leading
// t^{1-q} remainder by Richardson extrapolation.
HalfLine half_line(const Fn1& g, double a, double q, double panel, double X_min) {
  if (q <= 1.0) return {kInf, 0.0};
  double X = std::max(X_min, 16.0 * std::max(a, 1.0));
  X = 2.0 * panel * std::ceil(X / (2.0 * panel));
  const auto b1 = aligned_breakpoints(a, X, panel);
  const auto b2 = aligned_breakpoints(X, 2.0 * X, panel);
  const IntegrationResult r1 = integrate_panels(g, b1, kFine);
  const IntegrationResult r2 = integrate_panels(g, b2, kFine);
  if (!r1.converged || !r2.converged) throw ConvergenceError("half-line integral did not converge");
  const double rem = r2.value / (std::pow(2.0, q - 1.0) - 1.0);
  return {r1.value + r2.value + rem, r1.error + r2.error + 1e-3 * std::abs(rem)};
}

std::vector<double> merged_breaks(const Kernel1D& k, double a, double b, std::initializer_list<double> extra, double panel = 0.0) {
  std::vector<double> pts = {a, b};
  for (double v : k.breakpoints()) pts.push_back(v);
  for (double v : extra) pts.push_back(v);
  if (panel > 0.0)
    for (double v : aligned_breakpoints(a, b, panel)) pts.push_back(v);
  std::erase_if(pts, [&](double v) { return v < a || v > b; });
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double integrate_checked(const Fn1& g, const std::vector<double>& breaks) {
  if (breaks.size() < 2) return 0.0;
  const IntegrationResult r = integrate_panels(g, breaks, kFine);
  if (!r.converged) throw ConvergenceError("kernel quadrature did not converge");
  return r.value;
}

// Integral of |chi(t)| |t|^nu over |t| in [a, b] (both signs), b may be inf.
double symmetric_shell(const Kernel1D& k, double nu, double a, double b) {
  const Fn1 g = [&](double t) { return (std::abs(k(t)) + std::abs(k(-t))) * pow_abs(t, nu); };
  if (k.compact()) {
    const double r = k.radius();
    const double hi = std::min(b, r);
    if (hi <= a) return 0.0;
    std::vector<double> br = {a, hi};
    for (double v : k.breakpoints()) br.push_back(std::abs(v));
    std::erase_if(br, [&](double v) { return v < a || v > hi; });
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    return integrate_checked(g, br);
  }
  const double q = std::get<DecaySupport>(k.support()).power - nu;
  const double panel = panel_of(k);
  if (std::isinf(b)) return half_line(g, a, q, panel, 1024.0).value;
  return integrate_checked(g, aligned_breakpoints(a, b, panel));
}

// Window row of |chi_i(u - t_k)| and |u - t_k| for k in [lo, hi].
struct Row {
  std::vector<double> a, d;
};

Row row(const Kernel1D& chi, const AxisNodes& nodes, double u, long long lo, long long hi) {
  Row r;
  const std::size_t m = static_cast<std::size_t>(std::max<long long>(0, hi - lo + 1));
  r.a.resize(m);
  r.d.resize(m);
  const bool uniform = nodes.rule() == AxisNodes::Rule::Uniform;
  const double ctx = chi.shift_context(u);
  for (std::size_t j = 0; j < m; ++j) {
    const long long k = lo + static_cast<long long>(j);
    const double t = uniform ? static_cast<double>(k) : nodes.node(k);
    r.a[j] = std::abs(uniform ? chi.shifted(u, k, ctx) : chi(u - t));
    r.d[j] = std::abs(u - t);
  }
  return r;
}

long long first_at_or_above(const AxisNodes& nodes, double a) {
  long long k = nodes.lower_index(a);
  if (nodes.node(k) < a) ++k;
  return k;
}

// sum_{|u-k| <= R} F(u - k) |u - k|^beta on the integer lattice. Terms with
// |u - k| >= 1 share sin^2 or cos^2 of pi u / 2 by parity, so the sweep is a
// plain reciprocal-square sum per parity class.
double fejer_moment(double u, double R, double beta) {
  const Kernel1D F = Kernel1D::fejer();
  const double s2 = F.shift_context(u);
  const long long lo = static_cast<long long>(std::ceil(u - R)), hi = static_cast<long long>(std::floor(u + R));
  const long long near_lo = static_cast<long long>(std::floor(u)) - 1, near_hi = near_lo + 3;
  double near = 0.0, even = 0.0, odd = 0.0;
  for (long long k = std::max(lo, near_lo); k <= std::min(hi, near_hi); ++k) {
    const double d = u - static_cast<double>(k);
    near += F.shifted(u, k, s2) * pow_abs(std::abs(d), beta);
  }
  auto sweep = [&](long long a, long long b) {
    if (a > b) return;
    // Start on an even index so each step adds one even and one odd term.
    if (a & 1) {
      const double d = u - static_cast<double>(a);
      odd += pow_abs(std::abs(d), beta) / (d * d);
      ++a;
    }
    auto run = [&](auto weight) {
      double e = 0.0, o = 0.0;
      long long k = a;
      for (; k + 1 <= b; k += 2) {
        const double d0 = u - static_cast<double>(k), d1 = d0 - 1.0;
        e += weight(d0) / (d0 * d0);
        o += weight(d1) / (d1 * d1);
      }
      if (k == b) {
        const double d0 = u - static_cast<double>(k);
        e += weight(d0) / (d0 * d0);
      }
      even += e;
      odd += o;
    };
    if (beta == 0.0)
      run([](double) { return 1.0; });
    else if (beta == 0.5)
      run([](double d) { return std::sqrt(std::abs(d)); });
    else if (beta == 1.0)
      run([](double d) { return std::abs(d); });
    else
      run([beta](double d) { return std::pow(std::abs(d), beta); });
  };
  sweep(lo, std::min(hi, near_lo - 1));
  sweep(std::max(lo, near_hi + 1), hi);
  constexpr double c = 2.0 / (std::numbers::pi * std::numbers::pi);
  return near + c * (s2 * even + (1.0 - s2) * odd);
}

}  // namespace

std::string format_key(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

MomentEstimate discrete_moment(const KernelND& kernel, const SamplingScheme& scheme, double beta, double grid_step,
                               const MomentOptions& opt) {
  if (!(beta >= 0.0)) throw std::invalid_argument("discrete_moment: beta must be >= 0");
  if (!(grid_step > 0.0)) throw std::invalid_argument("discrete_moment: grid step must be positive");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("discrete_moment: tolerance must be positive");
  const std::size_t n = kernel.dim();
  if (scheme.dim() != n) throw std::invalid_argument("discrete_moment: scheme dimension mismatch");
  const auto deltas = scheme.deltas();

  MomentEstimate out;
  for (const auto& f : kernel.factors())
    if (!f.compact() && std::get<DecaySupport>(f.support()).power - beta <= 1.0) out.divergent = true;

  // Window radii and the certified tail of the omitted terms.
  const double cap = n == 1 ? opt.max_radius : std::min(opt.max_radius, 0.5 * std::pow(1e5, 1.0 / static_cast<double>(n)));
  std::vector<double> radii(n);
  const double cn = beta <= 2.0 ? 1.0 : std::pow(static_cast<double>(n), beta / 2.0);
  std::vector<double> S0(n), Sb(n);
  for (std::size_t i = 0; i < n; ++i) {
    S0[i] = kernel.factor(i).tail_sum_bound(0.0, deltas[i], 0.0);
    Sb[i] = kernel.factor(i).tail_sum_bound(0.0, deltas[i], beta);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Kernel1D& f = kernel.factor(i);
    if (f.compact()) {
      radii[i] = f.radius();
      continue;
    }
    if (out.divergent) {
      radii[i] = std::min(cap, 1e4);
      continue;
    }
    double others = 1.0;
    for (std::size_t l = 0; l < n; ++l)
      if (l != i) others *= std::max({S0[l], Sb[l], 1.0});
    const double t = opt.tol / (static_cast<double>(n * n) * cn * others);
    radii[i] = std::min(cap, std::max(f.radius_for(t, deltas[i], beta), f.radius_for(t, deltas[i], 0.0)));
  }
  if (out.divergent) {
    out.tail_bound = kInf;
  } else if (n == 1) {
    out.tail_bound = kernel.factor(0).tail_sum_bound(radii[0], deltas[0], beta);
  } else if (beta == 0.0) {
    out.tail_bound = truncation_tail_bound(kernel, radii, deltas);
  } else {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double Tb = kernel.factor(i).tail_sum_bound(radii[i], deltas[i], beta);
      const double T0 = kernel.factor(i).tail_sum_bound(radii[i], deltas[i], 0.0);
      double own = Tb;
      for (std::size_t l = 0; l < n; ++l)
        if (l != i) own *= S0[l];
      total += own;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        double cross = T0 * Sb[j];
        for (std::size_t l = 0; l < n; ++l)
          if (l != i && l != j) cross *= S0[l];
        total += cross;
      }
    }
    out.tail_bound = cn * total;
  }

  // Search box: one period cell for the uniform scheme.
  const bool periodic = scheme.is_uniform();
  const double lo = periodic ? 0.0 : -opt.search_extent, hi = periodic ? 1.0 : opt.search_extent;
  const auto N = static_cast<std::size_t>(std::ceil((hi - lo) / grid_step));
  const double h = (hi - lo) / static_cast<double>(N);

  const bool fejer_uniform = n == 1 && periodic && kernel.factor(0).family() == Kernel1D::Family::Fejer;
  auto value_at = [&](std::span<const double> u) {
    if (fejer_uniform) return fejer_moment(u[0], radii[0], beta);
    std::vector<Row> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      const AxisNodes& nodes = scheme.axis(i);
      rows[i] = row(kernel.factor(i), nodes, u[i], first_at_or_above(nodes, u[i] - radii[i]), nodes.lower_index(u[i] + radii[i]));
    }
    if (n == 1) {
      double s = 0.0;
      for (std::size_t j = 0; j < rows[0].a.size(); ++j)
        if (rows[0].a[j] != 0.0) s += rows[0].a[j] * pow_abs(rows[0].d[j], beta);
      return s;
    }
    // Multi-index sweep with the product built axis by axis.
    double s = 0.0;
    std::vector<std::size_t> idx(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (rows[i].a.empty()) return 0.0;
    for (;;) {
      double p = 1.0, r2 = 0.0;
      for (std::size_t i = 0; i < n && p != 0.0; ++i) {
        p *= rows[i].a[idx[i]];
        r2 += rows[i].d[idx[i]] * rows[i].d[idx[i]];
      }
      if (p != 0.0) s += p * pow_abs(std::sqrt(r2), beta);
      std::size_t d = 0;
      while (d < n && ++idx[d] == rows[d].a.size()) idx[d++] = 0;
      if (d == n) break;
    }
    return s;
  };

  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= N + 1;
  std::vector<double> vals(total);
  parallel_for(total, [&](std::size_t id) {
    std::vector<double> u(n);
    std::size_t rem = id;
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = lo + h * static_cast<double>(rem % (N + 1));
      rem /= N + 1;
    }
    vals[id] = value_at(u);
  }, 8);
  const std::size_t best = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  std::vector<double> u(n);
  std::vector<std::size_t> bi(n);
  {
    std::size_t rem = best;
    for (std::size_t i = 0; i < n; ++i) {
      bi[i] = rem % (N + 1);
      rem /= N + 1;
      u[i] = lo + h * static_cast<double>(bi[i]);
    }
  }
  double best_val = vals[best];
  std::vector<double> best_u = u;
  // Three-point parabolic step along each axis.
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> um = best_u, up = best_u;
    um[i] -= h;
    up[i] += h;
    const double fm = value_at(um), f0 = best_val, fp = value_at(up);
    const double den = fm - 2.0 * f0 + fp;
    if (den < 0.0) {
      const double step = 0.5 * h * (fm - fp) / den;
      if (std::abs(step) < h) {
        std::vector<double> uc = best_u;
        uc[i] += step;
        const double fc = value_at(uc);
        if (fc > best_val) {
          best_val = fc;
          best_u = uc;
        }
      }
    }
    for (auto [uu, ff] : {std::pair{um, fm}, std::pair{up, fp}})
      if (ff > best_val) {
        best_val = ff;
        best_u = uu;
      }
  }
  out.value = best_val;
  out.argmax = best_u;
  if (!std::isfinite(out.value)) {
    out.divergent = true;
    out.tail_bound = kInf;
  }
  return out;
}

PartitionDeviation partition_deviation(const KernelND& kernel, const SamplingScheme& scheme, const std::vector<double>& w_list,
                                       double tol, std::size_t points) {
  const std::size_t n = kernel.dim();
  if (scheme.dim() != n) throw std::invalid_argument("partition_deviation: scheme dimension mismatch");
  if (points < 2) throw std::invalid_argument("partition_deviation: need at least 2 test points per axis");
  const auto deltas = scheme.deltas();
  const auto radii = truncation_radii(kernel, tol, deltas);
  const double tail = truncation_tail_bound(kernel, radii, deltas);
  PartitionDeviation out;
  bool exact = true;
  for (double w : w_list) {
    if (!(w > 0.0)) throw std::invalid_argument("partition_deviation: w must be positive");
    // A_w factorizes into per-axis sums.
    std::vector<std::vector<double>> sums(n, std::vector<double>(points));
    for (std::size_t i = 0; i < n; ++i) {
      const AxisNodes& nodes = scheme.axis(i);
      const Kernel1D& chi = kernel.factor(i);
      parallel_for(points, [&](std::size_t j) {
        const double u = w * static_cast<double>(j) / static_cast<double>(points - 1);
        double s = 0.0;
        const bool uniform = nodes.rule() == AxisNodes::Rule::Uniform;
        const double ctx = chi.shift_context(u);
        const long long k1 = nodes.lower_index(u + radii[i]);
        for (long long k = first_at_or_above(nodes, u - radii[i]); k <= k1; ++k)
          s += uniform ? chi.shifted(u, k, ctx) : chi(u - nodes.node(k));
        sums[i][j] = s;
      }, 4);
    }
    double dev = 0.0;
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= points;
    for (std::size_t id = 0; id < total; ++id) {
      double p = 1.0;
      std::size_t rem = id;
      for (std::size_t i = 0; i < n; ++i) {
        p *= sums[i][rem % points];
        rem /= points;
      }
      dev = std::max(dev, std::abs(p - 1.0));
    }
    out.w.push_back(w);
    out.deviation.push_back(dev);
    out.tail_bound.push_back(tail);
    if (dev > 1e-12 + tail) exact = false;
  }
  if (exact) {
    out.mu = Exponent::exact();
    out.r2 = 1.0;
    return out;
  }
  std::vector<std::pair<double, double>> pts;
  for (std::size_t j = 0; j < out.w.size(); ++j)
    if (out.deviation[j] > 0.0) pts.emplace_back(out.w[j], out.deviation[j] + out.tail_bound[j]);
  if (pts.size() < 3) {
    out.mu = Exponent::of(0.0);
    out.r2 = 0.0;
    return out;
  }
  const SlopeFit fit = fit_slope(pts);
  out.mu = Exponent::of(std::max(0.0, -fit.slope));
  out.r2 = fit.r2;
  return out;
}

TruncatedL1 truncated_l1(const Kernel1D& kernel, double R) {
  return {symmetric_shell(kernel, 0.0, 0.0, R), kernel.integral_tail_bound(R, 0.0)};
}

double l1_norm(const KernelND& kernel) {
  double v = 1.0;
  for (const auto& f : kernel.factors()) v *= symmetric_shell(f, 0.0, 0.0, kInf);
  return v;
}

namespace {

// Integral of |chi| * g(|t|_2) over a box with the ball indicator |t|_2 <= rho.
double ball_integral(const KernelND& kernel, double nu, double rho, bool inside) {
  const std::size_t n = kernel.dim();
  std::vector<double> lo(n), hi(n);
  std::vector<std::vector<double>> breaks(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Kernel1D& f = kernel.factor(i);
    const double r = inside ? std::min(rho, f.radius()) : f.radius();
    const double ext = std::isfinite(r) ? r : 64.0;
    lo[i] = -ext;
    hi[i] = ext;
    breaks[i] = merged_breaks(f, -ext, ext, {0.0, -rho, rho}, f.compact() ? 0.0 : panel_of(f));
  }
  const FnN g = [&](std::span<const double> t) {
    double r2 = 0.0;
    for (double v : t) r2 += v * v;
    const double r = std::sqrt(r2);
    if (inside ? r > rho : r <= rho) return 0.0;
    return std::abs(kernel(t)) * pow_abs(r, nu);
  };
  const IntegrationResult res = integrate_box(g, Box(lo, hi), AdaptiveOptions{1e-12, 1e-8, 200000}, breaks);
  return res.value;
}

bool inside_ball(const KernelND& kernel, double rho) {
  double c = 0.0;
  for (const auto& f : kernel.factors()) {
    if (!f.compact()) return false;
    c += f.radius() * f.radius();
  }
  return std::sqrt(c) <= rho;
}

}  // namespace

TailMass tail_mass(const KernelND& kernel, double M, const std::vector<double>& w_list) {
  if (!(M > 0.0)) throw std::invalid_argument("tail_mass: M must be positive");
  TailMass out;
  const std::size_t n = kernel.dim();
  for (double w : w_list) {
    if (!(w > 0.0)) throw std::invalid_argument("tail_mass: w must be positive");
    const double rho = w * M;
    double v = 0.0;
    if (inside_ball(kernel, rho)) {
      v = 0.0;
    } else if (n == 1) {
      v = symmetric_shell(kernel.factor(0), 0.0, rho, kInf);
    } else if (kernel.compact()) {
      v = ball_integral(kernel, 0.0, rho, false);
    } else {
      v = std::max(0.0, l1_norm(kernel) - ball_integral(kernel, 0.0, rho, true));
    }
    out.w.push_back(w);
    out.values.push_back(v);
    out.errors.push_back(0.0);
  }
  if (out.values.empty() || out.values.back() == 0.0) {
    out.alpha = Exponent::exact();
    return out;
  }
  std::vector<std::pair<double, double>> pts;
  for (std::size_t j = 0; j < out.w.size(); ++j)
    if (out.values[j] > 0.0) pts.emplace_back(out.w[j], out.values[j]);
  if (pts.size() < 3) throw std::invalid_argument("tail_mass: at least 3 positive values are needed to fit alpha");
  const SlopeFit fit = fit_slope(pts);
  out.alpha = Exponent::of(std::max(0.0, -fit.slope));
  out.r2 = fit.r2;
  return out;
}

WeightedTailMoment weighted_tail_moment(const KernelND& kernel, double nu, double gamma, const std::vector<double>& w_list) {
  if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("weighted_tail_moment: nu must lie in (0, 1]");
  if (!(gamma > 0.0)) throw std::invalid_argument("weighted_tail_moment: gamma must be positive");
  if (w_list.size() < 3) throw std::invalid_argument("weighted_tail_moment: at least 3 w values required for a fit");
  WeightedTailMoment out;
  const std::size_t n = kernel.dim();
  for (double w : w_list) {
    if (!(w > 0.0)) throw std::invalid_argument("weighted_tail_moment: w must be positive");
    const double rho = gamma * w;
    // Substituting u = w t: w^{-nu} times the moment of |chi| over |u| <= gamma w.
    double inner = 0.0;
    if (n == 1)
      inner = symmetric_shell(kernel.factor(0), nu, 0.0, rho);
    else
      inner = ball_integral(kernel, nu, rho, true);
    out.w.push_back(w);
    out.values.push_back(std::pow(w, -nu) * inner);
  }
  std::vector<std::pair<double, double>> pts;
  for (std::size_t j = 0; j < out.w.size(); ++j) pts.emplace_back(out.w[j], out.values[j]);
  const SlopeFit fit = fit_slope(pts);
  out.theta = std::max(0.0, -fit.slope);
  out.r2 = fit.r2;
  return out;
}

double continuous_moment(const KernelND& kernel, double nu) {
  if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("continuous_moment: nu must lie in (0, 1]");
  for (const auto& f : kernel.factors())
    if (!f.compact() && std::get<DecaySupport>(f.support()).power - nu <= 1.0) return kInf;
  if (kernel.dim() == 1) return symmetric_shell(kernel.factor(0), nu, 0.0, kInf);
  return ball_integral(kernel, nu, kInf, true);
}

std::map<int, double> fourier_check(const Kernel1D& kernel, int kmin, int kmax) {
  if (kmin > kmax) throw std::invalid_argument("fourier_check: empty frequency range");
  std::map<int, double> out;
  for (int k = kmin; k <= kmax; ++k) {
    const double v = 2.0 * std::numbers::pi * k;
    const double panel = std::min(panel_of(kernel), 0.25 / std::max(1, std::abs(k)));
    const Fn1 re = [&](double t) { return kernel(t) * std::cos(v * t); };
    const Fn1 im = [&](double t) { return -kernel(t) * std::sin(v * t); };
    double R = 0.0, I = 0.0;
    if (kernel.compact()) {
      const double r = kernel.radius();
      const auto br = merged_breaks(kernel, -r, r, {0.0}, panel);
      R = integrate_checked(re, br);
      I = integrate_checked(im, br);
    } else {
      const double q = std::get<DecaySupport>(kernel.support()).power;
      // Fold onto [0, inf).
      const Fn1 re2 = [&](double t) { return re(t) + re(-t); };
      const Fn1 im2 = [&](double t) { return im(t) + im(-t); };
      R = half_line(re2, 0.0, q, panel, 2048.0).value;
      I = half_line(im2, 0.0, q, panel, 2048.0).value;
    }
    out[k] = std::hypot(R - (k == 0 ? 1.0 : 0.0), I);
  }
  return out;
}

double KernelCertificate::truncation_radius(double tol) const { return kanto::truncation_radius(kernel, tol); }

bool KernelCertificate::certified() const {
  for (const char* c : {"chi1", "chi2", "chi3", "chi4"}) {
    const auto it = conditions.find(c);
    if (it == conditions.end() || !it->second.ok) return false;
  }
  return true;
}

namespace {

nlohmann::json exponent_json(const Exponent& e) {
  if (e.is_exact()) return "exact";
  return e.value();
}

nlohmann::json number_or(double v, const char* label) {
  if (std::isfinite(v)) return v;
  return label;
}

}  // namespace

nlohmann::json KernelCertificate::to_json() const {
  using nlohmann::json;
  json j;
  j["kernel"] = kernel_id;
  j["scheme"] = scheme_spec;
  j["l1_norm"] = l1;
  j["m0"] = number_or(m0.value, "divergent");
  j["m0_tail_bound"] = m0.tail_bound;
  json mb = json::object(), mbt = json::object();
  for (const auto& [b, m] : m_beta) {
    mb[format_key(b)] = m.divergent ? json("divergent") : json(m.value);
    mbt[format_key(b)] = number_or(m.tail_bound, "infinite");
  }
  j["m_beta"] = mb;
  j["m_beta_tail_bound"] = mbt;
  j["mu"] = exponent_json(partition.mu);
  json pd = json::array();
  for (std::size_t i = 0; i < partition.w.size(); ++i)
    pd.push_back({{"w", partition.w[i]}, {"deviation", partition.deviation[i]}, {"tail_bound", partition.tail_bound[i]}});
  j["partition_deviation"] = pd;
  j["alpha"] = exponent_json(tail.alpha);
  json tm = json::array();
  for (std::size_t i = 0; i < tail.w.size(); ++i) tm.push_back({{"w", tail.w[i]}, {"value", tail.values[i]}});
  j["tail_mass"] = tm;
  json th = json::object();
  for (const auto& [nu, t] : theta) th[format_key(nu)] = t.theta;
  j["theta"] = th;
  json cm = json::object();
  for (const auto& [nu, v] : continuous) cm[format_key(nu)] = number_or(v, "infinite");
  j["continuous_moment"] = cm;
  json fo = json::array();
  for (std::size_t i = 0; i < fourier.size(); ++i) {
    json f = json::object();
    for (const auto& [k, r] : fourier[i]) f[std::to_string(k)] = r;
    fo.push_back(f);
  }
  j["fourier_residual"] = fo;
  json cond = json::object();
  for (const auto& [name, c] : conditions) cond[name] = {{"ok", c.ok}, {"detail", c.detail}};
  j["conditions"] = cond;
  j["certified"] = certified();
  j["config"] = {{"betas", config.betas},
                 {"nus", config.nus},
                 {"w", config.w_list},
                 {"M", config.M},
                 {"gamma", config.gamma},
                 {"grid_step", config.grid_step},
                 {"moment_tol", config.moments.tol},
                 {"moment_max_radius", config.moments.max_radius},
                 {"moment_search_extent", config.moments.search_extent},
                 {"partition_tol", config.partition_tol},
                 {"fourier_k", config.fourier_k},
                 {"truncation_radius_1e-8", truncation_radius(1e-8)}};
  return j;
}

KernelCertificate certify_kernel(const KernelND& kernel, const SamplingScheme& scheme, const CertifyOptions& opt_in) {
  CertifyOptions opt = opt_in;
  const std::size_t n = kernel.dim();
  if (scheme.dim() != n) throw std::invalid_argument("certify_kernel: scheme dimension mismatch");
  if (opt.grid_step <= 0.0) {
    if (n == 1)
      opt.grid_step = kernel.compact() ? 1e-3 : 1e-2;
    else
      opt.grid_step = kernel.compact() ? 1.0 / 64.0 : 1.0 / 16.0;
  }
  KernelCertificate c;
  c.kernel = kernel;
  c.kernel_id = kernel.id();
  c.scheme_spec = scheme.spec();
  c.config = opt;

  try {
    c.l1 = l1_norm(kernel);
  } catch (const ConvergenceError&) {
    c.l1 = kInf;
  }
  const bool bounded = std::all_of(kernel.factors().begin(), kernel.factors().end(),
                                   [](const Kernel1D& f) { return std::isfinite(f.sup_abs()); });
  c.conditions["chi1"] = {std::isfinite(c.l1) && bounded,
                          "L1 norm " + format_key(c.l1) + (bounded ? ", bounded" : ", unbounded")};

  c.partition = partition_deviation(kernel, scheme, opt.w_list, opt.partition_tol);
  {
    const bool ok = c.partition.mu.is_exact() || c.partition.mu.value() > 0.0;
    c.conditions["chi2"] = {ok, c.partition.mu.is_exact() ? "A_w = 1 up to the truncation bound for every tested w"
                                                          : "fitted mu = " + format_key(c.partition.mu.value())};
  }

  c.m0 = discrete_moment(kernel, scheme, 0.0, opt.grid_step, opt.moments);
  std::string finite_betas;
  for (double b : opt.betas) {
    c.m_beta[b] = discrete_moment(kernel, scheme, b, opt.grid_step, opt.moments);
    if (!c.m_beta[b].divergent && b > 0.0) finite_betas += (finite_betas.empty() ? "" : ",") + format_key(b);
  }
  {
    const bool ok = !c.m0.divergent && !finite_betas.empty();
    c.conditions["chi3"] = {ok, ok ? "finite moments for beta in {" + finite_betas + "}" : "no tested beta > 0 gives a finite moment"};
  }

  c.tail = tail_mass(kernel, opt.M, opt.w_list);
  {
    const bool ok = c.tail.alpha.is_exact() || c.tail.alpha.value() > 0.0;
    c.conditions["chi4"] = {ok, c.tail.alpha.is_exact() ? "tail vanishes (compact support)"
                                                        : "fitted alpha = " + format_key(c.tail.alpha.value())};
  }

  for (double nu : opt.nus) {
    c.theta[nu] = weighted_tail_moment(kernel, nu, opt.gamma, opt.w_list);
    c.continuous[nu] = continuous_moment(kernel, nu);
  }

  double worst = 0.0;
  for (const auto& f : kernel.factors()) {
    c.fourier.push_back(fourier_check(f, -opt.fourier_k, opt.fourier_k));
    for (const auto& [k, r] : c.fourier.back()) worst = std::max(worst, r);
  }
  c.conditions["poisson"] = {worst <= 1e-8, "max |chi_hat(2 pi k) - delta_k0| = " + format_key(worst) + " (informational)"};
  return c;
}

}  // namespace kanto
