#include "kanto/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <stdexcept>

#include "kanto/parallel.hpp"

namespace kanto {

namespace {

// Kronrod 15 abscissae (positive half) and weights; Gauss 7 weights for the
// odd-indexed abscissae and the centre.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// 15 nodes in [-1,1] with Kronrod and Gauss (0 where absent) weights.
struct Rule15 {
  std::array<double, 15> x{}, wk{}, wg{};
  Rule15() {
    for (int j = 0; j < 7; ++j) {
      x[j] = -kXgk[j];
      x[14 - j] = kXgk[j];
      wk[j] = wk[14 - j] = kWgk[j];
      const double g = (j % 2 == 1) ? kWg[j / 2] : 0.0;
      wg[j] = wg[14 - j] = g;
    }
    x[7] = 0.0;
    wk[7] = kWgk[7];
    wg[7] = kWg[3];
  }
};
const Rule15 kRule;

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const Fn1& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double k = 0.0, g = 0.0;
  for (int j = 0; j < 15; ++j) {
    const double v = f(c + h * kRule.x[j]);
    k += kRule.wk[j] * v;
    g += kRule.wg[j] * v;
  }
  return {a, b, k * h, std::abs((k - g) * h)};
}

bool within(const AdaptiveOptions& opt, double value, double error) {
  return error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
}

IntegrationResult refine(const Fn1& f, std::vector<Segment> initial, const AdaptiveOptions& opt) {
  std::priority_queue<Segment> queue(std::less<Segment>(), std::move(initial));
  double value = 0.0, error = 0.0;
  {
    auto copy = queue;
    std::vector<Segment> all;
    while (!copy.empty()) {
      all.push_back(copy.top());
      copy.pop();
    }
    std::sort(all.begin(), all.end(), [](const Segment& l, const Segment& r) { return l.a < r.a; });
    for (const auto& s : all) {
      value += s.value;
      error += s.error;
    }
  }
  while (!within(opt, value, error) && queue.size() < opt.max_regions) {
    const Segment worst = queue.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted
    queue.pop();
    const Segment l = gk15(f, worst.a, mid), r = gk15(f, mid, worst.b);
    value += l.value + r.value - worst.value;
    error += l.error + r.error - worst.error;
    queue.push(l);
    queue.push(r);
  }
  // Re-sum in position order so the value does not depend on update history.
  std::vector<Segment> all;
  all.reserve(queue.size());
  while (!queue.empty()) {
    all.push_back(queue.top());
    queue.pop();
  }
  std::sort(all.begin(), all.end(), [](const Segment& l, const Segment& r) { return l.a < r.a; });
  IntegrationResult out;
  for (const auto& s : all) {
    out.value += s.value;
    out.error += s.error;
  }
  out.regions = all.size();
  out.converged = within(opt, out.value, out.error);
  return out;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged root.
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (x * p0 - p1) / (x * x - 1.0);
    const double wgt = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = wgt;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return cache.emplace(n, std::move(rule)).first->second;
}

IntegrationResult integrate_adaptive(const Fn1& f, double a, double b, const AdaptiveOptions& opt) {
  const std::array<double, 2> pts = {a, b};
  return integrate_panels(f, pts, opt);
}

IntegrationResult integrate_panels(const Fn1& f, std::span<const double> breakpoints, const AdaptiveOptions& opt) {
  if (breakpoints.size() < 2) throw std::invalid_argument("integrate_panels: need at least two breakpoints");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] >= breakpoints[i - 1])) throw std::invalid_argument("integrate_panels: breakpoints not sorted");
  std::vector<Segment> initial(breakpoints.size() - 1);
  parallel_for(initial.size(), [&](std::size_t i) { initial[i] = gk15(f, breakpoints[i], breakpoints[i + 1]); }, 16);
  std::erase_if(initial, [](const Segment& s) { return s.b <= s.a; });
  if (initial.empty()) return {0.0, 0.0, true, 0};
  return refine(f, std::move(initial), opt);
}

std::vector<double> aligned_breakpoints(double a, double b, double panel) {
  if (!(panel > 0.0)) throw std::invalid_argument("aligned_breakpoints: panel must be positive");
  std::vector<double> pts{a};
  double k = std::floor(a / panel) + 1.0;
  for (double t = k * panel; t < b; t = (++k) * panel)
    if (t > pts.back()) pts.push_back(t);
  if (b > pts.back()) pts.push_back(b);
  if (pts.size() == 1) pts.push_back(b);
  return pts;
}

namespace {

struct BoxRegion {
  std::vector<double> lo, hi;
  double value, error;
  bool operator<(const BoxRegion& o) const { return error < o.error; }
};

void tensor_gk(const FnN& f, BoxRegion& r) {
  const std::size_t n = r.lo.size();
  std::vector<double> c(n), h(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = 0.5 * (r.lo[i] + r.hi[i]);
    h[i] = 0.5 * (r.hi[i] - r.lo[i]);
  }
  std::vector<int> idx(n, 0);
  double k = 0.0, g = 0.0, vol = 1.0;
  for (std::size_t i = 0; i < n; ++i) vol *= h[i];
  for (;;) {
    double wk = 1.0, wg = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = c[i] + h[i] * kRule.x[idx[i]];
      wk *= kRule.wk[idx[i]];
      wg *= kRule.wg[idx[i]];
    }
    const double v = f(x);
    k += wk * v;
    g += wg * v;
    std::size_t d = 0;
    while (d < n && ++idx[d] == 15) idx[d++] = 0;
    if (d == n) break;
  }
  r.value = k * vol;
  r.error = std::abs((k - g) * vol);
}

}  // namespace

IntegrationResult integrate_box(const FnN& f, const Box& box, const AdaptiveOptions& opt,
                                const std::vector<std::vector<double>>& axis_breaks) {
  const std::size_t n = box.dim();
  if (n == 1) {
    const Fn1 g = [&f](double t) { return f(std::span<const double>(&t, 1)); };
    if (!axis_breaks.empty() && axis_breaks[0].size() >= 2) return integrate_panels(g, axis_breaks[0], opt);
    return integrate_adaptive(g, box.lo[0], box.hi[0], opt);
  }
  std::vector<std::vector<double>> cuts(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < axis_breaks.size() && axis_breaks[i].size() >= 2)
      cuts[i] = axis_breaks[i];
    else
      cuts[i] = {box.lo[i], box.hi[i]};
  }
  std::size_t count = 1;
  for (const auto& c : cuts) count *= c.size() - 1;
  std::vector<BoxRegion> initial(count);
  parallel_for(count, [&](std::size_t id) {
    BoxRegion r{std::vector<double>(n), std::vector<double>(n), 0.0, 0.0};
    std::size_t rem = id;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = cuts[i].size() - 1, j = rem % m;
      rem /= m;
      r.lo[i] = cuts[i][j];
      r.hi[i] = cuts[i][j + 1];
    }
    tensor_gk(f, r);
    initial[id] = std::move(r);
  }, 4);
  double value = 0.0, error = 0.0;
  for (const auto& r : initial) {
    value += r.value;
    error += r.error;
  }
  std::priority_queue<BoxRegion> queue(std::less<BoxRegion>(), std::move(initial));
  const std::size_t children = std::size_t{1} << n;
  while (!within(opt, value, error) && queue.size() + children <= opt.max_regions) {
    BoxRegion worst = queue.top();
    queue.pop();
    std::vector<BoxRegion> kids(children);
    parallel_for(children, [&](std::size_t m) {
      BoxRegion r{worst.lo, worst.hi, 0.0, 0.0};
      for (std::size_t i = 0; i < n; ++i) {
        const double mid = 0.5 * (worst.lo[i] + worst.hi[i]);
        if (m >> i & 1u)
          r.lo[i] = mid;
        else
          r.hi[i] = mid;
      }
      tensor_gk(f, r);
      kids[m] = std::move(r);
    }, 1);
    value -= worst.value;
    error -= worst.error;
    for (auto& r : kids) {
      value += r.value;
      error += r.error;
      queue.push(std::move(r));
    }
  }
  std::vector<BoxRegion> all;
  all.reserve(queue.size());
  while (!queue.empty()) {
    all.push_back(queue.top());
    queue.pop();
  }
  std::sort(all.begin(), all.end(), [](const BoxRegion& l, const BoxRegion& r) { return l.lo < r.lo; });
  IntegrationResult out;
  for (const auto& r : all) {
    out.value += r.value;
    out.error += r.error;
  }
  out.regions = all.size();
  out.converged = within(opt, out.value, out.error);
  return out;
}

double integrate_gauss(const FnN& f, const Box& box, int order) {
  const GaussRule& rule = gauss_legendre(order);
  const std::size_t n = box.dim();
  std::vector<double> c(n), h(n), x(n);
  double vol = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = 0.5 * (box.lo[i] + box.hi[i]);
    h[i] = 0.5 * (box.hi[i] - box.lo[i]);
    vol *= h[i];
  }
  std::vector<int> idx(n, 0);
  double sum = 0.0;
  for (;;) {
    double wt = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = c[i] + h[i] * rule.nodes[idx[i]];
      wt *= rule.weights[idx[i]];
    }
    sum += wt * f(x);
    std::size_t d = 0;
    while (d < n && ++idx[d] == order) idx[d++] = 0;
    if (d == n) break;
  }
  return sum * vol;
}

}  // namespace kanto
