#include "kanto/operator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kanto/parallel.hpp"

namespace kanto {

namespace {

constexpr std::size_t kMaxCells = 60'000'000;

// Smallest k with t_k >= a.
long long first_at_or_above(const AxisNodes& nodes, double a) {
  long long k = nodes.lower_index(a);
  if (nodes.node(k) < a) ++k;
  return k;
}

const GridSignal* as_grid(const Signal& f) { return std::get_if<GridSignal>(&f); }

}  // namespace

void validate(const OperatorConfig& cfg) {
  if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("operator: truncation tolerance must be positive");
  if (cfg.quadrature_order < 1) throw std::invalid_argument("operator: quadrature order must be >= 1");
  if (cfg.kernel.dim() != cfg.scheme.dim()) throw std::invalid_argument("operator: kernel and scheme dimensions differ");
}

std::vector<double> grid_axis(const GridSpec& grid, std::size_t axis) {
  const std::size_t r = grid.resolution.at(axis);
  if (r == 0) throw std::invalid_argument("grid: resolution must be >= 1");
  const double lo = grid.box.lo[axis], hi = grid.box.hi[axis];
  std::vector<double> x(r);
  if (r == 1) {
    x[0] = 0.5 * (lo + hi);
    return x;
  }
  for (std::size_t j = 0; j < r; ++j) x[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(r - 1);
  x.back() = hi;
  return x;
}

SeriesEvaluator::SeriesEvaluator(const OperatorConfig& cfg, const Signal& f, double w, const Box& region)
    : cfg_(cfg), w_(w), region_(region) {
  validate(cfg_);
  validate(f);
  if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("operator: w must be positive");
  const std::size_t n = cfg_.kernel.dim();
  if (signal_dim(f) != n || region.dim() != n) throw std::invalid_argument("operator: signal, region and kernel dimensions differ");

  const auto deltas = cfg_.scheme.deltas();
  radii_ = truncation_radii(cfg_.kernel, cfg_.tolerance, deltas);
  const auto support = signal_support(f);
  const GridSignal* grid = as_grid(f);
  const bool replicate = grid && grid->boundary == Boundary::Replicate;
  std::vector<IndexRange> data_cells;
  if (support)
    data_cells = cfg_.scheme.cells_in_box(w, *support);
  else if (replicate)
    data_cells = cfg_.scheme.cells_in_box(w, grid->extent());

  bool exact = true;
  ranges_.resize(n);
  lumped_.assign(n, replicate);
  for (std::size_t i = 0; i < n; ++i) {
    const AxisNodes& nodes = cfg_.scheme.axis(i);
    IndexRange win{first_at_or_above(nodes, w * region.lo[i] - radii_[i]), nodes.lower_index(w * region.hi[i] + radii_[i])};
    if (!data_cells.empty()) {
      // Does every window over the region contain all data cells?
      const long long inner_lo = first_at_or_above(nodes, w * region.hi[i] - radii_[i]);
      const long long inner_hi = nodes.lower_index(w * region.lo[i] + radii_[i]);
      if (!cfg_.kernel.factor(i).compact() && (inner_lo > data_cells[i].first || inner_hi < data_cells[i].last))
        exact = false;
      win.first = std::max(win.first, data_cells[i].first);
      win.last = std::min(win.last, data_cells[i].last);
    } else if (!cfg_.kernel.factor(i).compact()) {
      exact = false;
    }
    ranges_[i] = win;
  }
  if (replicate && !cfg_.kernel.compact()) exact = false;
  if (!exact) {
    // Lumped edge slots are exact sums over the window; what is left out is
    // the tail beyond it.
    {
      const auto bound = signal_bound(f);
      if (!bound)
        throw std::domain_error("operator: signal has no declared bound, truncation error cannot be certified");
      truncation_bound_ = truncation_tail_bound(cfg_.kernel, radii_, deltas) * *bound;
    }
  }

  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = slots(i);
    if (k == 0) {
      total = 0;
      break;
    }
    if (total > kMaxCells / k) throw std::length_error("operator: index window too large; raise the tolerance or shrink the region");
    total *= k;
  }
  means_.assign(total, 0.0);
  if (total == 0) return;

  std::vector<char> ok(total, 1);
  parallel_for(total, [&](std::size_t id) {
    std::vector<long long> k(n);
    Cell cell;
    cell.lo.resize(n);
    cell.hi.resize(n);
    std::size_t rem = id;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = slots(i);
      const std::size_t j = rem % m;
      rem /= m;
      const AxisNodes& nodes = cfg_.scheme.axis(i);
      if (lumped_[i] && (j == 0 || j == m - 1)) {
        // Any interval beyond the edge averages to the edge pixels.
        const double o = grid->origin[i], h = grid->h, e = o + h * static_cast<double>(grid->shape[i]);
        cell.lo[i] = j == 0 ? o - h : e;
        cell.hi[i] = j == 0 ? o : e + h;
        continue;
      }
      const long long kk = ranges_[i].first + static_cast<long long>(j) - (lumped_[i] ? 1 : 0);
      cell.lo[i] = nodes.node(kk) / w;
      cell.hi[i] = nodes.node(kk + 1) / w;
    }
    if (cfg_.check_quadrature) {
      const MeanValue m = mean_value(f, cell, cfg_.quadrature_order);
      means_[id] = m.value;
      ok[id] = m.converged;
    } else {
      means_[id] = mean_value_fast(f, cell, cfg_.quadrature_order);
    }
  }, 256);
  converged_ = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
}

std::size_t SeriesEvaluator::slots(std::size_t axis) const {
  const auto s = static_cast<std::size_t>(std::max<long long>(0, ranges_[axis].size()));
  return s + (lumped_[axis] ? 2 : 0);
}

std::vector<IndexRange> SeriesEvaluator::window(std::span<const double> x) const {
  std::vector<IndexRange> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const AxisNodes& nodes = cfg_.scheme.axis(i);
    const double u = w_ * x[i];
    out[i] = {first_at_or_above(nodes, u - radii_[i]), nodes.lower_index(u + radii_[i])};
  }
  return out;
}

SeriesEvaluator::Band SeriesEvaluator::band(std::size_t axis, double x) const {
  const AxisNodes& nodes = cfg_.scheme.axis(axis);
  const Kernel1D& chi = cfg_.kernel.factor(axis);
  const double u = w_ * x;
  const double ctx = chi.shift_context(u);
  const bool uniform = nodes.rule() == AxisNodes::Rule::Uniform;
  auto weight = [&](long long k) {
    return uniform ? chi.shifted(u, k, ctx) : chi(u - nodes.node(k));
  };
  const long long wl = first_at_or_above(nodes, u - radii_[axis]);
  const long long wh = nodes.lower_index(u + radii_[axis]);
  const IndexRange& r = ranges_[axis];
  const long long off = lumped_[axis] ? 1 : 0;
  Band b;
  const long long lo = std::max(wl, r.first), hi = std::min(wh, r.last);
  double low_mass = 0.0, high_mass = 0.0;
  bool has_low = false, has_high = false;
  if (lumped_[axis]) {
    for (long long k = wl; k <= std::min(wh, r.first - 1); ++k) low_mass += weight(k);
    for (long long k = std::max(wl, r.last + 1); k <= wh; ++k) high_mass += weight(k);
    has_low = wl < r.first;
    has_high = wh > r.last;
  }
  if (lo > hi) {
    if (has_low) {
      b.begin = 0;
      b.weights = {low_mass};
    } else if (has_high) {
      b.begin = slots(axis) - 1;
      b.weights = {high_mass};
    }
    return b;
  }
  b.begin = static_cast<std::size_t>(lo - r.first + off);
  if (has_low) {
    // The window then starts below the explicit range, so the band is contiguous from slot 0.
    b.begin = 0;
    b.weights.push_back(low_mass);
  }
  for (long long k = lo; k <= hi; ++k) b.weights.push_back(weight(k));
  if (has_high) b.weights.push_back(high_mass);
  return b;
}

double SeriesEvaluator::abs_mean_sum() const {
  double s = 0.0;
  for (double m : means_) s += std::abs(m);
  return s;
}

double SeriesEvaluator::operator()(std::span<const double> x) const {
  const std::size_t n = x.size();
  if (n != region_.dim()) throw std::invalid_argument("operator: point dimension mismatch");
  if (means_.empty()) return 0.0;
  if (n == 1) {
    const Band b = band(0, x[0]);
    double s = 0.0;
    for (std::size_t j = 0; j < b.weights.size(); ++j) s += b.weights[j] * means_[b.begin + j];
    return s;
  }
  GridSpec g{Box(std::vector<double>(x.begin(), x.end()), std::vector<double>(x.begin(), x.end())),
             std::vector<std::size_t>(n, 1)};
  return grid(g).values[0];
}

Field SeriesEvaluator::grid(const GridSpec& spec) const {
  const std::size_t n = region_.dim();
  if (spec.box.dim() != n || spec.resolution.size() != n) throw std::invalid_argument("grid: dimension mismatch");
  Field out;
  out.shape = spec.resolution;
  out.truncation_bound = truncation_bound_;
  out.quadrature_converged = converged_;
  std::size_t points = 1;
  for (auto r : spec.resolution) points *= r;
  if (points == 0) throw std::invalid_argument("grid: resolution must be >= 1");
  if (means_.empty()) {
    out.values.assign(points, 0.0);
    return out;
  }
  std::vector<std::vector<Band>> bands(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xs = grid_axis(spec, i);
    const double slack = 1e-12 * (1.0 + std::abs(region_.lo[i]) + std::abs(region_.hi[i]));
    for (double v : xs)
      if (v < region_.lo[i] - slack || v > region_.hi[i] + slack)
        throw std::invalid_argument("grid: node outside the evaluator region");
    bands[i].resize(xs.size());
    parallel_for(xs.size(), [&](std::size_t g) { bands[i][g] = band(i, xs[g]); }, 16);
  }
  // Mode products, axis 0 first: shape (G_0..G_{i-1}, K_i, ..., K_{n-1}).
  std::vector<double> cur = means_;
  std::vector<std::size_t> shape(n);
  for (std::size_t i = 0; i < n; ++i) shape[i] = slots(i);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t inner = 1, outer = 1;
    for (std::size_t j = 0; j < i; ++j) inner *= shape[j];
    for (std::size_t j = i + 1; j < n; ++j) outer *= shape[j];
    const std::size_t K = shape[i], G = spec.resolution[i];
    std::vector<double> next(inner * G * outer, 0.0);
    parallel_for(G * outer, [&](std::size_t id) {
      const std::size_t g = id % G, b = id / G;
      const Band& band_g = bands[i][g];
      for (std::size_t a = 0; a < inner; ++a) {
        double s = 0.0;
        for (std::size_t j = 0; j < band_g.weights.size(); ++j)
          s += band_g.weights[j] * cur[a + inner * (band_g.begin + j + K * b)];
        next[a + inner * (g + G * b)] = s;
      }
    }, 64);
    cur.swap(next);
    shape[i] = G;
  }
  out.values = std::move(cur);
  return out;
}

Evaluation apply(const OperatorConfig& cfg, const Signal& f, double w, std::span<const double> x) {
  const std::vector<double> p(x.begin(), x.end());
  const Box point(p, p);
  SeriesEvaluator ev(cfg, f, w, point);
  const Field r = ev.grid(GridSpec{point, std::vector<std::size_t>(p.size(), 1)});
  return {r.values[0], ev.truncation_bound()};
}

Field apply_grid(const OperatorConfig& cfg, const Signal& f, double w, const GridSpec& grid) {
  SeriesEvaluator ev(cfg, f, w, grid.box);
  return ev.grid(grid);
}

std::vector<double> apply_points(const OperatorConfig& cfg, const Signal& f, double w,
                                 const std::vector<std::vector<double>>& points, double* truncation_bound) {
  if (points.empty()) return {};
  const std::size_t n = points[0].size();
  std::vector<double> lo(points[0]), hi(points[0]);
  for (const auto& p : points) {
    if (p.size() != n) throw std::invalid_argument("apply_points: inconsistent point dimensions");
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  }
  SeriesEvaluator ev(cfg, f, w, Box(lo, hi));
  if (truncation_bound) *truncation_bound = ev.truncation_bound();
  std::vector<double> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) { out[i] = ev(points[i]); }, 1);
  return out;
}

}  // namespace kanto
