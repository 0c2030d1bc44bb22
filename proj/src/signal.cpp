#include "kanto/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kanto/quadrature.hpp"

namespace kanto {

Box GridSignal::extent() const {
  std::vector<double> lo(origin), hi(origin);
  for (std::size_t i = 0; i < shape.size(); ++i) hi[i] += h * static_cast<double>(shape[i]);
  return Box(lo, hi);
}

double GridSignal::at(std::span<const std::size_t> idx) const {
  std::size_t off = 0, stride = 1;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    off += idx[i] * stride;
    stride *= shape[i];
  }
  return values[off];
}

namespace {

struct AnalyticDim {
  std::size_t operator()(const Analytic& a) const { return a.dim; }
  std::size_t operator()(const GridSignal& g) const { return g.dim(); }
};

// Per-axis pixel overlaps of [a, b]: (pixel index, length), Replicate folds
// the out-of-grid parts onto the edge pixels.
std::vector<std::pair<std::size_t, double>> overlaps(const GridSignal& g, std::size_t axis, double a, double b) {
  std::vector<std::pair<std::size_t, double>> out;
  const double o = g.origin[axis], h = g.h;
  const std::size_t n = g.shape[axis];
  const double lo = o, hi = o + h * static_cast<double>(n);
  double left_extra = 0.0, right_extra = 0.0;
  if (g.boundary == Boundary::Replicate) {
    left_extra = std::max(0.0, std::min(b, lo) - a);
    right_extra = std::max(0.0, b - std::max(a, hi));
  }
  const double ca = std::max(a, lo), cb = std::min(b, hi);
  if (cb > ca) {
    auto j0 = static_cast<long long>(std::floor((ca - o) / h));
    auto j1 = static_cast<long long>(std::ceil((cb - o) / h)) - 1;
    j0 = std::clamp<long long>(j0, 0, static_cast<long long>(n) - 1);
    j1 = std::clamp<long long>(j1, 0, static_cast<long long>(n) - 1);
    for (long long j = j0; j <= j1; ++j) {
      const double pa = o + h * static_cast<double>(j), pb = o + h * static_cast<double>(j + 1);
      const double len = std::min(cb, pb) - std::max(ca, pa);
      if (len > 0.0) out.emplace_back(static_cast<std::size_t>(j), len);
    }
  }
  if (left_extra > 0.0) {
    if (!out.empty() && out.front().first == 0)
      out.front().second += left_extra;
    else
      out.insert(out.begin(), {0, left_extra});
  }
  if (right_extra > 0.0) {
    if (!out.empty() && out.back().first == n - 1)
      out.back().second += right_extra;
    else
      out.emplace_back(n - 1, right_extra);
  }
  return out;
}

double grid_mean(const GridSignal& g, const Cell& cell) {
  const std::size_t n = g.dim();
  std::vector<std::vector<std::pair<std::size_t, double>>> ov(n);
  for (std::size_t i = 0; i < n; ++i) {
    ov[i] = overlaps(g, i, cell.lo[i], cell.hi[i]);
    if (ov[i].empty()) return 0.0;
  }
  std::vector<std::size_t> pos(n, 0), idx(n);
  double sum = 0.0;
  for (;;) {
    double wt = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      idx[i] = ov[i][pos[i]].first;
      wt *= ov[i][pos[i]].second;
    }
    sum += wt * g.at(idx);
    std::size_t d = 0;
    while (d < n && ++pos[d] == ov[d].size()) pos[d++] = 0;
    if (d == n) break;
  }
  double vol = 1.0;
  for (std::size_t i = 0; i < n; ++i) vol *= cell.hi[i] - cell.lo[i];
  return sum / vol;
}

double analytic_mean(const Analytic& a, const Cell& cell, int order) {
  Box region(cell.lo, cell.hi);
  double vol = region.measure();
  if (!(vol > 0.0)) throw std::invalid_argument("mean_value: degenerate cell");
  if (a.support) {
    for (std::size_t i = 0; i < region.dim(); ++i) {
      region.lo[i] = std::max(region.lo[i], a.support->lo[i]);
      region.hi[i] = std::min(region.hi[i], a.support->hi[i]);
      if (!(region.hi[i] > region.lo[i])) return 0.0;
    }
  }
  return integrate_gauss(a.fn, region, order) / vol;
}

}  // namespace

std::size_t signal_dim(const Signal& f) { return std::visit(AnalyticDim{}, f); }

double evaluate(const Signal& f, std::span<const double> x) {
  if (const auto* a = std::get_if<Analytic>(&f)) {
    if (a->support && !a->support->contains(x)) return 0.0;
    return a->fn(x);
  }
  const auto& g = std::get<GridSignal>(f);
  std::vector<std::size_t> idx(g.dim());
  for (std::size_t i = 0; i < g.dim(); ++i) {
    const double r = std::floor((x[i] - g.origin[i]) / g.h);
    const double last = static_cast<double>(g.shape[i]) - 1.0;
    if (r < 0.0 || r > last) {
      if (g.boundary == Boundary::Zero) return 0.0;
      idx[i] = r < 0.0 ? 0 : g.shape[i] - 1;
    } else {
      idx[i] = static_cast<std::size_t>(r);
    }
  }
  return g.at(idx);
}

std::optional<Box> signal_support(const Signal& f) {
  if (const auto* a = std::get_if<Analytic>(&f)) return a->support;
  const auto& g = std::get<GridSignal>(f);
  if (g.boundary == Boundary::Zero) return g.extent();
  return std::nullopt;
}

std::optional<double> signal_bound(const Signal& f) {
  if (const auto* a = std::get_if<Analytic>(&f)) return a->bound;
  const auto& g = std::get<GridSignal>(f);
  double m = 0.0;
  for (double v : g.values) m = std::max(m, std::abs(v));
  return m;
}

void validate(const Signal& f) {
  if (const auto* a = std::get_if<Analytic>(&f)) {
    if (!a->fn) throw std::invalid_argument("signal: empty field function");
    if (a->dim == 0) throw std::invalid_argument("signal: dimension must be positive");
    if (a->support && a->support->dim() != a->dim) throw std::invalid_argument("signal: support dimension mismatch");
    if (a->bound && !(*a->bound >= 0.0)) throw std::invalid_argument("signal: bound must be nonnegative");
    return;
  }
  const auto& g = std::get<GridSignal>(f);
  if (g.shape.empty() || g.origin.size() != g.shape.size()) throw std::invalid_argument("grid signal: shape/origin mismatch");
  if (!(g.h > 0.0)) throw std::invalid_argument("grid signal: pixel size must be positive");
  std::size_t count = 1;
  for (auto s : g.shape) {
    if (s == 0) throw std::invalid_argument("grid signal: empty axis");
    count *= s;
  }
  if (g.values.size() != count) throw std::invalid_argument("grid signal: value count does not match shape");
  for (double v : g.values)
    if (!std::isfinite(v)) throw std::invalid_argument("grid signal: non-finite value");
}

MeanValue mean_value(const Signal& f, const Cell& cell, int order) {
  if (order < 1) throw std::invalid_argument("mean_value: quadrature order must be >= 1");
  for (std::size_t i = 0; i < cell.lo.size(); ++i)
    if (!(cell.lo[i] < cell.hi[i])) throw std::invalid_argument("mean_value: invalid cell");
  if (const auto* g = std::get_if<GridSignal>(&f)) return {grid_mean(*g, cell), true};
  const auto& a = std::get<Analytic>(f);
  const double q = analytic_mean(a, cell, order);
  const double q1 = analytic_mean(a, cell, order + 1);
  const bool ok = std::abs(q - q1) <= 1e-8 * std::max(std::abs(q1), 1e-300) || q == q1;
  return {q, ok};
}

double mean_value_fast(const Signal& f, const Cell& cell, int order) {
  if (const auto* g = std::get_if<GridSignal>(&f)) return grid_mean(*g, cell);
  return analytic_mean(std::get<Analytic>(f), cell, order);
}

}  // namespace kanto
