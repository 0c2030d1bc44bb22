#include "kanto/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kanto {

namespace {

constexpr double kPi = std::numbers::pi;

// sin(pi x) with exact zeros at the integers.
double sinpi(double x) {
  const double n = std::nearbyint(2.0 * x);
  const double r = x - 0.5 * n;
  const long long q = static_cast<long long>(std::fmod(n, 4.0) + 4.0) % 4;
  switch (q) {
    case 0: return std::sin(kPi * r);
    case 1: return std::cos(kPi * r);
    case 2: return -std::sin(kPi * r);
    default: return -std::cos(kPi * r);
  }
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

}  // namespace

double eval_sinc(double x) {
  if (x == 0.0) return 1.0;
  return sinpi(x) / (kPi * x);
}

double eval_fejer(double x) {
  const double s = eval_sinc(0.5 * x);
  return 0.5 * s * s;
}

double eval_bspline(int k, double x) {
  if (k < 1) throw std::invalid_argument("eval_bspline: order must be >= 1");
  if (k == 1) return (x > -0.5 && x <= 0.5) ? 1.0 : 0.0;
  // Even for k >= 2; the reflected argument keeps only the short side of
  // the alternating sum, which limits cancellation.
  const double a = std::abs(x);
  const double half = 0.5 * k;
  if (a >= half) return 0.0;
  double sum = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double u = half - a - i;
    if (u <= 0.0) break;
    const double term = binomial(k, i) * std::pow(u, k - 1);
    sum += (i % 2 == 0) ? term : -term;
  }
  return sum / factorial(k - 1);
}

Kernel1D::Kernel1D(std::string name, std::function<double(double)> eval, Support support, double sup_abs,
                   std::vector<double> breakpoints)
    : name_(std::move(name)), eval_(std::move(eval)), support_(support), sup_abs_(sup_abs),
      breaks_(std::move(breakpoints)) {
  if (!eval_) throw std::invalid_argument("Kernel1D: evaluator is empty");
  if (const auto* d = std::get_if<DecaySupport>(&support_)) {
    if (!(d->power > 1.0) || !(d->constant > 0.0))
      throw std::invalid_argument("Kernel1D: decay power must exceed 1 and constant must be positive");
  } else if (!(std::get<CompactSupport>(support_).radius > 0.0)) {
    throw std::invalid_argument("Kernel1D: support radius must be positive");
  }
  if (!(sup_abs_ > 0.0) || !std::isfinite(sup_abs_)) throw std::invalid_argument("Kernel1D: sup bound must be finite");
}

Kernel1D Kernel1D::fejer() {
  Kernel1D k;
  k.name_ = "fejer";
  k.eval_ = eval_fejer;
  k.support_ = DecaySupport{2.0, 2.0 / (kPi * kPi)};
  k.sup_abs_ = 0.5;
  k.period_ = 2.0;
  k.family_ = Family::Fejer;
  return k;
}

Kernel1D Kernel1D::bspline(int order) {
  if (order < 1) throw std::invalid_argument("bspline: order must be >= 1");
  Kernel1D k;
  k.name_ = "bspline:" + std::to_string(order);
  k.eval_ = [order](double x) { return eval_bspline(order, x); };
  k.support_ = CompactSupport{0.5 * order};
  k.sup_abs_ = eval_bspline(order, 0.0);
  for (int i = 0; i <= order; ++i) k.breaks_.push_back(-0.5 * order + i);
  k.family_ = Family::BSpline;
  k.order_ = order;
  return k;
}

double Kernel1D::operator()(double x) const {
  switch (family_) {
    case Family::Fejer: return eval_fejer(x);
    case Family::BSpline: return eval_bspline(order_, x);
    default: return eval_(x);
  }
}

double Kernel1D::shift_context(double u) const {
  if (family_ != Family::Fejer) return 0.0;
  const double s = sinpi(0.5 * u);
  return s * s;
}

double Kernel1D::shifted(double u, long long k, double s2) const {
  const double d = u - static_cast<double>(k);
  if (family_ != Family::Fejer) return (*this)(d);
  if (std::abs(d) < 1.0) return eval_fejer(d);
  // sin^2(pi (u - k) / 2) is sin^2(pi u / 2) for even k and cos^2 for odd k.
  const double s = (k & 1) ? 1.0 - s2 : s2;
  return 2.0 * s / (kPi * kPi * d * d);
}

double Kernel1D::radius() const {
  if (const auto* c = std::get_if<CompactSupport>(&support_)) return c->radius;
  return std::numeric_limits<double>::infinity();
}

double Kernel1D::tail_sum_bound(double R, double delta, double beta) const {
  if (!(delta > 0.0)) throw std::invalid_argument("tail_sum_bound: delta must be positive");
  if (const auto* c = std::get_if<CompactSupport>(&support_)) {
    if (R >= c->radius) return 0.0;
    return sup_abs_ * std::pow(c->radius, beta) * (2.0 * c->radius / delta + 1.0);
  }
  const auto& d = std::get<DecaySupport>(support_);
  const double q = d.power - beta;
  if (q <= 1.0) return std::numeric_limits<double>::infinity();
  const double far = [&](double r) {
    return 2.0 * d.constant * q / (q - 1.0) * std::max(1.0, 1.0 / delta) * std::pow(r, 1.0 - q);
  }(std::max(R, 1.0));
  if (R >= 1.0) return far;
  return sup_abs_ * (2.0 / delta + 1.0) + far;
}

double Kernel1D::sum_bound(double delta) const {
  if (const auto* c = std::get_if<CompactSupport>(&support_)) return sup_abs_ * (2.0 * c->radius / delta + 1.0);
  return tail_sum_bound(0.0, delta, 0.0);
}

double Kernel1D::radius_for(double tol, double delta, double beta) const {
  if (!(tol > 0.0)) throw std::invalid_argument("truncation radius: tolerance must be positive");
  if (const auto* c = std::get_if<CompactSupport>(&support_)) return c->radius;
  const auto& d = std::get<DecaySupport>(support_);
  const double q = d.power - beta;
  if (q <= 1.0) return std::numeric_limits<double>::infinity();
  const double scale = 2.0 * d.constant * q / (q - 1.0) * std::max(1.0, 1.0 / delta);
  return std::max(1.0, std::pow(scale / tol, 1.0 / (q - 1.0)));
}

double Kernel1D::integral_tail_bound(double R, double nu) const {
  if (const auto* c = std::get_if<CompactSupport>(&support_)) {
    if (R >= c->radius) return 0.0;
    return 2.0 * sup_abs_ * std::pow(c->radius, nu) * (c->radius - std::max(R, 0.0));
  }
  const auto& d = std::get<DecaySupport>(support_);
  const double q = d.power - nu;
  if (q <= 1.0) return std::numeric_limits<double>::infinity();
  const double r = std::max(R, 1.0);
  double bound = 2.0 * d.constant * std::pow(r, 1.0 - q) / (q - 1.0);
  if (R < 1.0) bound += 2.0 * sup_abs_ * (1.0 - std::max(R, 0.0));
  return bound;
}

KernelND::KernelND(std::vector<Kernel1D> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw std::invalid_argument("make_product_kernel: empty factor list");
}

double KernelND::operator()(std::span<const double> x) const {
  if (x.size() != factors_.size()) throw std::invalid_argument("KernelND: dimension mismatch");
  double v = 1.0;
  for (std::size_t i = 0; i < factors_.size(); ++i) v *= factors_[i](x[i]);
  return v;
}

bool KernelND::compact() const {
  return std::all_of(factors_.begin(), factors_.end(), [](const Kernel1D& k) { return k.compact(); });
}

std::string KernelND::id() const {
  if (factors_.size() == 1) return factors_[0].name();
  std::string s = "product:(";
  for (std::size_t i = 0; i < factors_.size(); ++i) s += (i ? "," : "") + factors_[i].name();
  return s + ")";
}

KernelND make_product_kernel(std::vector<Kernel1D> factors) { return KernelND(std::move(factors)); }

namespace {

void parse_into(const std::string& id, std::vector<Kernel1D>& out) {
  if (id == "fejer") {
    out.push_back(Kernel1D::fejer());
    return;
  }
  if (id.rfind("bspline:", 0) == 0) {
    const std::string digits = id.substr(8);
    if (digits.empty() || digits.size() > 3 || !std::all_of(digits.begin(), digits.end(), ::isdigit))
      throw std::invalid_argument("unknown kernel id: " + id);
    const int k = std::stoi(digits);
    if (k < 1) throw std::invalid_argument("bspline order must be >= 1: " + id);
    out.push_back(Kernel1D::bspline(k));
    return;
  }
  const std::string prefix = "product:(";
  if (id.rfind(prefix, 0) == 0 && id.back() == ')') {
    const std::string body = id.substr(prefix.size(), id.size() - prefix.size() - 1);
    int depth = 0;
    std::string cur;
    bool any = false;
    for (char ch : body) {
      if (ch == '(') ++depth;
      if (ch == ')') --depth;
      if (depth < 0) throw std::invalid_argument("unbalanced kernel id: " + id);
      if (ch == ',' && depth == 0) {
        parse_into(cur, out);
        cur.clear();
        any = true;
      } else if (ch != ' ') {
        cur += ch;
      }
    }
    if (depth != 0 || cur.empty()) throw std::invalid_argument("malformed kernel id: " + id);
    parse_into(cur, out);
    (void)any;
    return;
  }
  throw std::invalid_argument("unknown kernel id: " + id);
}

}  // namespace

KernelND parse_kernel(const std::string& id) {
  std::vector<Kernel1D> f;
  parse_into(id, f);
  return KernelND(std::move(f));
}

KernelND promote(const KernelND& kernel, std::size_t n) {
  if (kernel.dim() == n) return kernel;
  if (kernel.dim() != 1) throw std::invalid_argument("kernel dimension does not match the signal");
  return KernelND(std::vector<Kernel1D>(n, kernel.factor(0)));
}

std::vector<double> truncation_radii(const KernelND& kernel, double tol, std::span<const double> delta) {
  if (!(tol > 0.0)) throw std::invalid_argument("truncation_radius: tolerance must be positive");
  const std::size_t n = kernel.dim();
  std::vector<double> sums(n), radii(n);
  for (std::size_t i = 0; i < n; ++i) sums[i] = kernel.factor(i).sum_bound(delta[i]);
  for (std::size_t i = 0; i < n; ++i) {
    double others = 1.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others *= sums[j];
    radii[i] = kernel.factor(i).radius_for(tol / (static_cast<double>(n) * others), delta[i]);
  }
  return radii;
}

double truncation_radius(const KernelND& kernel, double tol) {
  const std::vector<double> ones(kernel.dim(), 1.0);
  const auto r = truncation_radii(kernel, tol, ones);
  double s = 0.0;
  for (double v : r) s += v * v;
  return std::sqrt(s);
}

double truncation_tail_bound(const KernelND& kernel, std::span<const double> radii, std::span<const double> delta) {
  const std::size_t n = kernel.dim();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double t = kernel.factor(i).tail_sum_bound(radii[i], delta[i]);
    if (t == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) t *= kernel.factor(j).sum_bound(delta[j]);
    total += t;
  }
  return total;
}

}  // namespace kanto
