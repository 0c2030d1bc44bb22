#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "kanto/operator.hpp"
#include "kanto/spaces.hpp"

using namespace kanto;

namespace {

// Antiderivative of the hat max(0, 1 - |x|).
double hat_primitive(double x) {
  if (x <= -1.0) return 0.0;
  if (x <= 0.0) return 0.5 * (x + 1.0) * (x + 1.0);
  if (x <= 1.0) return 1.0 - 0.5 * (1.0 - x) * (1.0 - x);
  return 1.0;
}

// Direct series with exact cell means, uniform nodes.
double hat_series(const Kernel1D& k, double w, double x) {
  double s = 0.0;
  const long long lo = static_cast<long long>(std::floor(-w)) - 2, hi = static_cast<long long>(std::ceil(w)) + 1;
  for (long long j = lo; j <= hi; ++j) {
    const double mean = w * (hat_primitive((j + 1) / w) - hat_primitive(j / w));
    s += k(w * x - j) * mean;
  }
  return s;
}

Analytic constant_signal(std::size_t n, double c) {
  return Analytic{[c](std::span<const double>) { return c; }, n, std::nullopt, std::abs(c), "constant"};
}

OperatorConfig config(const std::string& kernel, std::size_t n, double tol = 1e-8) {
  OperatorConfig cfg{promote(parse_kernel(kernel), n), SamplingScheme::uniform(n)};
  cfg.tolerance = tol;
  return cfg;
}

}  // namespace

TEST_CASE("constants are reproduced") {
  const auto cfg = config("bspline:2", 2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10, 10);
  for (double w : {1.0, 4.0, 37.5}) {
    for (int i = 0; i < 50; ++i) {
      const double x[2] = {u(rng), u(rng)};
      CHECK(apply(cfg, constant_signal(2, 1.0), w, x).value == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  const auto fc = config("fejer", 1, 1e-6);
  for (double w : {4.0, 64.0}) {
    const double x[1] = {u(rng)};
    const auto e = apply(fc, constant_signal(1, 1.0), w, x);
    CHECK(std::abs(e.value - 1.0) <= e.truncation_bound);
    CHECK(e.truncation_bound <= 1e-6);
  }
  const auto grid = apply_grid(config("bspline:2", 1), constant_signal(1, 1.0), 5.0, GridSpec{Box({-3.0}, {3.0}), {1000}});
  for (double v : grid.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("M_2 reproduces the identity up to the Kantorovich shift") {
  const auto cfg = config("bspline:2", 1);
  const Analytic id{[](std::span<const double> x) { return x[0]; }, 1, std::nullopt, std::nullopt, "identity"};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5, 5);
  for (double w : {1.0, 10.0, 100.0}) {
    for (int i = 0; i < 100; ++i) {
      const double x[1] = {u(rng)};
      CHECK(std::abs(apply(cfg, id, w, x).value - x[0] - 0.5 / w) <= 1e-10);
    }
  }
}

TEST_CASE("hat series matches a brute-force oracle") {
  const auto hat = make_hat(1);
  for (const char* k : {"bspline:2", "bspline:3", "bspline:4"}) {
    const auto cfg = config(k, 1);
    for (double w : {3.0, 16.0, 40.0})
      for (double x : {-1.2, -0.5, 0.0, 0.013, 0.77, 1.05}) {
        const double p[1] = {x};
        CHECK(apply(cfg, hat.signal(), w, p).value ==
              doctest::Approx(hat_series(cfg.kernel.factor(0), w, x)).epsilon(1e-12).scale(1e-12));
      }
  }
  const auto m3 = config("bspline:3", 1);
  const double origin[1] = {0.0};
  const double oracle = hat_series(m3.kernel.factor(0), 16.0, 0.0);
  const double C = 16.0 * (1.0 - oracle);
  CHECK(C > 0.0);
  const double v = apply(m3, hat.signal(), 16.0, origin).value;
  CHECK(v <= 1.0);
  CHECK(v >= 1.0 - C / 16.0 - 1e-14);
}

TEST_CASE("grid and point evaluation agree") {
  const auto hat = make_hat(1);
  const auto fc = config("fejer", 1);
  const GridSpec g{Box({-2.0}, {2.0}), {256}};
  const auto field = apply_grid(fc, hat.signal(), 32.0, g);
  const auto nodes = grid_axis(g, 0);
  REQUIRE(field.values.size() == 256);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double x[1] = {nodes[i]};
    CHECK(field.values[i] == doctest::Approx(apply(fc, hat.signal(), 32.0, x).value).epsilon(1e-12).scale(1e-12));
  }
  // A single-node grid is the same computation as apply.
  for (const char* k : {"bspline:3", "fejer"}) {
    const auto cfg = config(k, 2);
    const auto f = make_cusp(0.5, 2);
    const double x[2] = {0.3, -0.7};
    const auto one = apply_grid(cfg, f.signal(), 8.0, GridSpec{Box({0.3, -0.7}, {0.3, -0.7}), {1, 1}});
    CHECK(one.values[0] == apply(cfg, f.signal(), 8.0, x).value);
  }
}

TEST_CASE("grid nodes are endpoint inclusive") {
  const GridSpec g{Box({-1.0, 0.0}, {1.0, 4.0}), {5, 1}};
  CHECK(grid_axis(g, 0) == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
  CHECK(grid_axis(g, 1) == std::vector<double>{2.0});
}

TEST_CASE("boundedness, linearity and shift covariance") {
  const auto hat = make_hat(1), cusp = make_cusp(0.5, 1);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (const char* k : {"bspline:2", "bspline:3", "fejer"}) {
    const auto cfg = config(k, 1);
    for (double w : {4.0, 13.0}) {
      for (int i = 0; i < 40; ++i) {
        const double x[1] = {u(rng)};
        const auto a = apply(cfg, hat.signal(), w, x);
        const auto b = apply(cfg, cusp.signal(), w, x);
        // m0 = 1 for these kernels (up to the Fejer truncation).
        CHECK(std::abs(a.value) <= 1.0 + 1e-6);

        Analytic combo{[&](std::span<const double> p) { return 2.0 * hat(p) - 0.5 * cusp(p); }, 1, Box({-1.0}, {1.0}), 2.5,
                       "combo"};
        const double lin = apply(cfg, combo, w, x).value;
        CHECK(lin == doctest::Approx(2.0 * a.value - 0.5 * b.value).epsilon(1e-12).scale(1e-12));

        const int m = 3;
        Analytic shifted{[&](std::span<const double> p) {
                           const double q[1] = {p[0] - m / w};
                           return hat(q);
                         },
                         1, Box({-1.0 + m / w}, {1.0 + m / w}), 1.0, "shifted"};
        const double xs[1] = {x[0] + m / w};
        CHECK(apply(cfg, shifted, w, xs).value == doctest::Approx(a.value).epsilon(1e-12).scale(1e-12));
      }
    }
  }
}

TEST_CASE("compact kernels sum only the analytic window") {
  const auto cfg = config("bspline:3", 1);
  const auto hat = make_hat(1);
  const SeriesEvaluator ev(cfg, hat.signal(), 50.0, Box({-0.2}, {0.2}));
  for (double x : {-0.1987, 0.0123, 0.157}) {
    const double p[1] = {x};
    const auto win = ev.window(p)[0];
    // |w x - k| <= 3/2 holds for exactly 3 integers unless w x is a half-integer.
    CHECK(win.size() == 3);
  }
  CHECK(ev.truncation_bound() == 0.0);
}

TEST_CASE("replicated grid signals keep constants") {
  GridSignal g{{0.0, 0.0}, 1.0, {4, 3}, std::vector<double>(12, 0.4), Boundary::Replicate};
  for (const char* k : {"bspline:2", "bspline:3", "fejer"}) {
    const auto cfg = config(k, 2, 1e-6);
    const auto f = apply_grid(cfg, g, 2.0, GridSpec{Box({-1.0, -1.0}, {5.0, 4.0}), {13, 11}});
    for (double v : f.values) CHECK(std::abs(v - 0.4) <= 1e-12 + f.truncation_bound);
  }
}

TEST_CASE("operator preconditions") {
  auto cfg = config("bspline:2", 1);
  const double x[1] = {0.0};
  CHECK_THROWS_AS(apply(cfg, make_hat(1).signal(), 0.0, x), std::invalid_argument);
  cfg.tolerance = 0.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg.tolerance = 1e-8;
  cfg.quadrature_order = 0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  // Unbounded signal, decaying kernel: the truncation cannot be certified.
  const Analytic id{[](std::span<const double> p) { return p[0]; }, 1, std::nullopt, std::nullopt, "identity"};
  CHECK_THROWS_AS(apply(config("fejer", 1), id, 2.0, x), std::domain_error);
  // Dimension mismatch.
  CHECK_THROWS_AS(apply(config("bspline:2", 2), make_hat(1).signal(), 2.0, x), std::invalid_argument);
}
