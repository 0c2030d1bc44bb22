#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "kanto/kernels.hpp"

using namespace kanto;

namespace {

// M_k by repeated convolution with M_1 (Simpson), independent of the
// truncated-power formula.
double bspline_by_convolution(int k, double x) {
  // M_j(x) = int_{x-1/2}^{x+1/2} M_{j-1}, starting from the triangle M_2.
  auto m2 = [](double t) { return std::max(0.0, 1.0 - std::abs(t)); };
  if (k == 2) return m2(x);
  // Simpson on each piece between half-integers, where the integrands kink.
  auto simpson = [](auto f, double lo, double hi) {
    const int m = 200;
    const double step = (hi - lo) / m;
    double s = f(lo) + f(hi);
    for (int i = 1; i < m; ++i) s += f(lo + i * step) * (i % 2 ? 4 : 2);
    return s * step / 3.0;
  };
  auto integrate = [simpson](auto f, double lo, double hi) {
    double s = 0.0, a = lo;
    for (double b = std::floor(2.0 * lo) / 2.0 + 0.5; a < hi; b += 0.5) {
      const double e = std::min(b, hi);
      if (e > a) s += simpson(f, a, e);
      a = e;
    }
    return s;
  };
  auto m3 = [&](double t) { return integrate(m2, t - 0.5, t + 0.5); };
  if (k == 3) return m3(x);
  auto m4 = [&](double t) { return integrate(m3, t - 0.5, t + 0.5); };
  return m4(x);
}

}  // namespace

TEST_CASE("sinc and fejer at documented points") {
  CHECK(eval_sinc(0.0) == 1.0);
  CHECK(eval_sinc(1.0) == 0.0);
  CHECK(eval_sinc(0.5) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-14));
  CHECK(eval_fejer(0.0) == 0.5);
  CHECK(eval_fejer(2.0) == 0.0);
  CHECK(eval_fejer(1.0) == doctest::Approx(2.0 / (std::numbers::pi * std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("bspline values match closed forms and a convolution oracle") {
  CHECK(eval_bspline(2, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_bspline(2, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eval_bspline(3, 0.0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(eval_bspline(5, 3.0) == 0.0);
  CHECK(eval_bspline(5, 2.5) == 0.0);
  CHECK(eval_bspline(5, -2.5) == 0.0);
  CHECK_THROWS_AS(eval_bspline(0, 0.0), std::invalid_argument);
  for (double x : {-1.3, -0.7, -0.2, 0.0, 0.41, 0.9, 1.45})
    CHECK(eval_bspline(3, x) == doctest::Approx(bspline_by_convolution(3, x)).epsilon(1e-9));
  for (double x : {-1.8, -0.6, 0.0, 0.33, 1.2, 1.9})
    CHECK(eval_bspline(4, x) == doctest::Approx(bspline_by_convolution(4, x)).scale(1.0).epsilon(1e-8));
}

TEST_CASE("M_1 is the half-open indicator") {
  CHECK(eval_bspline(1, 0.5) == 1.0);
  CHECK(eval_bspline(1, -0.5) == 0.0);
  CHECK(eval_bspline(1, 0.0) == 1.0);
  // Partition of unity at half-integers too.
  for (double x : {-1.5, -0.5, 0.5, 2.5}) {
    double s = 0.0;
    for (int k = -4; k <= 4; ++k) s += eval_bspline(1, x - k);
    CHECK(s == 1.0);
  }
}

TEST_CASE("bspline partition of unity on a dense grid") {
  for (int j = 2; j <= 5; ++j) {
    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double x = -3.0 + 6.0 * i / 2000.0;
      double s = 0.0;
      for (int k = -8; k <= 8; ++k) s += eval_bspline(j, x - k);
      worst = std::max(worst, std::abs(s - 1.0));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("compact kernels vanish outside their radius and decay bounds hold") {
  for (int k = 1; k <= 6; ++k) {
    const auto kern = Kernel1D::bspline(k);
    CHECK(kern.compact());
    CHECK(kern.radius() == doctest::Approx(k / 2.0));
    for (double x : {k / 2.0 + 1e-9, k / 2.0 + 0.3, 10.0}) {
      CHECK(kern(x) == 0.0);
      CHECK(kern(-x) == 0.0);
    }
  }
  const auto f = Kernel1D::fejer();
  CHECK_FALSE(f.compact());
  const auto& d = std::get<DecaySupport>(f.support());
  CHECK(d.power == 2.0);
  for (int i = 0; i <= 5000; ++i) {
    const double x = std::pow(10.0, 3.0 * i / 5000.0);
    CHECK(std::abs(f(x)) <= d.constant * std::pow(x, -d.power) * (1 + 1e-12));
  }
}

TEST_CASE("fejer shifted evaluation agrees with direct evaluation") {
  const auto f = Kernel1D::fejer();
  for (double u : {-3.7, -0.25, 0.0, 0.5, 1.0, 12.3}) {
    const double s2 = f.shift_context(u);
    for (long long k = -20; k <= 20; ++k)
      CHECK(f.shifted(u, k, s2) == doctest::Approx(f(u - k)).epsilon(1e-12).scale(1e-18));
  }
}

TEST_CASE("product kernels") {
  const auto ff = make_product_kernel({Kernel1D::fejer(), Kernel1D::fejer()});
  const double origin[2] = {0.0, 0.0};
  CHECK(ff(origin) == 0.25);
  const auto m = make_product_kernel({Kernel1D::bspline(2), Kernel1D::bspline(2), Kernel1D::bspline(2)});
  const double x[3] = {0.5, 0.0, 0.0};
  CHECK(m(x) == doctest::Approx(0.5).epsilon(1e-15));
  const auto m1 = make_product_kernel({Kernel1D::bspline(2)});
  const double far[1] = {2.0};
  CHECK(m1(far) == 0.0);
  CHECK_THROWS_AS(make_product_kernel({}), std::invalid_argument);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  const auto mixed = parse_kernel("product:(fejer,bspline:3)");
  for (int i = 0; i < 200; ++i) {
    const double p[2] = {u(rng), u(rng)};
    CHECK(mixed(p) == eval_fejer(p[0]) * eval_bspline(3, p[1]));
  }
}

TEST_CASE("kernel ids parse and round trip") {
  CHECK(parse_kernel("fejer").id() == "fejer");
  CHECK(parse_kernel("bspline:3").id() == "bspline:3");
  CHECK(parse_kernel("product:(fejer,bspline:2)").id() == "product:(fejer,bspline:2)");
  CHECK(parse_kernel("product:(product:(bspline:2,bspline:3),fejer)").dim() == 3);
  CHECK(promote(parse_kernel("bspline:2"), 3).id() == "product:(bspline:2,bspline:2,bspline:2)");
  for (const char* bad : {"nosuch", "bspline:0", "bspline:x", "product:()", "product:(fejer", "", "fejer:2"})
    CHECK_THROWS_AS(parse_kernel(bad), std::invalid_argument);
}

TEST_CASE("truncation radius") {
  const auto m3 = promote(parse_kernel("bspline:3"), 2);
  CHECK(truncation_radius(m3, 1e-3) == doctest::Approx(std::sqrt(2.0) * 1.5).epsilon(1e-14));
  CHECK(truncation_radius(m3, 1e-12) == doctest::Approx(std::sqrt(2.0) * 1.5).epsilon(1e-14));

  const auto f = parse_kernel("fejer");
  const double c = 2.0 / (std::numbers::pi * std::numbers::pi);
  const double R = truncation_radius(f, 1e-3);
  CHECK(4.0 * c / R <= 1e-3 * (1 + 1e-12));
  // Direct summation of the omitted mass at random points.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const double x = ux(rng);
    // Explicit sum out to |k| = N, plus the envelope integral beyond N - 5.
    const long long N = 20000;
    double tail = 2.0 * c / (N - 6.0);
    for (long long k = -N; k <= N; ++k)
      if (std::abs(x - k) > R) tail += eval_fejer(x - k);
    CHECK(tail <= 1e-3);
  }
  CHECK(truncation_radius(f, 1e300) == 1.0);
  CHECK_THROWS_AS(truncation_radius(f, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(truncation_radius(f, -1.0), std::invalid_argument);
}
