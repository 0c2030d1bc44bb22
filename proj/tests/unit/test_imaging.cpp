#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "doctest.h"
#include "kanto/error.hpp"
#include "kanto/imaging.hpp"
#include "kanto/sampling.hpp"

using namespace kanto;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

GrayImage random_image(std::size_t w, std::size_t h, int maxval, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> u(0, maxval);
  GrayImage img{w, h, maxval, {}};
  for (std::size_t i = 0; i < w * h; ++i) img.pixels.push_back(static_cast<std::uint16_t>(u(rng)));
  return img;
}

const std::string data_dir = KANTO_TEST_DATA;

}  // namespace

TEST_CASE("pgm parsing") {
  const auto img = read_pgm("P2 2 2 255\n0 255 128 64\n");
  CHECK(img.width == 2);
  CHECK(img.height == 2);
  CHECK(img.pixels == std::vector<std::uint16_t>{0, 255, 128, 64});
  CHECK(img.at(1, 0) == 128);
  const auto com = read_pgm("P2\n# a comment\n2 # trailing\n1\n# more\n7\n3 7\n");
  CHECK(com.pixels == std::vector<std::uint16_t>{3, 7});
  CHECK(com.maxval == 7);

  const std::string p5 = std::string("P5 2 2 255 ") + '\x01' + '\x02' + '\x03';
  CHECK_THROWS_AS(read_pgm(p5), FormatError);
  CHECK_THROWS_AS(read_pgm("P2 2 2 255\n0 255 128\n"), FormatError);
  CHECK_THROWS_AS(read_pgm("P2 2 1 100\n0 101\n"), FormatError);
  CHECK_THROWS_AS(read_pgm("P3 1 1 255\n0\n"), FormatError);
  CHECK_THROWS_AS(read_pgm("P2 0 1 255\n"), FormatError);
  CHECK_THROWS_AS(read_pgm("P2 1 1 70000\n0\n"), FormatError);
  CHECK_THROWS_AS(read_pgm("P2 1 x 255\n0\n"), FormatError);
  CHECK_THROWS_AS(read_pgm(""), FormatError);
}

TEST_CASE("pgm round trips") {
  for (int maxval : {1, 255, 1000, 65535})
    for (auto [w, h] : {std::pair<std::size_t, std::size_t>{1, 1}, {7, 3}, {16, 16}}) {
      const auto img = random_image(w, h, maxval, static_cast<unsigned>(maxval + w));
      const auto bytes = write_pgm(img);
      CHECK(read_pgm(bytes) == img);
      CHECK(write_pgm(read_pgm(bytes)) == bytes);
    }
  const auto wide = write_pgm(GrayImage{1, 1, 65535, {0x1234}});
  CHECK(wide == std::string("P5 1 1 65535 ") + '\x12' + '\x34');
  CHECK(write_pgm(GrayImage{2, 1, 255, {10, 20}}) == std::string("P5 2 1 255 ") + '\x0a' + '\x14');

  const std::string path = "kanto_test_roundtrip.pgm";
  const auto img = random_image(5, 4, 255, 3);
  write_pgm_file(img, path);
  CHECK(read_pgm_file(path) == img);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_pgm_file("/nonexistent/none.pgm"), std::runtime_error);
}

TEST_CASE("images as signals") {
  const GrayImage one{1, 1, 255, {255}};
  const auto s = image_to_signal(one, 0.5);
  for (auto [x, y, v] : {std::tuple{0.25, 0.25, 1.0}, {0.0, 0.0, 1.0}, {0.49, 0.1, 1.0}, {0.6, 0.2, 0.0}, {-0.1, 0.2, 0.0},
                         {0.2, 0.7, 0.0}}) {
    const double p[2] = {x, y};
    CHECK(evaluate(s, p) == v);
  }
  const GrayImage two{2, 1, 255, {0, 255}};
  const double h = 2.0;
  const double q[2] = {1.5 * h, 0.5 * h}, q0[2] = {0.5 * h, 0.5 * h};
  CHECK(evaluate(image_to_signal(two, h), q) == 1.0);
  CHECK(evaluate(image_to_signal(two, h), q0) == 0.0);

  // A box straddling the two pixels: area-weighted mean against a midpoint sum.
  const auto sig = image_to_signal(GrayImage{2, 1, 200, {50, 150}}, 1.0);
  const Cell cell{{0.7, 0.2}, {1.6, 0.9}, 0.9 * 0.7};
  const int n = 600;
  double r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double p[2] = {0.7 + (i + 0.5) * 0.9 / n, 0.2 + (j + 0.5) * 0.7 / n};
      r += evaluate(sig, p);
    }
  r /= double(n) * n;
  const double exact = (0.3 * 0.25 + 0.6 * 0.75) / 0.9;
  CHECK(mean_value(sig, cell, 8).value == doctest::Approx(exact).epsilon(1e-12));
  CHECK(r == doctest::Approx(exact).epsilon(1e-3));
  CHECK_THROWS_AS(image_to_signal(one, 0.0), std::invalid_argument);
}

TEST_CASE("constant images stay constant") {
  const GrayImage gray{9, 6, 255, std::vector<std::uint16_t>(54, 137)};
  for (const char* k : {"bspline:2", "bspline:3", "fejer", "product:(fejer,bspline:3)"})
    for (double w : {0.5, 1.0, 3.0})
      for (auto [tw, th] : {std::pair<std::size_t, std::size_t>{9, 6}, {4, 11}, {1, 1}}) {
        const auto out = resample(gray, k, w, tw, th);
        CHECK(out.width == tw);
        CHECK(out.height == th);
        for (auto v : out.pixels) CHECK(v == 137);
      }
  CHECK(write_pgm(resample(gray, "bspline:2", 1.0, 9, 6)) == write_pgm(gray));
}

TEST_CASE("a single white pixel upscaled with M_3") {
  const GrayImage one{1, 1, 255, {255}};
  ResampleOptions opt;
  opt.boundary = Boundary::Zero;
  opt.region = Box({-1.0, -1.0}, {2.0, 2.0});
  // w = 8: the kernel footprint is 1.5/8 pixels, so nodes well inside the
  // pixel see only the white cells and nodes outside its padding see none.
  const auto out = resample(one, "bspline:3", 8.0, 25, 25, opt);
  for (std::size_t i = 0; i < 25; ++i)
    for (std::size_t j = 0; j < 25; ++j) {
      const double x = -1.0 + 3.0 * j / 24.0, y = -1.0 + 3.0 * i / 24.0;
      const double d = std::max({-x, x - 1.0, -y, y - 1.0});
      if (d < -0.25) CHECK(out.at(i, j) == 255);
      if (d > 0.25) CHECK(out.at(i, j) == 0);
    }
  // Along the middle row the values do not increase away from the pixel.
  for (std::size_t j = 13; j + 1 < 25; ++j) CHECK(out.at(12, j + 1) <= out.at(12, j));
}

TEST_CASE("denser sampling reconstructs the bundled image better") {
  const auto img = read_pgm_file(data_dir + "/test64.pgm");
  REQUIRE(img.width == 64);
  double prev_mae = 1e300, prev_rms = 1e300;
  const auto lo = *std::min_element(img.pixels.begin(), img.pixels.end());
  const auto hi = *std::max_element(img.pixels.begin(), img.pixels.end());
  for (double w : {1.0, 2.0, 4.0, 8.0}) {
    const auto out = resample(img, "bspline:2", w, 64, 64);
    const double mae = mean_abs_error(out, img), rms = rms_error(out, img);
    CHECK(mae < prev_mae);
    CHECK(rms <= 1.05 * prev_rms);
    prev_mae = mae;
    prev_rms = rms;
    for (auto v : out.pixels) {
      CHECK(v >= lo);
      CHECK(v <= hi);
    }
  }
  CHECK(mean_abs_error(resample(img, "bspline:2", 4.0, 64, 64), img) <
        mean_abs_error(resample(img, "bspline:2", 1.0, 64, 64), img));
}

TEST_CASE("fejer resampling stays in range") {
  const auto img = random_image(12, 10, 255, 17);
  const auto out = resample(img, "fejer", 2.0, 12, 10);
  for (auto v : out.pixels) CHECK(v <= 255);
}

TEST_CASE("golden 2x upscale") {
  const auto img = read_pgm_file(data_dir + "/test64.pgm");
  const auto out = write_pgm(resample(img, "bspline:2", 1.0, 128, 128));
  CHECK(out == slurp(data_dir + "/test64_bspline2_x2.pgm"));
  CHECK(out == write_pgm(resample(img, "bspline:2", 1.0, 128, 128)));
}

TEST_CASE("image metrics") {
  const GrayImage a{2, 1, 255, {0, 10}}, b{2, 1, 255, {3, 6}};
  CHECK(mean_abs_error(a, b) == 3.5);
  CHECK(rms_error(a, b) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK(psnr(a, b) == doctest::Approx(20.0 * std::log10(255.0 / std::sqrt(12.5))).epsilon(1e-14));
  CHECK(std::isinf(psnr(a, a)));
  CHECK_THROWS_AS(mean_abs_error(a, GrayImage{1, 2, 255, {0, 0}}), std::invalid_argument);
}

TEST_CASE("resample preconditions") {
  const GrayImage g{2, 2, 255, {1, 2, 3, 4}};
  CHECK_THROWS_AS(resample(g, "bspline:2", 0.0, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(resample(g, "bspline:2", 1.0, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(resample(g, "nosuch", 1.0, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(resample(g, "bspline:2", 1.0, 2, 2, ResampleOptions{Boundary::Zero, Box({0.0}, {1.0}), 0.0}),
                  std::invalid_argument);
}
