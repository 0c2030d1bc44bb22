#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kanto/box.hpp"
#include "kanto/signal.hpp"

namespace kanto {

struct GrayImage {
  std::size_t width = 0, height = 0;
  int maxval = 255;
  std::vector<std::uint16_t> pixels;  // row-major

  std::uint16_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Checks dimensions, maxval in [1, 65535] and pixel range; throws FormatError.
void validate(const GrayImage& img);

/// P2 or P5, comments allowed in the header. Throws FormatError.
GrayImage read_pgm(std::string_view bytes);
/// P5 with single-space separators, no comments and no trailing newline.
/// 16-bit samples are big-endian.
std::string write_pgm(const GrayImage& img);

/// Throws std::runtime_error when the file cannot be opened.
GrayImage read_pgm_file(const std::string& path);
void write_pgm_file(const GrayImage& img, const std::string& path);

/// Pixel (row i, column j) covers [j h, (j+1) h) x [i h, (i+1) h) with value
/// v / maxval; axis 0 is the column direction.
GridSignal image_to_signal(const GrayImage& img, double h, Boundary boundary = Boundary::Zero);

struct ResampleOptions {
  Boundary boundary = Boundary::Replicate;
  /// Target sampling box in pixel units; defaults to [0, W] x [0, H].
  std::optional<Box> region;
  /// Series truncation tolerance; 0 picks 1e-4 for decaying kernels and 1e-8 otherwise.
  double tolerance = 0.0;
};

/// S_w of the image (pixel size 1) on a target_width x target_height grid of
/// endpoint-inclusive nodes over the region, clamped to [0, 1] and quantized
/// round-half-up to the source maxval.
GrayImage resample(const GrayImage& img, const std::string& kernel_id, double w, std::size_t target_width,
                   std::size_t target_height, const ResampleOptions& opt = {});

/// Mean absolute difference in gray levels; images must share dimensions.
double mean_abs_error(const GrayImage& a, const GrayImage& b);
/// Root mean square difference in gray levels.
double rms_error(const GrayImage& a, const GrayImage& b);
/// 20 log10(maxval / rms); +inf for identical images.
double psnr(const GrayImage& a, const GrayImage& b);

}  // namespace kanto
