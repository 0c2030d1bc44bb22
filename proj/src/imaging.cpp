#include "kanto/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "kanto/error.hpp"
#include "kanto/kernels.hpp"
#include "kanto/operator.hpp"

namespace kanto {

namespace {

constexpr std::size_t kMaxPixels = std::size_t{1} << 28;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  void skip_blanks() {
    while (pos_ < s_.size()) {
      if (is_space(s_[pos_])) {
        ++pos_;
      } else if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n' && s_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  // Unsigned decimal token; `what` names the field in errors.
  unsigned long number(const char* what) {
    skip_blanks();
    if (pos_ >= s_.size()) throw FormatError(std::string("pgm: missing ") + what);
    if (s_[pos_] < '0' || s_[pos_] > '9') throw FormatError(std::string("pgm: malformed ") + what);
    unsigned long v = 0;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') {
      v = v * 10 + static_cast<unsigned long>(s_[pos_] - '0');
      if (v > 0xFFFFFFFFul) throw FormatError(std::string("pgm: ") + what + " too large");
      ++pos_;
    }
    if (pos_ < s_.size() && !is_space(s_[pos_]) && s_[pos_] != '#')
      throw FormatError(std::string("pgm: malformed ") + what);
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  std::string_view rest() const { return s_.substr(pos_); }
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

void check_same(const GrayImage& a, const GrayImage& b) {
  if (a.width != b.width || a.height != b.height) throw std::invalid_argument("image metrics: dimension mismatch");
  if (a.pixels.empty()) throw std::invalid_argument("image metrics: empty image");
}

}  // namespace

void validate(const GrayImage& img) {
  if (img.width == 0 || img.height == 0) throw FormatError("pgm: width and height must be positive");
  if (img.maxval < 1 || img.maxval > 65535) throw FormatError("pgm: maxval must lie in [1, 65535]");
  if (img.pixels.size() != img.width * img.height) throw FormatError("pgm: pixel count does not match dimensions");
  for (auto p : img.pixels)
    if (p > img.maxval) throw FormatError("pgm: pixel value exceeds maxval");
}

GrayImage read_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw FormatError("pgm: expected P2 or P5 magic");
  const bool binary = bytes[1] == '5';
  Cursor cur(bytes);
  cur.advance(2);
  if (!cur.at_end() && !is_space(cur.peek()) && cur.peek() != '#') throw FormatError("pgm: malformed magic");

  GrayImage img;
  const unsigned long w = cur.number("width");
  const unsigned long h = cur.number("height");
  const unsigned long m = cur.number("maxval");
  if (w == 0 || h == 0) throw FormatError("pgm: width and height must be positive");
  if (w > kMaxPixels || h > kMaxPixels || w * h > kMaxPixels) throw FormatError("pgm: image too large");
  if (m < 1 || m > 65535) throw FormatError("pgm: maxval must lie in [1, 65535]");
  img.width = w;
  img.height = h;
  img.maxval = static_cast<int>(m);
  const std::size_t count = img.width * img.height;
  img.pixels.resize(count);

  if (binary) {
    if (cur.at_end() || !is_space(cur.peek())) throw FormatError("pgm: truncated raster");
    cur.advance(1);
    const std::size_t bpp = m > 255 ? 2 : 1;
    const auto raster = cur.rest();
    if (raster.size() < count * bpp) throw FormatError("pgm: truncated raster");
    for (std::size_t i = 0; i < count; ++i) {
      unsigned v = static_cast<unsigned char>(raster[i * bpp]);
      if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(raster[i * bpp + 1]);
      if (v > m) throw FormatError("pgm: pixel value exceeds maxval");
      img.pixels[i] = static_cast<std::uint16_t>(v);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      cur.skip_blanks();
      if (cur.at_end()) throw FormatError("pgm: truncated raster");
      const unsigned long v = cur.number("pixel");
      if (v > m) throw FormatError("pgm: pixel value exceeds maxval");
      img.pixels[i] = static_cast<std::uint16_t>(v);
    }
  }
  return img;
}

std::string write_pgm(const GrayImage& img) {
  validate(img);
  std::string out = "P5 " + std::to_string(img.width) + " " + std::to_string(img.height) + " " +
                    std::to_string(img.maxval) + " ";
  const bool wide = img.maxval > 255;
  out.reserve(out.size() + img.pixels.size() * (wide ? 2 : 1));
  for (auto p : img.pixels) {
    if (wide) out.push_back(static_cast<char>(p >> 8));
    out.push_back(static_cast<char>(p & 0xFF));
  }
  return out;
}

GrayImage read_pgm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("cannot read " + path);
  return read_pgm(bytes);
}

void write_pgm_file(const GrayImage& img, const std::string& path) {
  const std::string bytes = write_pgm(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + path);
}

GridSignal image_to_signal(const GrayImage& img, double h, Boundary boundary) {
  validate(img);
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("image_to_signal: pixel size must be positive");
  GridSignal g;
  g.origin = {0.0, 0.0};
  g.h = h;
  g.shape = {img.width, img.height};
  g.boundary = boundary;
  g.values.resize(img.pixels.size());
  const double scale = 1.0 / img.maxval;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) g.values[i] = img.pixels[i] * scale;
  return g;
}

GrayImage resample(const GrayImage& img, const std::string& kernel_id, double w, std::size_t target_width,
                   std::size_t target_height, const ResampleOptions& opt) {
  if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("resample: w must be positive");
  if (target_width == 0 || target_height == 0) throw std::invalid_argument("resample: target dimensions must be positive");
  const Signal sig = image_to_signal(img, 1.0, opt.boundary);
  const KernelND kernel = promote(parse_kernel(kernel_id), 2);
  if (kernel.dim() != 2) throw std::invalid_argument("resample: kernel must be 1D or 2D");

  OperatorConfig cfg{kernel, SamplingScheme::uniform(2)};
  cfg.tolerance = opt.tolerance > 0.0 ? opt.tolerance : (kernel.compact() ? 1e-8 : 1e-4);
  const Box region = opt.region ? *opt.region
                                : Box({0.0, 0.0}, {static_cast<double>(img.width), static_cast<double>(img.height)});
  if (region.dim() != 2) throw std::invalid_argument("resample: region must be 2D");
  const Field fld = apply_grid(cfg, sig, w, GridSpec{region, {target_width, target_height}});

  GrayImage out;
  out.width = target_width;
  out.height = target_height;
  out.maxval = img.maxval;
  out.pixels.resize(fld.values.size());
  for (std::size_t i = 0; i < fld.values.size(); ++i) {
    const double v = std::clamp(fld.values[i], 0.0, 1.0);
    out.pixels[i] = static_cast<std::uint16_t>(std::floor(v * img.maxval + 0.5));
  }
  return out;
}

double mean_abs_error(const GrayImage& a, const GrayImage& b) {
  check_same(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) s += std::abs(double(a.pixels[i]) - double(b.pixels[i]));
  return s / a.pixels.size();
}

double rms_error(const GrayImage& a, const GrayImage& b) {
  check_same(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = double(a.pixels[i]) - double(b.pixels[i]);
    s += d * d;
  }
  return std::sqrt(s / a.pixels.size());
}

double psnr(const GrayImage& a, const GrayImage& b) {
  const double r = rms_error(a, b);
  if (r == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(std::max(a.maxval, b.maxval) / r);
}

}  // namespace kanto
