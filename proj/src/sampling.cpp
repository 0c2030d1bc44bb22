#include "kanto/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "kanto/error.hpp"

namespace kanto {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double hash_unit(std::uint64_t seed, long long k) {
  const std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(k)));
  // 53 random bits mapped onto [-1, 1].
  return static_cast<double>(h >> 11) * (2.0 / 9007199254740991.0) - 1.0;
}

void check_amplitude(double a) {
  if (!(a >= 0.0) || !(1.0 - 2.0 * a > 0.0))
    throw std::invalid_argument("jittered scheme: amplitude must satisfy 0 <= a < 1/2 so that 1 - 2a > 0");
}

}  // namespace

AxisNodes AxisNodes::uniform() { return AxisNodes(); }

AxisNodes AxisNodes::jitter_sin(double a) {
  check_amplitude(a);
  AxisNodes n;
  n.rule_ = Rule::JitterSin;
  n.amplitude_ = a;
  n.delta_ = 1.0 - 2.0 * a;
  n.Delta_ = 1.0 + 2.0 * a;
  return n;
}

AxisNodes AxisNodes::jitter_hash(double a, std::uint64_t seed) {
  check_amplitude(a);
  AxisNodes n;
  n.rule_ = Rule::JitterHash;
  n.amplitude_ = a;
  n.seed_ = seed;
  n.delta_ = 1.0 - 2.0 * a;
  n.Delta_ = 1.0 + 2.0 * a;
  return n;
}

AxisNodes AxisNodes::tabulated(std::vector<double> table, bool strict) {
  if (table.size() < 2) throw std::invalid_argument("tabulated scheme: need at least two nodes");
  AxisNodes n;
  n.rule_ = Rule::Tabulated;
  n.delta_ = std::numeric_limits<double>::infinity();
  n.Delta_ = 0.0;
  for (std::size_t i = 0; i + 1 < table.size(); ++i) {
    if (!std::isfinite(table[i]) || !std::isfinite(table[i + 1]))
      throw std::invalid_argument("tabulated scheme: non-finite node");
    const double g = table[i + 1] - table[i];
    if (!(g > 0.0)) throw std::invalid_argument("tabulated scheme: nodes must be strictly increasing");
    n.delta_ = std::min(n.delta_, g);
    n.Delta_ = std::max(n.Delta_, g);
  }
  n.table_ = std::move(table);
  n.strict_ = strict;
  return n;
}

double AxisNodes::node(long long k) const {
  const double kd = static_cast<double>(k);
  switch (rule_) {
    case Rule::Uniform: return kd;
    case Rule::JitterSin: return kd + amplitude_ * std::sin(kd);
    case Rule::JitterHash: return kd + amplitude_ * hash_unit(seed_, k);
    case Rule::Tabulated: break;
  }
  const long long size = static_cast<long long>(table_.size());
  if (k >= 0 && k < size) return table_[static_cast<std::size_t>(k)];
  if (strict_) throw std::out_of_range("tabulated scheme: index " + std::to_string(k) + " outside the table");
  if (k < 0) return table_.front() + kd * Delta_;
  return table_.back() + static_cast<double>(k - size + 1) * Delta_;
}

long long AxisNodes::lower_index(double t) const {
  if (!std::isfinite(t)) throw std::invalid_argument("lower_index: non-finite position");
  if (rule_ == Rule::Uniform) return static_cast<long long>(std::floor(t));
  if (rule_ == Rule::Tabulated) {
    const long long size = static_cast<long long>(table_.size());
    if (t < table_.front()) {
      if (strict_) throw std::out_of_range("tabulated scheme: position before the table");
      long long k = static_cast<long long>(std::floor((t - table_.front()) / Delta_));
      while (node(k) > t) --k;
      while (node(k + 1) <= t) ++k;
      return k;
    }
    if (t >= table_.back()) {
      if (strict_) {
        if (t == table_.back()) return size - 1;
        throw std::out_of_range("tabulated scheme: position beyond the table");
      }
      long long k = size - 1 + static_cast<long long>(std::floor((t - table_.back()) / Delta_));
      while (node(k) > t) --k;
      while (node(k + 1) <= t) ++k;
      return k;
    }
    const auto it = std::upper_bound(table_.begin(), table_.end(), t);
    return static_cast<long long>(it - table_.begin()) - 1;
  }
  // Jittered nodes stay within a < 1/2 of k.
  long long k = static_cast<long long>(std::floor(t));
  while (node(k) > t) --k;
  while (node(k + 1) <= t) ++k;
  return k;
}

std::string AxisNodes::describe() const {
  std::ostringstream s;
  switch (rule_) {
    case Rule::Uniform: s << "uniform"; break;
    case Rule::JitterSin: s << "jitter:sin:a=" << amplitude_; break;
    case Rule::JitterHash: s << "jitter:hash:a=" << amplitude_ << ":seed=" << seed_; break;
    case Rule::Tabulated:
      s << "table(" << table_.size() << " nodes, "
        << (strict_ ? "no extension" : "uniform extension with gap " + std::to_string(Delta_)) << ")";
      break;
  }
  return s.str();
}

SamplingScheme::SamplingScheme(std::vector<AxisNodes> axes, std::string spec) : axes_(std::move(axes)), spec_(std::move(spec)) {
  if (axes_.empty()) throw std::invalid_argument("SamplingScheme: dimension must be positive");
  if (spec_.empty()) spec_ = axes_[0].describe();
}

SamplingScheme SamplingScheme::uniform(std::size_t n) {
  return SamplingScheme(std::vector<AxisNodes>(n, AxisNodes::uniform()), "uniform");
}

bool SamplingScheme::is_uniform() const {
  return std::all_of(axes_.begin(), axes_.end(), [](const AxisNodes& a) { return a.rule() == AxisNodes::Rule::Uniform; });
}

std::vector<double> SamplingScheme::deltas() const {
  std::vector<double> d;
  for (const auto& a : axes_) d.push_back(a.delta());
  return d;
}

std::vector<double> SamplingScheme::Deltas() const {
  std::vector<double> d;
  for (const auto& a : axes_) d.push_back(a.Delta());
  return d;
}

double SamplingScheme::delta() const {
  double d = axes_[0].delta();
  for (const auto& a : axes_) d = std::min(d, a.delta());
  return d;
}

double SamplingScheme::Delta() const {
  double d = axes_[0].Delta();
  for (const auto& a : axes_) d = std::max(d, a.Delta());
  return d;
}

std::vector<double> SamplingScheme::node(std::span<const long long> k) const {
  if (k.size() != axes_.size()) throw std::invalid_argument("node: index dimension mismatch");
  std::vector<double> t(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) t[i] = axes_[i].node(k[i]);
  return t;
}

Cell SamplingScheme::cell(std::span<const long long> k, double w) const {
  if (!(w > 0.0)) throw std::invalid_argument("cell: w must be positive");
  if (k.size() != axes_.size()) throw std::invalid_argument("cell: index dimension mismatch");
  Cell c;
  c.measure = 1.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double a = axes_[i].node(k[i]), b = axes_[i].node(k[i] + 1);
    c.lo.push_back(a / w);
    c.hi.push_back(b / w);
    c.measure *= (b - a);
  }
  c.measure /= std::pow(w, static_cast<double>(k.size()));
  return c;
}

std::vector<IndexRange> SamplingScheme::cells_in_box(double w, const Box& box) const {
  if (!(w > 0.0)) throw std::invalid_argument("cells_in_box: w must be positive");
  if (box.dim() != axes_.size()) throw std::invalid_argument("cells_in_box: box dimension mismatch");
  std::vector<IndexRange> out(axes_.size());
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const double a = w * box.lo[i], b = w * box.hi[i];
    long long first = axes_[i].lower_index(a);
    if (axes_[i].node(first) == a) --first;  // the cell ending at a touches the box
    out[i] = {first, axes_[i].lower_index(b)};
  }
  return out;
}

namespace {

std::vector<std::vector<double>> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open node table: " + path);
  std::vector<std::vector<double>> blocks(1);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::erase_if(line, [](char c) { return c == '\r' || c == ' ' || c == '\t' || c == ','; });
    if (line.empty()) {
      if (!blocks.back().empty()) blocks.emplace_back();
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      throw FormatError("node table " + path + ": not a number: " + line);
    }
    if (used != line.size()) throw FormatError("node table " + path + ": trailing characters: " + line);
    blocks.back().push_back(v);
  }
  if (blocks.back().empty()) blocks.pop_back();
  if (blocks.empty()) throw FormatError("node table " + path + " is empty");
  return blocks;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) throw std::invalid_argument("invalid " + what + ": " + text);
  return v;
}

}  // namespace

SamplingScheme parse_scheme(const std::string& spec, std::size_t n) {
  if (n == 0) throw std::invalid_argument("scheme dimension must be positive");
  if (spec == "uniform") return SamplingScheme::uniform(n);
  if (spec.rfind("jitter:", 0) == 0) {
    const auto parts = split(spec, ':');
    if (parts.size() < 3 || parts[2].rfind("a=", 0) != 0) throw std::invalid_argument("invalid scheme spec: " + spec);
    const double a = parse_number(parts[2].substr(2), "jitter amplitude");
    if (parts[1] == "sin" && parts.size() == 3)
      return SamplingScheme(std::vector<AxisNodes>(n, AxisNodes::jitter_sin(a)), spec);
    if (parts[1] == "hash" && parts.size() == 4 && parts[3].rfind("seed=", 0) == 0) {
      const std::string s = parts[3].substr(5);
      if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit)) throw std::invalid_argument("invalid jitter seed: " + s);
      // Each axis gets its own stream derived from the seed.
      std::vector<AxisNodes> axes;
      const std::uint64_t seed = std::stoull(s);
      for (std::size_t i = 0; i < n; ++i) axes.push_back(AxisNodes::jitter_hash(a, seed + i));
      return SamplingScheme(std::move(axes), spec);
    }
    throw std::invalid_argument("invalid scheme spec: " + spec);
  }
  if (spec.rfind("table:", 0) == 0) {
    std::string path = spec.substr(6);
    bool strict = false;
    if (path.size() > 7 && path.compare(path.size() - 7, 7, ":strict") == 0) {
      strict = true;
      path.resize(path.size() - 7);
    }
    const auto blocks = read_table(path);
    if (blocks.size() != 1 && blocks.size() != n)
      throw FormatError("node table " + path + ": expected 1 or " + std::to_string(n) + " axis blocks");
    std::vector<AxisNodes> axes;
    for (std::size_t i = 0; i < n; ++i) axes.push_back(AxisNodes::tabulated(blocks[blocks.size() == 1 ? 0 : i], strict));
    return SamplingScheme(std::move(axes), spec);
  }
  throw std::invalid_argument("unknown scheme spec: " + spec);
}

}  // namespace kanto
