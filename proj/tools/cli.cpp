#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "kanto/certificate.hpp"
#include "kanto/error.hpp"
#include "kanto/imaging.hpp"
#include "kanto/kernels.hpp"
#include "kanto/parallel.hpp"
#include "kanto/rates.hpp"
#include "kanto/sampling.hpp"
#include "kanto/spaces.hpp"

namespace kanto::cli {

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& path, const std::string& data, std::ostream& out) {
  if (path == "-") {
    out << data;
    out.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << data;
  if (!f) throw IoError("cannot write " + path);
}

// "a:b,c:d" -> box with one interval per axis
Box parse_box(const std::string& spec) {
  std::vector<double> lo, hi;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto colon = part.find(':', 1);
    if (colon == std::string::npos) throw std::invalid_argument("--box: expected lo:hi per axis, got '" + part + "'");
    try {
      std::size_t used = 0;
      const std::string a = part.substr(0, colon), b = part.substr(colon + 1);
      lo.push_back(std::stod(a, &used));
      if (used != a.size()) throw std::invalid_argument("");
      hi.push_back(std::stod(b, &used));
      if (used != b.size()) throw std::invalid_argument("");
    } catch (const std::logic_error&) {
      throw std::invalid_argument("--box: malformed interval '" + part + "'");
    }
  }
  if (lo.empty()) throw std::invalid_argument("--box: empty");
  return Box(lo, hi);
}

// "128x96"
std::pair<std::size_t, std::size_t> parse_size(const std::string& spec) {
  const auto x = spec.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument("");
    std::size_t u1 = 0, u2 = 0;
    const long a = std::stol(spec.substr(0, x), &u1), b = std::stol(spec.substr(x + 1), &u2);
    if (u1 != x || u2 != spec.size() - x - 1 || a < 1 || b < 1) throw std::invalid_argument("");
    return {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
  } catch (const std::logic_error&) {
    throw std::invalid_argument("--size: expected WxH with positive integers, got '" + spec + "'");
  }
}

void add_threads(CLI::App* cmd, int& threads) {
  cmd->add_option("--threads", threads, "Worker thread cap (KANTO_THREADS otherwise)")->check(CLI::PositiveNumber);
}

struct ValidateArgs {
  std::string kernel, scheme = "uniform", output = "-";
  std::size_t dim = 0;
  std::vector<double> w;
  double step = 0.0;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
  KernelND kernel = parse_kernel(a.kernel);
  if (a.dim) kernel = promote(kernel, a.dim);
  const SamplingScheme scheme = parse_scheme(a.scheme, kernel.dim());
  CertifyOptions opt;
  if (!a.w.empty()) opt.w_list = a.w;
  opt.grid_step = a.step;
  const KernelCertificate cert = certify_kernel(kernel, scheme, opt);
  emit(a.output, cert.to_json().dump(2) + "\n", out);
  std::vector<std::string> failing;
  for (const char* c : {"chi1", "chi2", "chi3", "chi4"}) {
    const auto it = cert.conditions.find(c);
    if (it == cert.conditions.end() || !it->second.ok) failing.push_back(c);
  }
  if (failing.empty()) {
    err << cert.kernel_id << ": certified\n";
    return Ok;
  }
  for (const auto& c : failing) {
    const auto it = cert.conditions.find(c);
    err << cert.kernel_id << ": condition " << c << " failed";
    if (it != cert.conditions.end() && !it->second.detail.empty()) err << " (" << it->second.detail << ")";
    err << "\n";
  }
  return Failed;
}

struct RateArgs {
  std::string kernel = "bspline:3", scheme = "uniform", function = "hat", mode, phi, box, output = "-", json;
  double nu = 1.0, lambda = 1.0, tol = 1e-8;
  std::size_t dim = 1, grid = 2049;
  std::vector<double> w{4, 8, 16, 32, 64, 128, 256};
};

int cmd_rate(const RateArgs& a, std::ostream& out, std::ostream& err) {
  RateExperiment exp;
  exp.kernel_id = a.kernel;
  exp.scheme_spec = a.scheme;
  exp.function = a.function;
  exp.nu = a.nu;
  exp.dim = a.dim;
  exp.w = a.w;
  exp.resolution = a.grid;
  exp.tolerance = a.tol;
  std::string mode = a.mode.empty() ? (a.phi.empty() ? "sup" : "modular") : a.mode;
  if (mode == "sup") {
    if (!a.phi.empty()) throw std::invalid_argument("--phi only applies to --mode modular");
    exp.mode = ErrorMode::sup();
  } else if (mode == "modular") {
    exp.mode = ErrorMode::modular(parse_phi(a.phi.empty() ? "p:1" : a.phi), a.lambda);
  } else {
    throw std::invalid_argument("--mode must be sup or modular");
  }
  if (!a.box.empty()) exp.box = parse_box(a.box);
  validate(exp);
  // Fail on bad ids before any computation.
  (void)parse_kernel(exp.kernel_id);
  (void)parse_scheme(exp.scheme_spec, exp.dim);
  (void)make_test_function(exp.function, exp.nu, exp.dim);

  const RateReport rep = run_experiment(exp);
  emit(a.output, rep.to_csv(), out);
  std::string json_path = a.json;
  if (json_path.empty() && a.output != "-") {
    json_path = a.output;
    const auto slash = json_path.find_last_of('/');
    const auto dot = json_path.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) json_path.erase(dot);
    json_path += ".json";
  }
  if (!json_path.empty()) emit(json_path, rep.to_json().dump(2) + "\n", out);

  err << "slope ";
  if (rep.fitted) err << rep.fit.slope << " (R^2 " << rep.fit.r2 << ")";
  else err << "n/a";
  err << ", epsilon " << rep.epsilon << ", verdict " << to_string(rep.verdict);
  if (!rep.reason.empty()) err << ": " << rep.reason;
  err << "\n";
  switch (rep.verdict) {
    case RateReport::Verdict::Pass: return Ok;
    case RateReport::Verdict::Fail: return Failed;
    case RateReport::Verdict::Inconclusive: return Inconclusive;
  }
  return Internal;
}

struct ResampleArgs {
  std::string input, kernel = "bspline:2", size, boundary = "replicate", box, output = "-";
  double w = 1.0, scale = 1.0, tol = 0.0;
};

int cmd_resample(const ResampleArgs& a, std::ostream& out, std::ostream& err) {
  ResampleOptions opt;
  if (a.boundary == "zero") opt.boundary = Boundary::Zero;
  else if (a.boundary == "replicate") opt.boundary = Boundary::Replicate;
  else throw std::invalid_argument("--boundary must be zero or replicate");
  if (!a.box.empty()) opt.region = parse_box(a.box);
  opt.tolerance = a.tol;
  (void)parse_kernel(a.kernel);
  if (!(a.w > 0.0)) throw std::invalid_argument("--w must be positive");
  if (!(a.scale > 0.0)) throw std::invalid_argument("--scale must be positive");

  GrayImage img;
  try {
    img = read_pgm_file(a.input);
  } catch (const FormatError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  std::size_t tw = 0, th = 0;
  if (!a.size.empty()) {
    std::tie(tw, th) = parse_size(a.size);
  } else {
    tw = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(img.width * a.scale)));
    th = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(img.height * a.scale)));
  }
  const GrayImage res = resample(img, a.kernel, a.w, tw, th, opt);
  emit(a.output, write_pgm(res), out);
  err << "resampled " << img.width << "x" << img.height << " -> " << tw << "x" << th << " with " << a.kernel
      << " at w=" << a.w << "\n";
  return Ok;
}

struct MomentArgs {
  std::string kernel, scheme = "uniform", output = "-";
  std::size_t dim = 0;
  std::vector<double> betas{0.0, 0.5, 1.0}, nus{0.5, 1.0};
  double step = 0.0;
};

nlohmann::json finite_or(double v, const char* label) {
  if (std::isfinite(v)) return v;
  return label;
}

int cmd_moments(const MomentArgs& a, std::ostream& out, std::ostream&) {
  KernelND kernel = parse_kernel(a.kernel);
  if (a.dim) kernel = promote(kernel, a.dim);
  const std::size_t n = kernel.dim();
  const SamplingScheme scheme = parse_scheme(a.scheme, n);
  double step = a.step;
  if (!(step > 0.0)) {
    if (n == 1) step = kernel.compact() ? 1e-3 : 1e-2;
    else step = kernel.compact() ? 1.0 / 64 : 1.0 / 16;
  }
  const MomentOptions mopt;
  nlohmann::json j;
  j["kernel"] = kernel.id();
  j["scheme"] = a.scheme;
  j["grid_step"] = step;
  j["tolerance"] = mopt.tol;
  j["max_radius"] = mopt.max_radius;
  nlohmann::json d = nlohmann::json::object();
  for (double b : a.betas) {
    const auto m = discrete_moment(kernel, scheme, b, step, mopt);
    d[format_key(b)] = {{"value", m.divergent ? nlohmann::json("divergent") : nlohmann::json(m.value)},
                        {"tail_bound", finite_or(m.tail_bound, "infinite")},
                        {"argmax", m.argmax}};
  }
  j["discrete"] = d;
  nlohmann::json c = nlohmann::json::object();
  for (double nu : a.nus) c[format_key(nu)] = finite_or(continuous_moment(kernel, nu), "infinite");
  j["continuous"] = c;
  j["l1_norm"] = l1_norm(kernel);
  emit(a.output, j.dump(2) + "\n", out);
  return Ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sampling Kantorovich operators: kernel certificates, rate experiments, image resampling", "kanto"};
  app.require_subcommand(1);
  int threads = 0;

  ValidateArgs va;
  auto* v = app.add_subcommand("validate-kernel", "Certify a kernel against the operator conditions");
  v->add_option("--kernel", va.kernel, "Kernel id: fejer, bspline:k, product:(...)")->required();
  v->add_option("--scheme", va.scheme, "Sampling scheme spec");
  v->add_option("--dim", va.dim, "Promote a 1D kernel to this dimension");
  v->add_option("--w", va.w, "w ladder for rate exponents")->delimiter(',');
  v->add_option("--grid", va.step, "Moment search grid step (0 = automatic)");
  v->add_option("-o", va.output, "Output path, - for stdout");
  add_threads(v, threads);

  RateArgs ra;
  auto* r = app.add_subcommand("rate", "Measure the convergence rate of S_w f over a w ladder");
  r->add_option("--kernel", ra.kernel, "Kernel id");
  r->add_option("--scheme", ra.scheme, "Sampling scheme spec");
  r->add_option("--function", ra.function, "Test function: hat, cusp, indicator, gaussian, constant");
  r->add_option("--nu", ra.nu, "Hoelder exponent of the cusp");
  r->add_option("--dim", ra.dim, "Dimension");
  r->add_option("--mode", ra.mode, "sup or modular (modular when --phi is given)");
  r->add_option("--phi", ra.phi, "phi spec: p:2, ab:1:1, exp:1");
  r->add_option("--lambda", ra.lambda, "Modular scale lambda");
  r->add_option("--w", ra.w, "Comma separated, strictly increasing, at least 4 values")->delimiter(',');
  r->add_option("--grid", ra.grid, "Sup-error grid nodes per axis");
  r->add_option("--box", ra.box, "Sup-error box lo:hi per axis, comma separated");
  r->add_option("--tol", ra.tol, "Series truncation tolerance");
  r->add_option("-o", ra.output, "CSV output path, - for stdout");
  r->add_option("--json", ra.json, "JSON report path (default: next to -o)");
  add_threads(r, threads);

  ResampleArgs sa;
  auto* s = app.add_subcommand("resample", "Resample a PGM image with S_w");
  s->add_option("-i,--input", sa.input, "Input PGM (P2 or P5)")->required();
  s->add_option("--kernel", sa.kernel, "Kernel id");
  s->add_option("--w", sa.w, "Sampling density in samples per pixel");
  s->add_option("--size", sa.size, "Target size WxH");
  s->add_option("--scale", sa.scale, "Target size as a multiple of the input (ignored with --size)");
  s->add_option("--boundary", sa.boundary, "replicate or zero");
  s->add_option("--box", sa.box, "Target region in pixel units, lo:hi per axis");
  s->add_option("--tol", sa.tol, "Truncation tolerance (0 = automatic)");
  s->add_option("-o", sa.output, "Output PGM path, - for stdout");
  add_threads(s, threads);

  MomentArgs ma;
  auto* m = app.add_subcommand("moments", "Discrete and continuous absolute moments of a kernel");
  m->add_option("--kernel", ma.kernel, "Kernel id")->required();
  m->add_option("--scheme", ma.scheme, "Sampling scheme spec");
  m->add_option("--dim", ma.dim, "Promote a 1D kernel to this dimension");
  m->add_option("--beta", ma.betas, "Discrete moment orders")->delimiter(',');
  m->add_option("--nu", ma.nus, "Continuous moment orders")->delimiter(',');
  m->add_option("--grid", ma.step, "Search grid step (0 = automatic)");
  m->add_option("-o", ma.output, "Output path, - for stdout");
  add_threads(m, threads);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return Ok;
  } catch (const CLI::ParseError& e) {
    err << "kanto: " << e.what() << "\n";
    return Usage;
  }

  try {
    if (threads > 0) set_thread_count(static_cast<std::size_t>(threads));
    if (v->parsed()) return cmd_validate(va, out, err);
    if (r->parsed()) return cmd_rate(ra, out, err);
    if (s->parsed()) return cmd_resample(sa, out, err);
    if (m->parsed()) return cmd_moments(ma, out, err);
  } catch (const std::invalid_argument& e) {
    err << "kanto: " << e.what() << "\n";
    return Usage;
  } catch (const std::out_of_range& e) {
    err << "kanto: " << e.what() << "\n";
    return Usage;
  } catch (const FormatError& e) {
    err << "kanto: " << e.what() << "\n";
    return Usage;
  } catch (const IoError& e) {
    err << "kanto: " << e.what() << "\n";
    return Usage;
  } catch (const std::exception& e) {
    err << "kanto: " << e.what() << "\n";
    return Internal;
  }
  return Usage;
}

}  // namespace kanto::cli
