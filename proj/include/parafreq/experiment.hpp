#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "parafreq/backgrounds.hpp"
#include "parafreq/error.hpp"
#include "parafreq/evolve.hpp"
#include "parafreq/frequency.hpp"
#include "parafreq/ouspec.hpp"
#include "parafreq/quadrature.hpp"

namespace parafreq {

inline constexpr const char* version = "0.1.0";

using Json = nlohmann::ordered_json;

struct ExperimentConfig {
  std::string experiment = "monotonicity";
  std::string background = "gaussian";
  int dim = 1;
  std::optional<double> t1;
  std::vector<double> center;
  double length = 2.0 * std::numbers::pi;
  double c0 = 4.0;

  // solution
  std::vector<int> degrees;  // caloric; empty means a seeded random mixture
  std::string modes;         // "k:cos:sin,..." (circle) or "l:coef,..." (sphere); empty means random
  int max_mode = 4;
  double alpha = 0.0;
  double beta = 0.0;
  std::string shape = "constant";

  std::optional<TimeWindow> window;
  int samples = 64;
  int order = 0;
  int truncation = 48;
  double sphere_eps = 0.0;

  // ou-spectrum
  double tau = 1.0;
  int n_max = 6;

  std::uint64_t seed = 1;
  bool corrupt = false;
  bool parallel = false;
  std::string csv_path = "parafreq_trace.csv";
  std::string json_path = "parafreq_report.json";
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"monotonicity",    "equality-case",    "backwards-uniqueness",
                                              "hessian-identity", "perturbed-bounds", "corollary-bound",
                                              "ou-spectrum",      "all"};
  return names;
}

/// Tolerances keyed by check name, multiplied by PARAFREQ_TOLERANCE_SCALE.
class ToleranceTable {
 public:
  ToleranceTable() = default;
  explicit ToleranceTable(double scale) : scale_(scale) {}

  static ToleranceTable from_environment() {
    const char* env = std::getenv("PARAFREQ_TOLERANCE_SCALE");
    if (env == nullptr || *env == '\0') return ToleranceTable{};
    char* end = nullptr;
    const double s = std::strtod(env, &end);
    require(end != env && *end == '\0' && s > 0.0 && std::isfinite(s), ErrorCode::ConfigError,
            "PARAFREQ_TOLERANCE_SCALE must be a positive real, got '" + std::string(env) + "'");
    return ToleranceTable{s};
  }

  double scale() const noexcept { return scale_; }

  double operator[](const std::string& check) const {
    auto it = base_.find(check);
    require(it != base_.end(), ErrorCode::ConfigError, "no tolerance for check '" + check + "'");
    return it->second * scale_;
  }

  Tolerances checker_tolerances() const {
    Tolerances t;
    t.monotone = (*this)["monotonicity"];
    t.dual_form = (*this)["dual-form"];
    t.stationary = (*this)["stationary"];
    t.backwards = (*this)["backwards-uniqueness"];
    t.general_bounds = (*this)["perturbed-bounds"];
    t.corollary = (*this)["corollary-bound"];
    return t;
  }

 private:
  double scale_ = 1.0;
  std::map<std::string, double> base_{
      {"monotonicity", 1e-8},     {"nonpositive-U", 1e-10},   {"dual-form", 1e-8},
      {"stationary", 1e-6},       {"equality-case", 1e-7},    {"backwards-uniqueness", 1e-6},
      {"log-I-identity", 1e-5},   {"hessian-identity", 1e-7}, {"cauchy-schwarz", 1e-10},
      {"perturbed-bounds", 1e-5}, {"hypothesis", 1e-6},      {"corollary-bound", 1e-5},
      {"ou-spectrum", 1e-8},
  };
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

inline double parse_real(const std::string& s, const std::string& field) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(end != s.c_str() && *end == '\0' && std::isfinite(v), ErrorCode::ConfigError,
          field + ": cannot parse '" + s + "' as a real");
  return v;
}

inline int parse_int(const std::string& s, const std::string& field) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc{} && p == s.data() + s.size(), ErrorCode::ConfigError,
          field + ": cannot parse '" + s + "' as an integer");
  return v;
}

inline TimeWindow parse_window(const std::string& s) {
  const auto parts = split(s, ':');
  require(parts.size() == 2, ErrorCode::ConfigError, "window: expected a:b, got '" + s + "'");
  return {parse_real(parts[0], "window"), parse_real(parts[1], "window")};
}

template <class T>
T json_get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, std::string(key) + ": " + e.what());
  }
}

inline std::string shortest(double x) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

}  // namespace detail

/// Overlays every key present in `j` onto the config.
inline void apply_json(ExperimentConfig& c, const Json& j) {
  require(j.is_object(), ErrorCode::ConfigError, "config: expected a JSON object");
  static const std::vector<std::string> known{
      "experiment", "background", "dim",      "t1",       "center",     "length",  "c0",      "degree",
      "degrees",    "modes",      "max_mode", "alpha",    "beta",       "shape",   "window",  "samples",
      "order",      "truncation", "sphere_eps", "tau",    "n_max",      "seed",    "corrupt", "parallel",
      "csv",        "json"};
  for (const auto& [key, value] : j.items())
    require(std::find(known.begin(), known.end(), key) != known.end(), ErrorCode::ConfigError,
            key + ": unknown config field");

  if (j.contains("experiment")) c.experiment = detail::json_get<std::string>(j, "experiment");
  if (j.contains("background")) c.background = detail::json_get<std::string>(j, "background");
  if (j.contains("dim")) c.dim = detail::json_get<int>(j, "dim");
  if (j.contains("t1")) c.t1 = detail::json_get<double>(j, "t1");
  if (j.contains("center")) {
    if (j["center"].is_number())
      c.center = {detail::json_get<double>(j, "center")};
    else
      c.center = detail::json_get<std::vector<double>>(j, "center");
  }
  if (j.contains("length")) c.length = detail::json_get<double>(j, "length");
  if (j.contains("c0")) c.c0 = detail::json_get<double>(j, "c0");
  if (j.contains("degree")) c.degrees = {detail::json_get<int>(j, "degree")};
  if (j.contains("degrees")) {
    if (j["degrees"].is_string()) {
      c.degrees.clear();
      for (const auto& s : detail::split(j["degrees"].get<std::string>(), ','))
        c.degrees.push_back(detail::parse_int(s, "degrees"));
    } else {
      c.degrees = detail::json_get<std::vector<int>>(j, "degrees");
    }
  }
  if (j.contains("modes")) c.modes = detail::json_get<std::string>(j, "modes");
  if (j.contains("max_mode")) c.max_mode = detail::json_get<int>(j, "max_mode");
  if (j.contains("alpha")) c.alpha = detail::json_get<double>(j, "alpha");
  if (j.contains("beta")) c.beta = detail::json_get<double>(j, "beta");
  if (j.contains("shape")) c.shape = detail::json_get<std::string>(j, "shape");
  if (j.contains("window")) {
    if (j["window"].is_string()) {
      c.window = detail::parse_window(j["window"].get<std::string>());
    } else {
      const auto w = detail::json_get<std::vector<double>>(j, "window");
      require(w.size() == 2, ErrorCode::ConfigError, "window: expected [a, b]");
      c.window = TimeWindow{w[0], w[1]};
    }
  }
  if (j.contains("samples")) c.samples = detail::json_get<int>(j, "samples");
  if (j.contains("order")) c.order = detail::json_get<int>(j, "order");
  if (j.contains("truncation")) c.truncation = detail::json_get<int>(j, "truncation");
  if (j.contains("sphere_eps")) c.sphere_eps = detail::json_get<double>(j, "sphere_eps");
  if (j.contains("tau")) c.tau = detail::json_get<double>(j, "tau");
  if (j.contains("n_max")) c.n_max = detail::json_get<int>(j, "n_max");
  if (j.contains("seed")) c.seed = detail::json_get<std::uint64_t>(j, "seed");
  if (j.contains("corrupt")) c.corrupt = detail::json_get<bool>(j, "corrupt");
  if (j.contains("parallel")) c.parallel = detail::json_get<bool>(j, "parallel");
  if (j.contains("csv")) c.csv_path = detail::json_get<std::string>(j, "csv");
  if (j.contains("json")) c.json_path = detail::json_get<std::string>(j, "json");
}

inline Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = c.experiment;
  j["background"] = c.background;
  j["dim"] = c.dim;
  if (c.t1) j["t1"] = *c.t1;
  j["center"] = c.center;
  j["length"] = c.length;
  j["c0"] = c.c0;
  j["degrees"] = c.degrees;
  j["modes"] = c.modes;
  j["max_mode"] = c.max_mode;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["shape"] = c.shape;
  if (c.window) j["window"] = {c.window->a, c.window->b};
  j["samples"] = c.samples;
  j["order"] = c.order;
  j["truncation"] = c.truncation;
  j["sphere_eps"] = c.sphere_eps;
  j["tau"] = c.tau;
  j["n_max"] = c.n_max;
  j["seed"] = c.seed;
  j["corrupt"] = c.corrupt;
  j["parallel"] = c.parallel;
  j["csv"] = c.csv_path;
  j["json"] = c.json_path;
  return j;
}

inline BackgroundKind parse_background(const std::string& s) {
  if (s == "gaussian") return BackgroundKind::GaussianSoliton;
  if (s == "circle") return BackgroundKind::FlatCircle;
  if (s == "sphere") return BackgroundKind::ShrinkingSphere;
  fail(ErrorCode::ConfigError, "background: expected gaussian, circle or sphere, got '" + s + "'");
}

inline FlowBackground make_background(const ExperimentConfig& c) {
  const BackgroundKind kind = parse_background(c.background);
  try {
    switch (kind) {
      case BackgroundKind::GaussianSoliton: {
        const int dim = c.degrees.empty() ? c.dim : static_cast<int>(c.degrees.size());
        Point x1{};
        for (std::size_t i = 0; i < c.center.size() && i < 3; ++i) x1[i] = c.center[i];
        return FlowBackground::gaussian_soliton(dim, c.t1.value_or(0.0), x1);
      }
      case BackgroundKind::FlatCircle:
        return FlowBackground::flat_circle(c.length, c.t1.value_or(0.0), c.center.empty() ? 0.0 : c.center[0]);
      case BackgroundKind::ShrinkingSphere:
        return FlowBackground::shrinking_sphere(c.c0, c.t1.value_or(1.0));
    }
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, std::string("background: ") + e.what());
  }
  fail(ErrorCode::ConfigError, "background: unsupported");
}

inline TimeWindow effective_window(const ExperimentConfig& c, const FlowBackground& bg) {
  if (c.window) return *c.window;
  return TimeWindow{bg.t1() - 2.0, bg.t1() - 1.0};
}

/// Rejects configs the runner cannot execute; the message names the field.
inline void validate(const ExperimentConfig& c) {
  require(std::find(experiment_names().begin(), experiment_names().end(), c.experiment) != experiment_names().end(),
          ErrorCode::ConfigError, "experiment: unknown experiment '" + c.experiment + "'");
  require(c.samples >= 8, ErrorCode::ConfigError, "samples: need at least 8");
  require(c.order == 0 || c.order >= 4, ErrorCode::ConfigError, "order: need at least 4");
  require(c.truncation >= 1, ErrorCode::ConfigError, "truncation: need at least 1");
  require(c.max_mode >= 0 && c.max_mode <= 64, ErrorCode::ConfigError, "max_mode: expected 0..64");
  require(c.tau > 0.0, ErrorCode::ConfigError, "tau: must be positive");
  require(c.n_max >= 0 && c.n_max <= max_hermite_degree, ErrorCode::ConfigError, "n_max: expected 0..20");
  require(c.shape == "constant" || c.shape == "sine" || c.shape == "cosine", ErrorCode::ConfigError,
          "shape: expected constant, sine or cosine");
  for (int d : c.degrees)
    require(d >= 0 && d <= max_caloric_degree, ErrorCode::ConfigError, "degrees: each must be in 0..12");
  if (c.experiment == "ou-spectrum") return;

  const FlowBackground bg = make_background(c);
  const TimeWindow w = effective_window(c, bg);
  require(w.a < w.b, ErrorCode::ConfigError, "window: need a < b");
  const double eps_min = 1e-3 * (bg.t1() - w.a);
  require(w.b < bg.t1() - eps_min, ErrorCode::ConfigError, "window: must end before t1 - eps_min");
  if (bg.is(BackgroundKind::ShrinkingSphere))
    require(bg.initial_scale() - 2.0 * w.a > 0.0, ErrorCode::ConfigError, "window: sphere is extinct at a");
  if ((c.alpha != 0.0 || c.beta != 0.0) && !bg.is(BackgroundKind::FlatCircle))
    fail(ErrorCode::ConfigError, "alpha: perturbations are only supported on the circle");
}

inline SpectralField parse_modes(const FlowBackground& bg, const std::string& text) {
  std::vector<double> cs, sn;
  for (const auto& item : detail::split(text, ',')) {
    const auto parts = detail::split(item, ':');
    require(parts.size() >= 2 && parts.size() <= 3, ErrorCode::ConfigError, "modes: bad entry '" + item + "'");
    const int k = detail::parse_int(parts[0], "modes");
    require(k >= 0 && k <= 64, ErrorCode::ConfigError, "modes: index out of range in '" + item + "'");
    if (static_cast<int>(cs.size()) <= k) {
      cs.resize(k + 1, 0.0);
      sn.resize(k + 1, 0.0);
    }
    cs[k] = detail::parse_real(parts[1], "modes");
    if (parts.size() == 3) {
      require(bg.is(BackgroundKind::FlatCircle), ErrorCode::ConfigError, "modes: sine part only exists on the circle");
      sn[k] = detail::parse_real(parts[2], "modes");
    }
  }
  require(!cs.empty(), ErrorCode::ConfigError, "modes: empty");
  if (bg.is(BackgroundKind::FlatCircle)) return SpectralField::fourier(bg, cs, sn);
  return SpectralField::legendre(bg, cs);
}

inline TimeCoefficient make_coefficient(double amp, const std::string& shape) {
  if (shape == "sine") return TimeCoefficient::sine(amp);
  if (shape == "cosine") return TimeCoefficient::cosine(amp);
  return TimeCoefficient::constant(amp);
}

/// The solution an experiment traces, from the config's solution fields.
inline HeatSolution make_solution(const ExperimentConfig& c) {
  const FlowBackground bg = make_background(c);
  const TimeWindow w = effective_window(c, bg);
  std::mt19937_64 rng(c.seed);
  switch (bg.kind()) {
    case BackgroundKind::GaussianSoliton:
      if (!c.degrees.empty()) return caloric_polynomial(bg, std::span<const int>(c.degrees), w);
      return caloric_mixture(bg, random_caloric_terms(bg.dim(), std::min(c.max_mode, 6), 3, rng), w);
    case BackgroundKind::FlatCircle: {
      const SpectralField u0 = c.modes.empty() ? random_band_limited(bg, c.max_mode, rng) : parse_modes(bg, c.modes);
      if (c.alpha != 0.0 || c.beta != 0.0)
        return solve_perturbed(bg, u0, make_coefficient(c.alpha, c.shape), make_coefficient(c.beta, c.shape), w);
      return solve_heat(bg, u0, w);
    }
    case BackgroundKind::ShrinkingSphere: {
      const SpectralField u0 = c.modes.empty() ? random_zonal(bg, c.max_mode, rng) : parse_modes(bg, c.modes);
      return solve_heat(bg, u0, w);
    }
  }
  fail(ErrorCode::ConfigError, "background: unsupported");
}

inline TraceOptions make_trace_options(const ExperimentConfig& c, const FlowBackground& bg, const ToleranceTable& tt) {
  TraceOptions o;
  o.samples = c.samples;
  o.order = c.order;
  o.kernel.sphere_modes = c.truncation;
  o.kernel.sphere_eps = c.sphere_eps;
  o.kernel.min_tau = 1e-3 * (bg.t1() - effective_window(c, bg).a);
  o.parallel = c.parallel;
  o.tolerances = tt.checker_tolerances();
  return o;
}

/// Writes the trace as CSV: t,tau,I,D,kappa,Ecorr,U,U_fd_prime with shortest round-trip decimals.
inline void emit_trace(const FrequencyTrace& tr, const std::filesystem::path& path) {
  require(!tr.samples.empty(), ErrorCode::IoError, "refusing to write an empty trace");
  std::ostringstream os;
  os << "t,tau,I,D,kappa,Ecorr,U,U_fd_prime\n";
  for (const auto& s : tr.samples) {
    using detail::shortest;
    os << shortest(s.t) << ',' << shortest(s.tau) << ',' << shortest(s.I) << ',' << shortest(s.D) << ','
       << shortest(s.kappa) << ',' << shortest(s.Ecorr) << ',' << shortest(s.U) << ',' << shortest(s.U_prime)
       << '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot open " + path.string());
  out << os.str();
  out.flush();
  require(static_cast<bool>(out), ErrorCode::IoError, "write failed for " + path.string());
}

inline Json check_to_json(const CheckReport& r) {
  auto num = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
  Json j;
  j["name"] = r.name;
  j["passed"] = r.passed;
  j["lhs"] = num(r.lhs);
  j["rhs"] = num(r.rhs);
  j["margin"] = num(r.margin);
  j["tolerance"] = num(r.tolerance);
  if (!r.detail.empty()) j["detail"] = r.detail;
  if (!r.passed) j["error"] = std::string(to_string(r.failure_code));
  return j;
}

/// A residual check: passes when `residual` <= tolerance.
inline CheckReport residual_check(const std::string& name, double residual, double tolerance, ErrorCode code,
                                  std::string detail = {}) {
  CheckReport r;
  r.name = name;
  r.lhs = residual;
  r.rhs = 0.0;
  r.tolerance = tolerance;
  r.margin = tolerance - residual;
  r.passed = std::isfinite(residual) && r.margin >= 0.0;
  r.failure_code = code;
  r.detail = std::move(detail);
  return r;
}

inline CheckReport error_check(const std::string& name, const Error& e) {
  CheckReport r;
  r.name = name;
  r.passed = false;
  r.lhs = r.rhs = r.margin = r.tolerance = std::numeric_limits<double>::quiet_NaN();
  r.failure_code = e.code();
  r.detail = e.what();
  return r;
}

struct RunResult {
  int exit_code = 0;
  Json report;
  std::optional<FrequencyTrace> trace;
  std::vector<CheckReport> checks;
};

namespace detail {

inline void corrupt_trace(FrequencyTrace& tr) {
  auto& s = tr.samples[tr.samples.size() / 2];
  s.U -= 0.5 * (1.0 + std::abs(s.U));
}

inline std::vector<double> sample_times(const FrequencyTrace& tr) { return tr.times(); }

struct Runner {
  const ExperimentConfig& cfg;
  const ToleranceTable& tt;
  FlowBackground bg;
  TraceOptions topts;
  std::optional<HeatSolution> sol;
  std::optional<FrequencyTrace> tr;
  std::vector<CheckReport> checks;
  Json extra = Json::object();

  Runner(const ExperimentConfig& c, const ToleranceTable& t)
      : cfg(c), tt(t), bg(make_background(c)), topts(make_trace_options(c, bg, t)) {}

  const FrequencyTrace& ensure_trace() {
    if (!tr) {
      sol = make_solution(cfg);
      tr = trace(*sol, topts);
    }
    return *tr;
  }

  template <class F>
  void guarded(const std::string& name, F&& f) {
    try {
      f();
    } catch (const CheckFailure& e) {
      checks.push_back(e.report());
    } catch (const Error& e) {
      checks.push_back(error_check(name, e));
    }
  }

  void monotonicity() {
    guarded("monotonicity", [&] {
      ensure_trace();
      if (cfg.corrupt) corrupt_trace(*tr);
      checks.push_back(assess_monotone(*tr, topts.tolerances));
      double umax = -std::numeric_limits<double>::infinity();
      for (const auto& s : tr->samples) umax = std::max(umax, s.U);
      CheckReport r;
      r.name = "nonpositive-U";
      r.lhs = umax;
      r.rhs = 0.0;
      r.tolerance = tt["nonpositive-U"];
      r.margin = r.tolerance - umax;
      r.passed = r.margin >= 0.0;
      r.failure_code = ErrorCode::BoundViolation;
      checks.push_back(r);
      const double gap = cauchy_schwarz_gap(*tr);
      CheckReport cs;
      cs.name = "cauchy-schwarz";
      cs.lhs = gap;
      cs.rhs = 0.0;
      cs.tolerance = tt["cauchy-schwarz"];
      cs.margin = gap + cs.tolerance;
      cs.passed = cs.margin >= 0.0;
      cs.failure_code = ErrorCode::BoundViolation;
      checks.push_back(cs);
    });
  }

  void equality_case() {
    guarded("equality-case", [&] {
      require(bg.is(BackgroundKind::GaussianSoliton), ErrorCode::ConfigError,
              "experiment: equality-case runs on the Gaussian soliton");
      ensure_trace();
      double worst = 0.0;
      for (const auto& s : tr->samples) {
        const TimeSlice sl = make_slice(bg, s.t, trace_order(*sol, topts), topts.kernel);
        worst = std::max(worst, equality_case_residual(sol->field_at(s.t), sl.kernel, sl.quad, s, topts.tolerances));
      }
      checks.push_back(residual_check("equality-case", worst, tt["equality-case"], ErrorCode::NotStationary));
    });
  }

  void backwards_uniqueness() {
    guarded("backwards-uniqueness", [&] {
      ensure_trace();
      checks.push_back(assess_backwards_bound(*tr, topts.tolerances));
      if (tr->exact_heat)
        checks.push_back(residual_check("log-I-identity", log_I_identity_residual(*tr), tt["log-I-identity"],
                                        ErrorCode::BoundViolation));
    });
  }

  void hessian_identity() {
    guarded("hessian-identity", [&] {
      ensure_trace();
      const KernelOptions kopts = trace_kernel_options(bg, sol->window(), topts.kernel);
      double worst = 0.0;
      for (const auto& s : tr->samples) {
        const TimeSlice sl = make_slice(bg, s.t, trace_order(*sol, topts), kopts);
        worst = std::max(worst, hessian_identity_residual(sol->field_at(s.t), sl.kernel, sl.quad));
      }
      checks.push_back(residual_check("hessian-identity", worst, tt["hessian-identity"], ErrorCode::BoundViolation));
    });
  }

  void perturbed_bounds() {
    guarded("perturbed-bounds", [&] {
      require(bg.is(BackgroundKind::FlatCircle), ErrorCode::ConfigError,
              "experiment: perturbed-bounds runs on the circle");
      ensure_trace();
      double worst = 0.0;
      const TimeSlice sl = make_slice(bg, tr->samples.front().t, trace_order(*sol, topts), topts.kernel);
      for (const auto& s : tr->samples) {
        double lap = 0.0;
        for (double v : synthesize(laplacian(sol->field_at(s.t), s.t), sl.quad.nodes)) lap = std::max(lap, std::abs(v));
        worst = std::max(worst, hypothesis_excess(*sol, s.t, sl.quad.nodes) / (1.0 + lap));
      }
      checks.push_back(residual_check("hypothesis", worst, tt["hypothesis"], ErrorCode::BoundViolation));
      checks.push_back(assess_general_bounds(*tr, topts.tolerances));
    });
  }

  void corollary_bound() {
    guarded("corollary-bound", [&] {
      require(bg.is(BackgroundKind::FlatCircle), ErrorCode::ConfigError,
              "experiment: corollary-bound runs on the circle");
      ensure_trace();
      checks.push_back(assess_corollary_bound(*tr, topts.tolerances));
    });
  }

  void ou_spectrum() {
    guarded("ou-spectrum", [&] {
      const auto ev = galerkin_spectrum(cfg.tau, cfg.n_max);
      double worst = 0.0;
      for (std::size_t j = 0; j < ev.size(); ++j) worst = std::max(worst, std::abs(ev[j] + j / (2.0 * cfg.tau)));
      extra["eigenvalues"] = ev;
      checks.push_back(residual_check("ou-spectrum", worst, tt["ou-spectrum"], ErrorCode::BoundViolation));
    });
  }

  void run(const std::string& name) {
    if (name == "monotonicity") monotonicity();
    else if (name == "equality-case") equality_case();
    else if (name == "backwards-uniqueness") backwards_uniqueness();
    else if (name == "hessian-identity") hessian_identity();
    else if (name == "perturbed-bounds") perturbed_bounds();
    else if (name == "corollary-bound") corollary_bound();
    else if (name == "ou-spectrum") ou_spectrum();
    else if (name == "all") {
      ensure_trace();
      if (tr->exact_heat) {
        monotonicity();
        backwards_uniqueness();
      }
      hessian_identity();
      if (bg.is(BackgroundKind::GaussianSoliton)) {
        if (!cfg.degrees.empty()) equality_case();
        ou_spectrum();
      }
      if (bg.is(BackgroundKind::FlatCircle)) {
        perturbed_bounds();
        corollary_bound();
      }
    }
  }
};

}  // namespace detail

/// Runs the configured experiment without touching the filesystem.
inline RunResult run_experiment(const ExperimentConfig& cfg, const ToleranceTable& tt = {}) {
  validate(cfg);
  RunResult res;
  res.report["experiment"] = cfg.experiment;
  res.report["config"] = config_to_json(cfg);
  res.report["tolerance_scale"] = tt.scale();

  std::optional<detail::Runner> runner;
  if (cfg.experiment == "ou-spectrum") {
    // no background needed
    ExperimentConfig c = cfg;
    c.background = "gaussian";
    c.degrees.clear();
    c.dim = 1;
    runner.emplace(c, tt);
    runner->ou_spectrum();
  } else {
    runner.emplace(cfg, tt);
    runner->run(cfg.experiment);
  }

  Json checks = Json::array();
  bool ok = !runner->checks.empty();
  for (const auto& c : runner->checks) {
    checks.push_back(check_to_json(c));
    ok = ok && c.passed;
  }
  res.report["checks"] = checks;
  for (auto& [k, v] : runner->extra.items()) res.report[k] = v;
  if (runner->tr) {
    bool corrected = false;
    for (const auto& s : runner->tr->samples) corrected = corrected || s.Ecorr != 1.0;
    if (corrected)
      res.report["note"] = "kappa > 1 on this background; Ecorr = exp(+int_a^t (1 - kappa)/tau) is applied";
  }
  res.report["version"] = version;
  res.exit_code = ok ? 0 : 1;
  res.trace = runner->tr;
  res.checks = runner->checks;
  return res;
}

/// Runs the experiment and writes the trace CSV (when a trace exists) and the JSON report.
inline int run(const ExperimentConfig& cfg, const ToleranceTable& tt = ToleranceTable::from_environment()) {
  RunResult res = run_experiment(cfg, tt);
  if (res.trace && !cfg.csv_path.empty()) emit_trace(*res.trace, cfg.csv_path);
  if (!cfg.json_path.empty()) {
    std::ofstream out(cfg.json_path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::IoError, "cannot open " + cfg.json_path);
    out << res.report.dump(2) << '\n';
    require(static_cast<bool>(out), ErrorCode::IoError, "write failed for " + cfg.json_path);
  }
  return res.exit_code;
}

}  // namespace parafreq
