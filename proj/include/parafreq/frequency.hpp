#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "parafreq/backgrounds.hpp"
#include "parafreq/error.hpp"
#include "parafreq/evolve.hpp"
#include "parafreq/kernel.hpp"
#include "parafreq/quadrature.hpp"
#include "parafreq/simpson.hpp"
#include "parafreq/spectral.hpp"

namespace parafreq {

/// Default tolerances of every checker; the CLI scales them uniformly.
struct Tolerances {
  double monotone = 1e-8;        // times (1 + |U(a)|)
  double dual_form = 1e-8;       // times max(1, |D|)
  double stationary = 1e-6;      // |U'| below which U counts as constant
  double backwards = 1e-6;       // relative slack on the backwards bound
  double general_bounds = 1e-5;  // times (1 + |U| + tau(a))
  double corollary = 1e-5;       // relative slack on the corollary bound
  double zero_solution = 1e-30;  // I at or below this is a zero solution

  Tolerances scaled(double s) const {
    Tolerances t = *this;
    t.monotone *= s;
    t.dual_form *= s;
    t.stationary *= s;
    t.backwards *= s;
    t.general_bounds *= s;
    t.corollary *= s;
    return t;
  }
};

/// All d nu integrals of one field at one time, from a single pass over the nodes.
struct SliceIntegrals {
  double I = 0.0;         // int u^2
  double grad_sq = 0.0;   // int |grad u|^2
  double u_lf = 0.0;      // int u L_f u
  double lf_sq = 0.0;     // int |L_f u|^2
  double hess_sq = 0.0;   // int |Hess u|^2
  double ricf = 0.0;      // int Ric_f(grad u, grad u)
};

inline SliceIntegrals integrate_slice(const SpectralField& u, const KernelData& kd, const WeightedQuadrature& q) {
  require(u.background().kind() == kd.background().kind(), ErrorCode::ReprMismatch,
          "field and kernel live on different backgrounds");
  const std::vector<Jet> uj = jets(u, kd.t(), q.nodes);
  const Mat3 ric = kd.ricci();
  SliceIntegrals s;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const Jet& j = uj[i];
    const KernelJet k = kd.jet(q.nodes[i]);
    const double w = q.weights[i];
    const double lf = drift_apply(kd, j, k);
    double g2 = 0.0, h2 = 0.0, rf = 0.0;
    for (int a = 0; a < 3; ++a) {
      g2 += j.grad[a] * j.grad[a];
      for (int b = 0; b < 3; ++b) {
        h2 += j.hess[a][b] * j.hess[a][b];
        rf += j.grad[a] * (ric[a][b] + k.hess_f[a][b]) * j.grad[b];
      }
    }
    s.I += w * j.value * j.value;
    s.grad_sq += w * g2;
    s.u_lf += w * j.value * lf;
    s.lf_sq += w * lf * lf;
    s.hess_sq += w * h2;
    s.ricf += w * rf;
  }
  return s;
}

/// I(t) = int u^2 d nu
inline double compute_I(const SpectralField& u, const KernelData& kd, const WeightedQuadrature& q) {
  require(u.background().kind() == kd.background().kind(), ErrorCode::ReprMismatch,
          "field and kernel live on different backgrounds");
  const auto v = synthesize(u, q.nodes);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += q.weights[i] * v[i] * v[i];
  return s;
}

namespace detail {
inline double checked_D(const SliceIntegrals& s, double tau, const Tolerances& tol) {
  const double D = -tau * s.grad_sq;
  const double dual = tau * s.u_lf;
  require(std::abs(D - dual) <= tol.dual_form * std::max(1.0, std::abs(D)), ErrorCode::DualFormMismatch,
          "gradient form " + std::to_string(D) + " vs drift form " + std::to_string(dual));
  return D;
}
}  // namespace detail

/// D(t) = -tau int |grad u|^2 d nu, cross-checked against tau int u L_f u d nu.
inline double compute_D(const SpectralField& u, const KernelData& kd, const WeightedQuadrature& q, double tau,
                        const Tolerances& tol = {}) {
  return detail::checked_D(integrate_slice(u, kd, q), tau, tol);
}

/// U = Ecorr D / I.
inline double compute_U(double D, double I, double ecorr, const Tolerances& tol = {}) {
  require(I > tol.zero_solution, ErrorCode::ZeroSolution, "I(t) vanishes; frequency undefined");
  return ecorr * D / I;
}

struct StencilValues {
  double tau = 0.0;
  double I = 0.0;
  double D = 0.0;
  double kappa = 1.0;
};

struct FrequencySample {
  double t = 0.0;
  double tau = 0.0;
  double I = 0.0;
  double D = 0.0;
  double kappa = 1.0;
  double Ecorr = 1.0;
  double U = 0.0;
  double C = 0.0;
  // central differences with step fd_step
  double I_prime = 0.0;
  double logI_prime = 0.0;
  double U_prime = 0.0;
  // for the Cauchy-Schwarz gap
  double u_lf = 0.0;
  double lf_sq = 0.0;
  StencilValues minus, plus;
};

struct FrequencyTrace {
  BackgroundKind background = BackgroundKind::GaussianSoliton;
  TimeWindow window{0.0, 0.0};
  double fd_step = 0.0;
  double grid_step = 0.0;
  bool exact_heat = true;
  std::vector<FrequencySample> samples;

  double tau_a() const { return samples.front().tau; }
  std::vector<double> times() const {
    std::vector<double> out;
    for (const auto& s : samples) out.push_back(s.t);
    return out;
  }
};

struct TraceOptions {
  int samples = 64;
  int order = 0;  // 0 picks the background default
  KernelOptions kernel{};
  bool parallel = false;
  Tolerances tolerances{};
};

/// Per-time evaluation shared by trace() and the checkers.
struct TimeSlice {
  KernelData kernel;
  WeightedQuadrature quad;
};

inline TimeSlice make_slice(const FlowBackground& bg, double t, int order, const KernelOptions& kopts) {
  KernelData kd = kernel_at(bg, t, kopts);
  WeightedQuadrature q = build_quadrature(kd, order);
  return {std::move(kd), std::move(q)};
}

/// Kernel options a trace over `window` uses: the sphere smoothing is fixed
/// at 1e-3 tau(a) for the whole window so that every slice sees one kernel.
inline KernelOptions trace_kernel_options(const FlowBackground& bg, const TimeWindow& w, KernelOptions k) {
  if (bg.is(BackgroundKind::ShrinkingSphere) && k.sphere_eps <= 0.0) k.sphere_eps = 1e-3 * (bg.t1() - w.a);
  return k;
}

inline int trace_order(const FlowBackground& bg, const TraceOptions& opts) {
  return opts.order > 0 ? opts.order : defaults::quadrature_order(bg);
}

/// Caloric solutions default to the smallest Gauss-Hermite order that is
/// exact for every slice integrand (per-axis degree <= 2 d), plus a margin.
inline int trace_order(const HeatSolution& sol, const TraceOptions& opts) {
  if (opts.order > 0 || sol.generator() != HeatSolution::Generator::Caloric) return trace_order(sol.background(), opts);
  int d = 0;
  for (const CaloricTerm& t : sol.caloric_terms())
    for (int a = 0; a < 3; ++a) d = std::max(d, t.degrees[a]);
  return std::max(8, d + 4);
}

/**
 * Samples I, D, kappa, Ecorr and U on a uniform grid over the solution's
 * window. Each sample is also evaluated at t +- h (h = 1e-5 (b - a)) for the
 * derivative estimates; Ecorr = exp(int_a^t (1 - kappa)/tau) is accumulated
 * by Simpson over the grid.
 */
inline FrequencyTrace trace(const HeatSolution& sol, const TraceOptions& opts = {}) {
  require(opts.samples >= 8, ErrorCode::InvalidArgument, "a trace needs at least 8 samples");
  const FlowBackground& bg = sol.background();
  const TimeWindow w = sol.window();
  const int order = trace_order(sol, opts);
  const KernelOptions kopts = trace_kernel_options(bg, w, opts.kernel);
  const Tolerances& tol = opts.tolerances;

  FrequencyTrace tr;
  tr.background = bg.kind();
  tr.window = w;
  tr.fd_step = fd_step(w);
  tr.grid_step = w.length() / (opts.samples - 1);
  tr.exact_heat = sol.is_exact_heat();
  tr.samples.resize(opts.samples);

  auto eval_point = [&](double t, FrequencySample* center) {
    const TimeSlice sl = make_slice(bg, t, order, kopts);
    const SliceIntegrals s = integrate_slice(sol.field_at(t), sl.kernel, sl.quad);
    StencilValues v;
    v.tau = sl.kernel.tau();
    v.I = s.I;
    v.D = detail::checked_D(s, v.tau, tol);
    v.kappa = kappa(sl.kernel, sl.quad);
    if (center) {
      center->u_lf = s.u_lf;
      center->lf_sq = s.lf_sq;
    }
    return v;
  };

  auto eval_sample = [&](std::size_t i) {
    FrequencySample& s = tr.samples[i];
    s.t = i + 1 == tr.samples.size() ? w.b : w.a + tr.grid_step * static_cast<double>(i);
    const StencilValues c = eval_point(s.t, &s);
    s.tau = c.tau;
    s.I = c.I;
    s.D = c.D;
    s.kappa = c.kappa;
    s.C = sol.C(s.t);
    s.minus = eval_point(s.t - tr.fd_step, nullptr);
    s.plus = eval_point(s.t + tr.fd_step, nullptr);
  };

  const std::size_t n = tr.samples.size();
  if (opts.parallel) {
    const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(n)));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned wk = 0; wk < workers; ++wk)
      pool.emplace_back([&, wk] {
        try {
          for (std::size_t i = wk; i < n; i += workers) eval_sample(i);
        } catch (...) {
          errors[wk] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (std::size_t i = 0; i < n; ++i) eval_sample(i);
  }

  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = (1.0 - tr.samples[i].kappa) / tr.samples[i].tau;
  const std::vector<double> G = cumulative_simpson(g, tr.grid_step);

  const double h = tr.fd_step;
  for (std::size_t i = 0; i < n; ++i) {
    FrequencySample& s = tr.samples[i];
    s.Ecorr = std::exp(G[i]);
    s.U = compute_U(s.D, s.I, s.Ecorr, tol);
    require(s.U <= 1e-10, ErrorCode::BoundViolation, "frequency became positive");
    require(s.minus.I > tol.zero_solution && s.plus.I > tol.zero_solution, ErrorCode::ZeroSolution,
            "I(t) vanishes near a sample");
    const double gm = (1.0 - s.minus.kappa) / s.minus.tau;
    const double gp = (1.0 - s.plus.kappa) / s.plus.tau;
    const double Em = s.Ecorr * std::exp(-0.5 * h * (g[i] + gm));
    const double Ep = s.Ecorr * std::exp(0.5 * h * (g[i] + gp));
    const double Um = Em * s.minus.D / s.minus.I;
    const double Up = Ep * s.plus.D / s.plus.I;
    s.U_prime = (Up - Um) / (2.0 * h);
    s.I_prime = (s.plus.I - s.minus.I) / (2.0 * h);
    s.logI_prime = (std::log(s.plus.I) - std::log(s.minus.I)) / (2.0 * h);
  }
  return tr;
}

/// Outcome of one checker. margin >= 0 exactly when the check passed.
struct CheckReport {
  std::string name;
  bool passed = true;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tolerance = 0.0;
  std::string detail;
  ErrorCode failure_code = ErrorCode::InvalidArgument;
};

class CheckFailure : public Error {
 public:
  explicit CheckFailure(CheckReport r)
      : Error(r.failure_code, r.name + " failed: " + r.detail), report_(std::move(r)) {}
  const CheckReport& report() const noexcept { return report_; }

 private:
  CheckReport report_;
};

inline const CheckReport& enforce(const CheckReport& r) {
  if (!r.passed) throw CheckFailure(r);
  return r;
}

namespace detail {
inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}
}  // namespace detail

/// Forward differences U(t_{i+1}) - U(t_i) >= -1e-8 (1 + |U(a)|).
inline CheckReport assess_monotone(const FrequencyTrace& tr, const Tolerances& tol = {}) {
  CheckReport r;
  r.name = "monotonicity";
  r.failure_code = ErrorCode::MonotonicityViolation;
  r.tolerance = tol.monotone * (1.0 + std::abs(tr.samples.front().U));
  double worst = std::numeric_limits<double>::infinity();
  std::size_t at = 0;
  for (std::size_t i = 0; i + 1 < tr.samples.size(); ++i) {
    const double d = tr.samples[i + 1].U - tr.samples[i].U;
    if (d < worst) {
      worst = d;
      at = i;
    }
  }
  r.lhs = tr.samples[at + 1].U;
  r.rhs = tr.samples[at].U;
  r.margin = worst + r.tolerance;
  r.passed = r.margin >= 0.0;
  r.detail = "min forward difference " + detail::fmt(worst) + " on [" + detail::fmt(tr.samples[at].t) + ", " +
             detail::fmt(tr.samples[at + 1].t) + "]";
  return r;
}

inline CheckReport check_monotone(const FrequencyTrace& tr, const Tolerances& tol = {}) {
  return enforce(assess_monotone(tr, tol));
}

/// Minimum over samples of (I int |L_f u|^2 - (int u L_f u)^2) / (I int |L_f u|^2); 0 where L_f u = 0.
inline double cauchy_schwarz_gap(const FrequencyTrace& tr) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : tr.samples) {
    const double scale = s.I * s.lf_sq;
    m = std::min(m, scale > 0.0 ? (scale - s.u_lf * s.u_lf) / scale : 0.0);
  }
  return m;
}

/// max over interior samples of |FD I' - 2D/tau|, scaled by 1/(1 + |I|).
inline double I_prime_identity_residual(const FrequencyTrace& tr) {
  double m = 0.0;
  for (std::size_t i = 1; i + 1 < tr.samples.size(); ++i) {
    const auto& s = tr.samples[i];
    m = std::max(m, std::abs(s.I_prime - 2.0 * s.D / s.tau) / (1.0 + std::abs(s.I)));
  }
  return m;
}

/**
 * Relative L2(d nu) distance of L_f u from c u, c = U / (Ecorr tau), at one
 * trace sample. Only meaningful where U is stationary; NotStationary otherwise.
 */
inline double equality_case_residual(const SpectralField& u, const KernelData& kd, const WeightedQuadrature& q,
                                     const FrequencySample& s, const Tolerances& tol = {}) {
  require(std::abs(s.U_prime) <= tol.stationary, ErrorCode::NotStationary,
          "U'(" + detail::fmt(s.t) + ") = " + detail::fmt(s.U_prime));
  const double c = s.U / (s.Ecorr * s.tau);
  const std::vector<double> lf = drift_apply(kd, u, q.nodes);
  const std::vector<double> v = synthesize(u, q.nodes);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = lf[i] - c * v[i];
    num += q.weights[i] * r * r;
    den += q.weights[i] * v[i] * v[i];
  }
  require(den > tol.zero_solution, ErrorCode::ZeroSolution, "u vanishes");
  return std::sqrt(num / den);
}

/// |int |Hess u|^2 d nu - int (|L_f u|^2 - Ric_f(grad u, grad u)) d nu|
inline double hessian_identity_residual(const SpectralField& u, const KernelData& kd, const WeightedQuadrature& q) {
  const SliceIntegrals s = integrate_slice(u, kd, q);
  return std::abs(s.hess_sq - (s.lf_sq - s.ricf));
}

/// max over interior samples of |FD (log I)' - 2 U / (Ecorr tau)|.
inline double log_I_identity_residual(const FrequencyTrace& tr) {
  double m = 0.0;
  for (std::size_t i = 1; i + 1 < tr.samples.size(); ++i) {
    const auto& s = tr.samples[i];
    m = std::max(m, std::abs(s.logI_prime - 2.0 * s.U / (s.Ecorr * s.tau)));
  }
  return m;
}

/// int_a^b Ecorr^-1 tau^-1 dt on the trace grid.
inline double inverse_correction_integral(const FrequencyTrace& tr) {
  std::vector<double> f;
  for (const auto& s : tr.samples) f.push_back(1.0 / (s.Ecorr * s.tau));
  return simpson(f, tr.grid_step);
}

/// I(b) >= I(a) exp(2 U(a) int_a^b Ecorr^-1 tau^-1 dt) (1 - 1e-6).
inline CheckReport assess_backwards_bound(const FrequencyTrace& tr, const Tolerances& tol = {}) {
  const auto& first = tr.samples.front();
  const auto& last = tr.samples.back();
  CheckReport r;
  r.name = "backwards-uniqueness";
  r.failure_code = ErrorCode::BoundViolation;
  r.lhs = last.I;
  r.rhs = first.I * std::exp(2.0 * first.U * inverse_correction_integral(tr));
  r.tolerance = tol.backwards * r.rhs;
  r.margin = r.lhs - r.rhs + r.tolerance;
  r.passed = r.margin >= 0.0;
  r.detail = "I(b) = " + detail::fmt(r.lhs) + ", bound = " + detail::fmt(r.rhs);
  return r;
}

inline CheckReport backwards_bound_check(const FrequencyTrace& tr, const Tolerances& tol = {}) {
  return enforce(assess_backwards_bound(tr, tol));
}

/**
 * The three derivative bounds for |(d_t - Delta) u| <= C (|grad u| + |u|),
 * at every interior sample with slack 1e-5 (1 + |U| + tau(a)):
 *   (1) (log I)' >= (2 + C) U / (Ecorr tau) - 3C
 *   (2) U' >= C^2 (U - tau)
 *   (3) C^2 >= (log(tau(a) - U))'
 * C defaults to the one recorded in the trace.
 */
inline CheckReport assess_general_bounds(const FrequencyTrace& tr, const Tolerances& tol = {},
                                         const std::function<double(double)>& C = {}) {
  CheckReport r;
  r.name = "perturbed-bounds";
  r.failure_code = ErrorCode::BoundViolation;
  r.margin = std::numeric_limits<double>::infinity();
  const double tau_a = tr.tau_a();
  for (std::size_t i = 1; i + 1 < tr.samples.size(); ++i) {
    const auto& s = tr.samples[i];
    const double c = C ? C(s.t) : s.C;
    const double slack = tol.general_bounds * (1.0 + std::abs(s.U) + tau_a);
    const double lhs[3] = {s.logI_prime, s.U_prime, c * c};
    const double rhs[3] = {(2.0 + c) * s.U / (s.Ecorr * s.tau) - 3.0 * c, c * c * (s.U - s.tau),
                           -s.U_prime / (tau_a - s.U)};
    for (int k = 0; k < 3; ++k) {
      const double m = lhs[k] - rhs[k] + slack;
      if (m < r.margin) {
        r.margin = m;
        r.lhs = lhs[k];
        r.rhs = rhs[k];
        r.tolerance = slack;
        r.detail = "inequality " + std::to_string(k + 1) + " at sample " + std::to_string(i) + " (t = " +
                   detail::fmt(s.t) + ")";
      }
    }
  }
  r.passed = r.margin >= 0.0;
  return r;
}

inline CheckReport general_bounds_check(const FrequencyTrace& tr, const Tolerances& tol = {},
                                        const std::function<double(double)>& C = {}) {
  return enforce(assess_general_bounds(tr, tol, C));
}

/// Right-hand side of the integrated bound on I(b).
inline double corollary_rhs(double I_a, double U_a, double tau_a, double sup_C, double int_C2,
                            double inv_corr_integral, double window_length) {
  const double lowest_U = (U_a - tau_a) * std::exp(int_C2) + tau_a;
  return I_a * std::exp((2.0 + sup_C) * lowest_U * inv_corr_integral - 3.0 * window_length * sup_C);
}

inline CheckReport assess_corollary_bound(const FrequencyTrace& tr, const Tolerances& tol = {},
                                          const std::function<double(double)>& C = {}) {
  double sup_C = 0.0;
  std::vector<double> c2;
  for (const auto& s : tr.samples) {
    const double c = C ? C(s.t) : s.C;
    sup_C = std::max(sup_C, std::abs(c));
    c2.push_back(c * c);
  }
  const auto& first = tr.samples.front();
  CheckReport r;
  r.name = "corollary-bound";
  r.failure_code = ErrorCode::BoundViolation;
  r.lhs = tr.samples.back().I;
  r.rhs = corollary_rhs(first.I, first.U, first.tau, sup_C, simpson(c2, tr.grid_step),
                        inverse_correction_integral(tr), tr.window.length());
  r.tolerance = tol.corollary * r.rhs;
  r.margin = r.lhs - r.rhs + r.tolerance;
  r.passed = r.margin >= 0.0;
  r.detail = "sup C = " + detail::fmt(sup_C) + ", I(b) = " + detail::fmt(r.lhs) + ", bound = " + detail::fmt(r.rhs);
  return r;
}

inline CheckReport corollary_bound_check(const FrequencyTrace& tr, const Tolerances& tol = {},
                                         const std::function<double(double)>& C = {}) {
  return enforce(assess_corollary_bound(tr, tol, C));
}

}  // namespace parafreq
