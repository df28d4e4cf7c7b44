#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "parafreq/backgrounds.hpp"
#include "parafreq/error.hpp"
#include "parafreq/polynomial.hpp"
#include "parafreq/spectral.hpp"

namespace parafreq {

inline constexpr int max_caloric_degree = 12;

/// Time-dependent amplitude of a perturbation coefficient, with closed-form antiderivative.
class TimeCoefficient {
 public:
  enum class Shape { Constant, Sine, Cosine };

  TimeCoefficient() = default;
  TimeCoefficient(double amplitude, Shape shape) : amp_(amplitude), shape_(shape) {}

  static TimeCoefficient constant(double a) { return {a, Shape::Constant}; }
  static TimeCoefficient sine(double a) { return {a, Shape::Sine}; }
  static TimeCoefficient cosine(double a) { return {a, Shape::Cosine}; }

  double amplitude() const noexcept { return amp_; }
  Shape shape() const noexcept { return shape_; }

  double operator()(double t) const {
    switch (shape_) {
      case Shape::Constant: return amp_;
      case Shape::Sine: return amp_ * std::sin(t);
      case Shape::Cosine: return amp_ * std::cos(t);
    }
    return 0.0;
  }

  /// int_a^t of the coefficient.
  double integral(double a, double t) const {
    switch (shape_) {
      case Shape::Constant: return amp_ * (t - a);
      case Shape::Sine: return amp_ * (std::cos(a) - std::cos(t));
      case Shape::Cosine: return amp_ * (std::sin(t) - std::sin(a));
    }
    return 0.0;
  }

 private:
  double amp_ = 0.0;
  Shape shape_ = Shape::Constant;
};

struct TimeWindow {
  double a;
  double b;
  double length() const noexcept { return b - a; }
};

/// One tensor-product heat polynomial, scaled.
struct CaloricTerm {
  double coeff = 1.0;
  std::array<int, 3> degrees{};
  int total_degree() const noexcept { return degrees[0] + degrees[1] + degrees[2]; }
};

/// Coefficients of the 1-D heat polynomial v_k(y, s) = sum_j k!/(j!(k-2j)!) y^(k-2j) s^j in powers of y.
inline std::vector<double> heat_polynomial_coeffs(int k, double s) {
  require(k >= 0 && k <= max_caloric_degree, ErrorCode::DegreeTooLarge,
          "heat polynomial degree " + std::to_string(k) + " exceeds " + std::to_string(max_caloric_degree));
  std::vector<double> c(k + 1, 0.0);
  double fact_k = 1.0;
  for (int i = 2; i <= k; ++i) fact_k *= i;
  for (int j = 0; 2 * j <= k; ++j) {
    double denom = 1.0;
    for (int i = 2; i <= j; ++i) denom *= i;
    for (int i = 2; i <= k - 2 * j; ++i) denom *= i;
    c[k - 2 * j] = fact_k / denom * std::pow(s, j);
  }
  return c;
}

/**
 * A solution of the (possibly perturbed) heat equation along a background,
 * evaluated exactly at any time. Caloric solutions are centered at the
 * kernel point, i.e. built from heat polynomials in (x - center, t - t1).
 */
class HeatSolution {
 public:
  enum class Generator { Caloric, ModeEvolution, Perturbed };

  const FlowBackground& background() const noexcept { return bg_; }
  const TimeWindow& window() const noexcept { return window_; }
  Generator generator() const noexcept { return gen_; }
  const std::vector<CaloricTerm>& caloric_terms() const noexcept { return terms_; }
  const TimeCoefficient& alpha() const noexcept { return alpha_; }
  const TimeCoefficient& beta() const noexcept { return beta_; }
  bool is_exact_heat() const noexcept { return gen_ != Generator::Perturbed || (alpha_.amplitude() == 0.0 && beta_.amplitude() == 0.0); }

  /// Hypothesis constant: |(d_t - Delta) u| <= C(t) (|grad u| + |u|).
  double C(double t) const { return std::max(std::abs(alpha_(t)), std::abs(beta_(t))); }

  SpectralField field_at(double t) const {
    geometry(bg_, t);
    switch (gen_) {
      case Generator::Caloric: return caloric_at(t);
      case Generator::ModeEvolution: return modes_at(t);
      case Generator::Perturbed: return perturbed_at(t);
    }
    fail(ErrorCode::InvalidArgument, "unknown generator");
  }

  friend HeatSolution caloric_mixture(const FlowBackground&, std::vector<CaloricTerm>, TimeWindow);
  friend HeatSolution solve_heat(const FlowBackground&, const SpectralField&, TimeWindow);
  friend HeatSolution solve_perturbed(const FlowBackground&, const SpectralField&, TimeCoefficient,
                                      TimeCoefficient, TimeWindow);

 private:
  HeatSolution(const FlowBackground& bg, TimeWindow w, Generator g) : bg_(bg), window_(w), gen_(g) {}

  SpectralField caloric_at(double t) const {
    const int n = bg_.dim();
    const double s = t - bg_.t1();
    Polynomial total(n);
    for (const CaloricTerm& term : terms_) {
      Polynomial p = Polynomial::constant(n, term.coeff);
      for (int a = 0; a < n; ++a)
        p = p * Polynomial::univariate(n, a, heat_polynomial_coeffs(term.degrees[a], s), bg_.center()[a]);
      total += p;
    }
    return SpectralField::polynomial(bg_, std::move(total));
  }

  SpectralField modes_at(double t) const {
    const double dt = t - window_.a;
    if (bg_.is(BackgroundKind::FlatCircle)) {
      FourierCoeffs c = initial_->fourier_coeffs();
      for (std::size_t k = 0; k < c.cos.size(); ++k) {
        const double xi = detail::wavenumber(bg_, k);
        const double g = std::exp(-xi * xi * dt);
        c.cos[k] *= g;
        c.sin[k] *= g;
      }
      return SpectralField::fourier(bg_, c.cos, c.sin);
    }
    // int_a^t ds / c(s) = (1/2) ln(c(a) / c(t))
    const double half_log = 0.5 * std::log(geometry(bg_, window_.a).scale / geometry(bg_, t).scale);
    std::vector<double> c = initial_->legendre_coeffs().coeffs;
    for (std::size_t l = 0; l < c.size(); ++l)
      c[l] *= std::exp(-static_cast<double>(l) * (l + 1) * half_log);
    return SpectralField::legendre(bg_, std::move(c));
  }

  SpectralField perturbed_at(double t) const {
    const FourierCoeffs& c0 = initial_->fourier_coeffs();
    const double dt = t - window_.a;
    const double A = alpha_.integral(window_.a, t);
    const double B = beta_.integral(window_.a, t);
    std::vector<double> cs(c0.cos.size()), sn(c0.cos.size());
    for (std::size_t k = 0; k < c0.cos.size(); ++k) {
      const double xi = detail::wavenumber(bg_, k);
      const std::complex<double> z0(c0.cos[k], k == 0 ? 0.0 : -c0.sin[k]);
      const std::complex<double> z = z0 * std::exp(std::complex<double>(-xi * xi * dt + B, xi * A));
      cs[k] = z.real();
      sn[k] = k == 0 ? 0.0 : -z.imag();
    }
    return SpectralField::fourier(bg_, cs, sn);
  }

  FlowBackground bg_;
  TimeWindow window_;
  Generator gen_;
  std::vector<CaloricTerm> terms_;
  std::optional<SpectralField> initial_;
  TimeCoefficient alpha_;
  TimeCoefficient beta_;
};

namespace detail {
inline void check_window(const FlowBackground& bg, TimeWindow w) {
  require(w.a < w.b, ErrorCode::InvalidArgument, "window must satisfy a < b");
  require(w.b < bg.t1(), ErrorCode::TimeOutOfWindow, "window must end before t1");
  geometry(bg, w.a);
}
}  // namespace detail

inline HeatSolution caloric_mixture(const FlowBackground& bg, std::vector<CaloricTerm> terms,
                                    TimeWindow window) {
  require(bg.is(BackgroundKind::GaussianSoliton), ErrorCode::UnsupportedBackground,
          "caloric polynomials live on the Gaussian soliton");
  detail::check_window(bg, window);
  for (const CaloricTerm& t : terms) {
    for (int a = bg.dim(); a < 3; ++a)
      require(t.degrees[a] == 0, ErrorCode::InvalidArgument, "degree given for an axis beyond the dimension");
    require(t.total_degree() <= max_caloric_degree, ErrorCode::DegreeTooLarge,
            "caloric total degree " + std::to_string(t.total_degree()) + " exceeds " +
                std::to_string(max_caloric_degree));
  }
  HeatSolution sol(bg, window, HeatSolution::Generator::Caloric);
  sol.terms_ = std::move(terms);
  return sol;
}

/// Tensor product of 1-D heat polynomials with the given per-axis degrees.
inline HeatSolution caloric_polynomial(const FlowBackground& bg, std::span<const int> degrees,
                                       TimeWindow window) {
  require(static_cast<int>(degrees.size()) == bg.dim(), ErrorCode::InvalidArgument,
          "need one degree per axis");
  CaloricTerm term;
  for (std::size_t a = 0; a < degrees.size(); ++a) {
    require(degrees[a] >= 0, ErrorCode::InvalidArgument, "degrees must be nonnegative");
    require(degrees[a] <= max_caloric_degree, ErrorCode::DegreeTooLarge,
            "degree " + std::to_string(degrees[a]) + " exceeds " + std::to_string(max_caloric_degree));
    term.degrees[a] = degrees[a];
  }
  return caloric_mixture(bg, {term}, window);
}

inline HeatSolution caloric_polynomial(const FlowBackground& bg, std::initializer_list<int> degrees,
                                       TimeWindow window) {
  return caloric_polynomial(bg, std::span<const int>(degrees.begin(), degrees.size()), window);
}

/// Exact per-mode heat propagation of u0 (given at window.a) on the circle or sphere.
inline HeatSolution solve_heat(const FlowBackground& bg, const SpectralField& u0, TimeWindow window) {
  require(!bg.is(BackgroundKind::GaussianSoliton), ErrorCode::UnsupportedBackground,
          "use caloric polynomials on the Gaussian soliton");
  require(u0.background().kind() == bg.kind(), ErrorCode::ReprMismatch, "initial data on another background");
  detail::check_window(bg, window);
  HeatSolution sol(bg, window, HeatSolution::Generator::ModeEvolution);
  sol.initial_ = u0;
  return sol;
}

/// d_t u = u'' + alpha(t) u' + beta(t) u on the circle, exact per Fourier mode.
inline HeatSolution solve_perturbed(const FlowBackground& bg, const SpectralField& u0, TimeCoefficient alpha,
                                    TimeCoefficient beta, TimeWindow window) {
  require(bg.is(BackgroundKind::FlatCircle), ErrorCode::UnsupportedBackground,
          "perturbed operators are realized on the circle only");
  require(u0.background().kind() == bg.kind(), ErrorCode::ReprMismatch, "initial data on another background");
  detail::check_window(bg, window);
  HeatSolution sol(bg, window, HeatSolution::Generator::Perturbed);
  sol.initial_ = u0;
  sol.alpha_ = alpha;
  sol.beta_ = beta;
  return sol;
}

/// Central-difference step used for all time derivatives of solutions.
inline double fd_step(const TimeWindow& w) { return 1e-5 * w.length(); }

/// (d_t - Delta) u at the nodes, d_t by central differences.
inline std::vector<double> heat_operator_residual(const HeatSolution& sol, double t,
                                                  std::span<const Point> nodes) {
  const double h = fd_step(sol.window());
  const auto up = synthesize(sol.field_at(t + h), nodes);
  const auto um = synthesize(sol.field_at(t - h), nodes);
  const auto lap = synthesize(laplacian(sol.field_at(t), t), nodes);
  std::vector<double> r(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) r[i] = (up[i] - um[i]) / (2.0 * h) - lap[i];
  return r;
}

/// max over nodes of |(d_t - Delta) u| - C(t) (|grad u| + |u|); <= 0 when the hypothesis holds.
inline double hypothesis_excess(const HeatSolution& sol, double t, std::span<const Point> nodes) {
  const auto r = heat_operator_residual(sol, t, nodes);
  const auto uj = jets(sol.field_at(t), t, nodes);
  const double C = sol.C(t);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double g = std::sqrt(uj[i].grad[0] * uj[i].grad[0] + uj[i].grad[1] * uj[i].grad[1] +
                               uj[i].grad[2] * uj[i].grad[2]);
    worst = std::max(worst, std::abs(r[i]) - C * (g + std::abs(uj[i].value)));
  }
  return worst;
}

// Seeded generators for property suites.

inline SpectralField random_band_limited(const FlowBackground& bg, int max_mode, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> cs(max_mode + 1), sn(max_mode + 1);
  for (int k = 0; k <= max_mode; ++k) {
    cs[k] = U(rng);
    sn[k] = k == 0 ? 0.0 : U(rng);
  }
  return SpectralField::fourier(bg, cs, sn);
}

inline SpectralField random_zonal(const FlowBackground& bg, int max_mode, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> c(max_mode + 1);
  for (double& x : c) x = U(rng);
  return SpectralField::legendre(bg, std::move(c));
}

/// Random combination of `count` caloric terms with total degree <= max_degree.
inline std::vector<CaloricTerm> random_caloric_terms(int dim, int max_degree, int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_int_distribution<int> D(0, max_degree);
  std::vector<CaloricTerm> terms;
  while (static_cast<int>(terms.size()) < count) {
    CaloricTerm t;
    t.coeff = U(rng);
    int budget = D(rng);
    for (int a = 0; a < dim; ++a) {
      std::uniform_int_distribution<int> split(0, budget);
      t.degrees[a] = (a + 1 == dim) ? budget : split(rng);
      budget -= t.degrees[a];
    }
    terms.push_back(t);
  }
  return terms;
}

}  // namespace parafreq
