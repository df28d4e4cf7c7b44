#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

#include "parafreq/backgrounds.hpp"
#include "parafreq/error.hpp"
#include "parafreq/polynomial.hpp"

namespace parafreq {

/// u(x) = sum_k cos_k cos(xi_k x) + sin_k sin(xi_k x), xi_k = 2 pi k / L.
struct FourierCoeffs {
  std::vector<double> cos;
  std::vector<double> sin;  // sin[0] is ignored
};

/// u(theta) = sum_l coeffs[l] P_l(cos theta), theta measured from the kernel center.
struct LegendreCoeffs {
  std::vector<double> coeffs;
};

/// A scalar function on a background, stored in that background's basis.
class SpectralField {
 public:
  using Repr = std::variant<FourierCoeffs, LegendreCoeffs, Polynomial>;

  static SpectralField fourier(const FlowBackground& bg, std::vector<double> cos_coeffs,
                               std::vector<double> sin_coeffs = {}) {
    require(bg.is(BackgroundKind::FlatCircle), ErrorCode::ReprMismatch,
            "Fourier coefficients need the flat circle");
    sin_coeffs.resize(cos_coeffs.size() > sin_coeffs.size() ? cos_coeffs.size() : sin_coeffs.size(),
                      0.0);
    cos_coeffs.resize(sin_coeffs.size(), 0.0);
    return SpectralField(bg, FourierCoeffs{std::move(cos_coeffs), std::move(sin_coeffs)});
  }

  static SpectralField legendre(const FlowBackground& bg, std::vector<double> coeffs) {
    require(bg.is(BackgroundKind::ShrinkingSphere), ErrorCode::ReprMismatch,
            "Legendre coefficients need the shrinking sphere");
    return SpectralField(bg, LegendreCoeffs{std::move(coeffs)});
  }

  static SpectralField polynomial(const FlowBackground& bg, Polynomial p) {
    require(bg.is(BackgroundKind::GaussianSoliton), ErrorCode::ReprMismatch,
            "polynomial fields need the Gaussian soliton");
    require(p.dim() == bg.dim(), ErrorCode::ReprMismatch, "polynomial dimension differs from background");
    return SpectralField(bg, std::move(p));
  }

  const FlowBackground& background() const noexcept { return bg_; }
  const Repr& repr() const noexcept { return repr_; }

  const FourierCoeffs& fourier_coeffs() const { return get<FourierCoeffs>(); }
  const LegendreCoeffs& legendre_coeffs() const { return get<LegendreCoeffs>(); }
  const Polynomial& poly() const { return get<Polynomial>(); }

  /// Highest stored mode (circle/sphere) or total degree (polynomial).
  int truncation() const {
    return std::visit(
        [](const auto& r) -> int {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, FourierCoeffs>)
            return r.cos.empty() ? 0 : static_cast<int>(r.cos.size()) - 1;
          else if constexpr (std::is_same_v<R, LegendreCoeffs>)
            return r.coeffs.empty() ? 0 : static_cast<int>(r.coeffs.size()) - 1;
          else
            return r.degree();
        },
        repr_);
  }

 private:
  SpectralField(const FlowBackground& bg, Repr repr) : bg_(bg), repr_(std::move(repr)) {}

  template <class T>
  const T& get() const {
    const T* p = std::get_if<T>(&repr_);
    require(p != nullptr, ErrorCode::ReprMismatch, "field representation does not match request");
    return *p;
  }

  FlowBackground bg_;
  Repr repr_;
};

/// Value, gradient and Hessian of a scalar at one node, expressed in an
/// orthonormal frame of g(t). Zonal sphere frames are (e_theta, e_phi).
struct Jet {
  double value = 0.0;
  std::array<double, 3> grad{};
  std::array<std::array<double, 3>, 3> hess{};
};

namespace detail {

struct LegendreTriple {
  double p, dp, ddp;
};

/// P_l, P_l', P_l'' at mu for l = 0..n-1, by forward recurrences valid up to the poles.
inline void legendre_table(double mu, std::size_t n, std::vector<LegendreTriple>& out) {
  out.assign(n, {0.0, 0.0, 0.0});
  if (n == 0) return;
  out[0] = {1.0, 0.0, 0.0};
  if (n == 1) return;
  out[1] = {mu, 1.0, 0.0};
  for (std::size_t l = 1; l + 1 < n; ++l) {
    const double dl = static_cast<double>(l);
    out[l + 1].p = ((2.0 * dl + 1.0) * mu * out[l].p - dl * out[l - 1].p) / (dl + 1.0);
    out[l + 1].dp = out[l - 1].dp + (2.0 * dl + 1.0) * out[l].p;
    out[l + 1].ddp = out[l - 1].ddp + (2.0 * dl + 1.0) * out[l].dp;
  }
}

/// Zonal series value and mu-derivatives.
inline LegendreTriple legendre_series(std::span<const double> coeffs, double mu,
                                      std::vector<LegendreTriple>& scratch) {
  legendre_table(mu, coeffs.size(), scratch);
  LegendreTriple s{0.0, 0.0, 0.0};
  for (std::size_t l = 0; l < coeffs.size(); ++l) {
    s.p += coeffs[l] * scratch[l].p;
    s.dp += coeffs[l] * scratch[l].dp;
    s.ddp += coeffs[l] * scratch[l].ddp;
  }
  return s;
}

inline double wavenumber(const FlowBackground& bg, std::size_t k) {
  return 2.0 * std::numbers::pi * static_cast<double>(k) / bg.circle_length();
}

}  // namespace detail

/// Pointwise evaluation of u at the given nodes.
inline std::vector<double> synthesize(const SpectralField& u, std::span<const Point> nodes) {
  std::vector<double> out(nodes.size(), 0.0);
  const FlowBackground& bg = u.background();
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, FourierCoeffs>) {
          for (std::size_t i = 0; i < nodes.size(); ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < r.cos.size(); ++k) {
              const double arg = detail::wavenumber(bg, k) * nodes[i][0];
              s += r.cos[k] * std::cos(arg);
              if (k > 0) s += r.sin[k] * std::sin(arg);
            }
            out[i] = s;
          }
        } else if constexpr (std::is_same_v<R, LegendreCoeffs>) {
          std::vector<detail::LegendreTriple> scratch;
          for (std::size_t i = 0; i < nodes.size(); ++i)
            out[i] = detail::legendre_series(r.coeffs, nodes[i][0], scratch).p;
        } else {
          for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = r(nodes[i]);
        }
      },
      u.repr());
  return out;
}

inline double synthesize(const SpectralField& u, const Point& node) {
  return synthesize(u, std::span<const Point>(&node, 1))[0];
}

/// Jets of u in the orthonormal frame of g(t) at each node.
inline std::vector<Jet> jets(const SpectralField& u, double t, std::span<const Point> nodes) {
  const FlowBackground& bg = u.background();
  const GeometrySnapshot geo = geometry(bg, t);
  std::vector<Jet> out(nodes.size());
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, FourierCoeffs>) {
          for (std::size_t i = 0; i < nodes.size(); ++i) {
            Jet j;
            for (std::size_t k = 0; k < r.cos.size(); ++k) {
              const double xi = detail::wavenumber(bg, k);
              const double c = std::cos(xi * nodes[i][0]);
              const double s = std::sin(xi * nodes[i][0]);
              const double b = k > 0 ? r.sin[k] : 0.0;
              j.value += r.cos[k] * c + b * s;
              j.grad[0] += xi * (-r.cos[k] * s + b * c);
              j.hess[0][0] += -xi * xi * (r.cos[k] * c + b * s);
            }
            out[i] = j;
          }
        } else if constexpr (std::is_same_v<R, LegendreCoeffs>) {
          std::vector<detail::LegendreTriple> scratch;
          const double c = geo.scale;
          for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double mu = nodes[i][0];
            const auto s = detail::legendre_series(r.coeffs, mu, scratch);
            const double sin_theta = std::sqrt(std::max(0.0, 1.0 - mu * mu));
            Jet j;
            j.value = s.p;
            j.grad[0] = -sin_theta * s.dp / std::sqrt(c);
            j.hess[0][0] = ((1.0 - mu * mu) * s.ddp - mu * s.dp) / c;
            j.hess[1][1] = -mu * s.dp / c;
            out[i] = j;
          }
        } else {
          const int n = r.dim();
          std::array<Polynomial, 3> grad{Polynomial(n), Polynomial(n), Polynomial(n)};
          std::array<std::array<Polynomial, 3>, 3> hess{};
          for (int a = 0; a < n; ++a) grad[a] = r.derivative(a);
          for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) hess[a][b] = grad[a].derivative(b);
          Polynomial::PowerTable pw;
          const int deg = r.degree();
          for (std::size_t i = 0; i < nodes.size(); ++i) {
            Polynomial::fill_powers(pw, nodes[i], n, deg);
            Jet j;
            j.value = r(pw);
            for (int a = 0; a < n; ++a) {
              j.grad[a] = grad[a](pw);
              for (int b = a; b < n; ++b) {
                j.hess[a][b] = hess[a][b](pw);
                j.hess[b][a] = j.hess[a][b];
              }
            }
            out[i] = j;
          }
        }
      },
      u.repr());
  return out;
}

/// Delta_{g(t)} u, exact within the stored truncation.
inline SpectralField laplacian(const SpectralField& u, double t) {
  const FlowBackground& bg = u.background();
  const GeometrySnapshot geo = geometry(bg, t);
  return std::visit(
      [&](const auto& r) -> SpectralField {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, FourierCoeffs>) {
          FourierCoeffs out = r;
          for (std::size_t k = 0; k < out.cos.size(); ++k) {
            const double xi = detail::wavenumber(bg, k);
            out.cos[k] *= -xi * xi;
            out.sin[k] *= -xi * xi;
          }
          return SpectralField::fourier(bg, out.cos, out.sin);
        } else if constexpr (std::is_same_v<R, LegendreCoeffs>) {
          std::vector<double> out = r.coeffs;
          for (std::size_t l = 0; l < out.size(); ++l)
            out[l] *= -static_cast<double>(l) * static_cast<double>(l + 1) / geo.scale;
          return SpectralField::legendre(bg, std::move(out));
        } else {
          return SpectralField::polynomial(bg, r.laplacian());
        }
      },
      u.repr());
}

struct Derivatives {
  std::function<double(const Point&)> grad_sq;  // |grad u|^2 in g(t)
  SpectralField laplacian;
};

inline Derivatives differentiate(const SpectralField& u, double t) {
  auto grad_sq = [u, t](const Point& x) {
    const Jet j = jets(u, t, std::span<const Point>(&x, 1))[0];
    return j.grad[0] * j.grad[0] + j.grad[1] * j.grad[1] + j.grad[2] * j.grad[2];
  };
  return {grad_sq, laplacian(u, t)};
}

/// Fourier coefficients up to max_mode from samples on the uniform grid
/// x_j = j L / N, j = 0..N-1 (N > 2 max_mode).
inline SpectralField analyze_fourier(const FlowBackground& bg, std::span<const double> values,
                                     int max_mode) {
  const std::size_t n = values.size();
  require(n > static_cast<std::size_t>(2 * max_mode), ErrorCode::InvalidArgument,
          "too few samples for the requested Fourier truncation");
  std::vector<double> cs(max_mode + 1, 0.0), sn(max_mode + 1, 0.0);
  const double dx = bg.circle_length() / static_cast<double>(n);
  for (int k = 0; k <= max_mode; ++k) {
    const double xi = detail::wavenumber(bg, k);
    double a = 0.0, b = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      a += values[j] * std::cos(xi * dx * j);
      b += values[j] * std::sin(xi * dx * j);
    }
    const double norm = (k == 0 || 2 * k == static_cast<int>(n)) ? 1.0 / n : 2.0 / n;
    cs[k] = a * norm;
    sn[k] = k == 0 ? 0.0 : b * norm;
  }
  return SpectralField::fourier(bg, cs, sn);
}

/// Legendre coefficients up to max_mode from values at Gauss-Legendre nodes
/// mu_i with weights w_i (exact when 2 max_mode < 2 * nodes.size()).
inline SpectralField analyze_legendre(const FlowBackground& bg, std::span<const double> mu,
                                      std::span<const double> gl_weights,
                                      std::span<const double> values, int max_mode) {
  require(mu.size() == values.size() && gl_weights.size() == values.size(),
          ErrorCode::InvalidArgument, "node/value count mismatch");
  std::vector<double> coeffs(max_mode + 1, 0.0);
  std::vector<detail::LegendreTriple> scratch;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    detail::legendre_table(mu[i], coeffs.size(), scratch);
    for (std::size_t l = 0; l < coeffs.size(); ++l)
      coeffs[l] += gl_weights[i] * values[i] * scratch[l].p;
  }
  for (std::size_t l = 0; l < coeffs.size(); ++l) coeffs[l] *= (2.0 * l + 1.0) / 2.0;
  return SpectralField::legendre(bg, std::move(coeffs));
}

}  // namespace parafreq
