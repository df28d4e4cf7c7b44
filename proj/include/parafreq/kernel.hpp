#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "parafreq/backgrounds.hpp"
#include "parafreq/error.hpp"
#include "parafreq/quadrature_rules.hpp"
#include "parafreq/spectral.hpp"

namespace parafreq {

using Mat3 = std::array<std::array<double, 3>, 3>;

struct KernelOptions {
  /// Largest Legendre mode kept in the zonal sphere kernel.
  int sphere_modes = 48;
  /// Heat-smoothing time of the initial delta on the sphere; <= 0 picks 1e-3 * tau(t).
  double sphere_eps = 0.0;
  /// Gauss-Legendre nodes at which sphere positivity is verified.
  int sphere_check_nodes = 64;
  /// Guard: kernel requests need tau >= min_tau.
  double min_tau = 1e-3;
};

/// K, f and the frame derivatives of f at one node.
struct KernelJet {
  double K = 0.0;
  double f = 0.0;
  std::array<double, 3> grad_f{};
  Mat3 hess_f{};
};

/**
 * The conjugate heat kernel K = (4 pi tau)^(-n/2) exp(-f) centered at
 * (center, t1), at one time t. On the circle f is evaluated in log space so
 * that its derivatives stay accurate where K underflows.
 */
class KernelData {
 public:
  const FlowBackground& background() const noexcept { return bg_; }
  double t() const noexcept { return geo_.t; }
  double tau() const noexcept { return geo_.tau; }
  const GeometrySnapshot& geometry_snapshot() const noexcept { return geo_; }
  double smoothing_eps() const noexcept { return eps_; }
  int dim() const noexcept { return bg_.dim(); }

  /// Legendre (sphere) or Fourier (circle) coefficients of K.
  const std::optional<SpectralField>& spectral_K() const noexcept { return spectral_; }

  /// Ricci tensor of g(t) in the orthonormal frame; spatially constant here.
  Mat3 ricci() const noexcept {
    Mat3 r{};
    if (bg_.is(BackgroundKind::ShrinkingSphere)) r[0][0] = r[1][1] = 1.0 / geo_.scale;
    return r;
  }

  KernelJet jet(const Point& x) const {
    switch (bg_.kind()) {
      case BackgroundKind::GaussianSoliton: return gaussian_jet(x);
      case BackgroundKind::FlatCircle: return circle_jet(x);
      case BackgroundKind::ShrinkingSphere: return sphere_jet(x);
    }
    return {};
  }

  double K(const Point& x) const { return jet(x).K; }
  double f(const Point& x) const { return jet(x).f; }
  std::array<double, 3> grad_f(const Point& x) const { return jet(x).grad_f; }
  Mat3 hess_f(const Point& x) const { return jet(x).hess_f; }

  /// Wrapped-Gaussian image count used on the circle.
  int image_count() const noexcept { return images_; }

  friend KernelData kernel_at(const FlowBackground& bg, double t, const KernelOptions& opts);

 private:
  explicit KernelData(const FlowBackground& bg) : bg_(bg) {}

  KernelJet gaussian_jet(const Point& x) const {
    const int n = bg_.dim();
    const double tau = geo_.tau;
    KernelJet j;
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = x[i] - bg_.center()[i];
      r2 += d * d;
      j.grad_f[i] = d / (2.0 * tau);
      j.hess_f[i][i] = 1.0 / (2.0 * tau);
    }
    j.f = r2 / (4.0 * tau);
    j.K = std::pow(4.0 * std::numbers::pi * tau, -0.5 * n) * std::exp(-j.f);
    return j;
  }

  KernelJet circle_jet(const Point& x) const {
    const double L = bg_.circle_length();
    const double tau = geo_.tau;
    double d = std::remainder(x[0] - bg_.center()[0], L);
    double zmax = -std::numeric_limits<double>::infinity();
    for (int m = -images_; m <= images_; ++m) {
      const double s = d + m * L;
      zmax = std::max(zmax, -s * s / (4.0 * tau));
    }
    double sum = 0.0, m1 = 0.0, m2 = 0.0;
    for (int m = -images_; m <= images_; ++m) {
      const double s = d + m * L;
      const double w = std::exp(-s * s / (4.0 * tau) - zmax);
      const double y = s / (2.0 * tau);
      sum += w;
      m1 += w * y;
      m2 += w * y * y;
    }
    m1 /= sum;
    m2 /= sum;
    KernelJet j;
    j.f = -(zmax + std::log(sum));
    j.grad_f[0] = m1;
    j.hess_f[0][0] = 1.0 / (2.0 * tau) - (m2 - m1 * m1);
    j.K = std::exp(-j.f) / std::sqrt(4.0 * std::numbers::pi * tau);
    return j;
  }

  KernelJet sphere_jet(const Point& x) const {
    const double mu = x[0];
    const double c = geo_.scale;
    std::vector<detail::LegendreTriple> scratch;
    const auto s = detail::legendre_series(spectral_->legendre_coeffs().coeffs, mu, scratch);
    KernelJet j;
    j.K = s.p;
    j.f = -std::log(s.p) - std::log(4.0 * std::numbers::pi * geo_.tau);
    const double sin2 = std::max(0.0, 1.0 - mu * mu);
    const double f_theta = std::sqrt(sin2) * s.dp / s.p;  // -K_theta / K
    const double K_thth = sin2 * s.ddp - mu * s.dp;
    const double f_thth = -K_thth / s.p + sin2 * (s.dp / s.p) * (s.dp / s.p);
    j.grad_f[0] = f_theta / std::sqrt(c);
    j.hess_f[0][0] = f_thth / c;
    j.hess_f[1][1] = mu * s.dp / s.p / c;  // cot(theta) f_theta / c
    return j;
  }

  FlowBackground bg_;
  GeometrySnapshot geo_{};
  double eps_ = 0.0;
  int images_ = 0;
  std::optional<SpectralField> spectral_;
};

/// Builds the kernel at time t. On the sphere the zonal modes are propagated
/// backwards in closed form from a heat-smoothed delta at t1 - eps and the
/// result is checked for positivity.
inline KernelData kernel_at(const FlowBackground& bg, double t, const KernelOptions& opts = {}) {
  KernelData kd(bg);
  kd.geo_ = geometry(bg, t);
  const double tau = kd.geo_.tau;
  require(tau >= opts.min_tau, ErrorCode::TimeOutOfWindow,
          "tau = " + std::to_string(tau) + " is below the guard " + std::to_string(opts.min_tau));

  switch (bg.kind()) {
    case BackgroundKind::GaussianSoliton:
      break;

    case BackgroundKind::FlatCircle: {
      const double L = bg.circle_length();
      // nearest omitted image sits at distance >= (M + 1/2) L
      const double reach = std::sqrt(4.0 * tau * 36.0);
      kd.images_ = std::max(1, static_cast<int>(std::ceil(reach / L + 0.5)));
      std::vector<double> cs, sn;
      const double x1 = bg.center()[0];
      for (int k = 0; k < 4096; ++k) {
        const double xi = detail::wavenumber(bg, k);
        const double amp = (k == 0 ? 1.0 : 2.0) * std::exp(-xi * xi * tau) / L;
        if (k > 0 && amp < 1e-18) break;
        cs.push_back(amp * std::cos(xi * x1));
        sn.push_back(k == 0 ? 0.0 : amp * std::sin(xi * x1));
      }
      kd.spectral_ = SpectralField::fourier(bg, cs, sn);
      break;
    }

    case BackgroundKind::ShrinkingSphere: {
      const double eps = opts.sphere_eps > 0.0 ? opts.sphere_eps : 1e-3 * tau;
      require(tau > eps, ErrorCode::TimeOutOfWindow,
              "sphere kernel needs t < t1 - eps (eps = " + std::to_string(eps) + ")");
      kd.eps_ = eps;
      const double c_t1 = bg.initial_scale() - 2.0 * bg.t1();
      const double c_ref = bg.initial_scale() - 2.0 * (bg.t1() - eps);
      const double c = kd.geo_.scale;
      const double log_ratio = std::log(c_ref / c);
      std::vector<double> coeffs;
      for (int l = 0; l <= opts.sphere_modes; ++l) {
        const double ll = static_cast<double>(l) * (l + 1);
        const double log_amp = -ll * eps / c_t1 + 0.5 * (ll + 2.0) * log_ratio;
        const double amp = (2.0 * l + 1.0) * std::exp(log_amp) / (4.0 * std::numbers::pi * c_ref);
        if (l > 0 && amp < 1e-17 * coeffs[0]) break;
        coeffs.push_back(amp);
      }
      kd.spectral_ = SpectralField::legendre(bg, std::move(coeffs));

      const GaussRule gl = gauss_legendre(opts.sphere_check_nodes);
      std::vector<double> mus = gl.nodes;
      mus.push_back(-1.0);
      mus.push_back(1.0);
      std::vector<detail::LegendreTriple> scratch;
      for (double mu : mus) {
        const double k = detail::legendre_series(kd.spectral_->legendre_coeffs().coeffs, mu, scratch).p;
        if (!(k > 0.0))
          fail(ErrorCode::KernelNotPositive, "sphere kernel is " + std::to_string(k) + " at cos(theta) = " +
                                                 std::to_string(mu) + "; raise the mode count or eps");
      }
      break;
    }
  }
  return kd;
}

/// Largest eigenvalue of Ric_f = Ric + Hess f (frame matrix, diagonal on the
/// circle and the zonal sphere).
inline double ricf_max_eigenvalue(const KernelData& kd, const KernelJet& j) {
  const Mat3 ric = kd.ricci();
  const int n = kd.dim();
  if (kd.background().is(BackgroundKind::GaussianSoliton)) {
    // Hess f is isotropic here
    return ric[0][0] + j.hess_f[0][0];
  }
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) m = std::max(m, ric[i][i] + j.hess_f[i][i]);
  return m;
}

/// 2 tau sup_nodes lambda_max(Ric_f), before clamping.
inline double kappa_raw(const KernelData& kd, std::span<const Point> nodes) {
  double m = -std::numeric_limits<double>::infinity();
  for (const Point& x : nodes) {
    if (kd.background().is(BackgroundKind::ShrinkingSphere))
      require(1.0 - std::abs(x[0]) > 1e-8, ErrorCode::NodeSingularity,
              "sphere node lies on a pole of the zonal frame");
    m = std::max(m, ricf_max_eigenvalue(kd, kd.jet(x)));
  }
  return 2.0 * kd.tau() * m;
}

/// Bakry-Emery bound Ric_f <= kappa / (2 tau) g over the nodes, clamped below at 1.
inline double kappa(const KernelData& kd, std::span<const Point> nodes) {
  if (kd.background().is(BackgroundKind::GaussianSoliton)) return 1.0;
  return std::max(1.0, kappa_raw(kd, nodes));
}

inline double drift_apply(const KernelData& kd, const Jet& u, const KernelJet& k) {
  double lap = 0.0, dot = 0.0;
  for (int i = 0; i < 3; ++i) {
    lap += u.hess[i][i];
    dot += k.grad_f[i] * u.grad[i];
  }
  (void)kd;
  return lap - dot;
}

/// L_f u = Delta u - <grad f, grad u> at each node.
inline std::vector<double> drift_apply(const KernelData& kd, const SpectralField& u,
                                       std::span<const Point> nodes) {
  require(u.background().kind() == kd.background().kind(), ErrorCode::ReprMismatch,
          "field and kernel live on different backgrounds");
  const std::vector<Jet> uj = jets(u, kd.t(), nodes);
  std::vector<double> out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = drift_apply(kd, uj[i], kd.jet(nodes[i]));
  return out;
}

}  // namespace parafreq
