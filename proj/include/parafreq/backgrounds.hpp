#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "parafreq/error.hpp"

namespace parafreq {

/// A point in the reference coordinates of a background. The Gaussian soliton
/// uses all `dim` Cartesian components, the circle uses x[0] as arc length,
/// and zonal sphere nodes store cos(theta) in x[0].
using Point = std::array<double, 3>;

enum class BackgroundKind { GaussianSoliton, FlatCircle, ShrinkingSphere };

inline constexpr std::string_view to_string(BackgroundKind kind) noexcept {
  switch (kind) {
    case BackgroundKind::GaussianSoliton: return "gaussian";
    case BackgroundKind::FlatCircle: return "circle";
    case BackgroundKind::ShrinkingSphere: return "sphere";
  }
  return "unknown";
}

/// One of three Ricci flows with closed-form metric and curvature, together
/// with the space-time point (center, t1) at which the conjugate heat kernel
/// concentrates.
///
/// GaussianSoliton: flat R^n (n = 1..3), static metric.
/// FlatCircle: R / L Z, static flat metric.
/// ShrinkingSphere: g(t) = (c0 - 2t) g_round on S^2, extinct at t = c0 / 2.
class FlowBackground {
 public:
  static FlowBackground gaussian_soliton(int dim, double t1, Point center = {}) {
    require(dim >= 1 && dim <= 3, ErrorCode::InvalidArgument,
            "gaussian soliton dimension must be 1..3, got " + std::to_string(dim));
    FlowBackground bg;
    bg.kind_ = BackgroundKind::GaussianSoliton;
    bg.dim_ = dim;
    bg.t1_ = t1;
    bg.center_ = center;
    for (int i = dim; i < 3; ++i) bg.center_[i] = 0.0;
    return bg;
  }

  static FlowBackground flat_circle(double length, double t1, double center = 0.0) {
    require(length > 0.0 && std::isfinite(length), ErrorCode::InvalidArgument,
            "circle length must be positive");
    FlowBackground bg;
    bg.kind_ = BackgroundKind::FlatCircle;
    bg.dim_ = 1;
    bg.t1_ = t1;
    bg.center_ = {center, 0.0, 0.0};
    bg.length_ = length;
    return bg;
  }

  static FlowBackground shrinking_sphere(double c0, double t1) {
    require(c0 > 0.0, ErrorCode::InvalidArgument, "sphere initial scale must be positive");
    require(t1 < 0.5 * c0, ErrorCode::InvalidArgument,
            "sphere kernel time t1 must precede extinction at c0/2");
    FlowBackground bg;
    bg.kind_ = BackgroundKind::ShrinkingSphere;
    bg.dim_ = 2;
    bg.t1_ = t1;
    bg.initial_scale_ = c0;
    return bg;
  }

  BackgroundKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  double t1() const noexcept { return t1_; }
  const Point& center() const noexcept { return center_; }
  double circle_length() const noexcept { return length_; }
  double initial_scale() const noexcept { return initial_scale_; }

  bool is(BackgroundKind k) const noexcept { return kind_ == k; }

 private:
  FlowBackground() = default;

  BackgroundKind kind_ = BackgroundKind::GaussianSoliton;
  int dim_ = 1;
  double t1_ = 0.0;
  Point center_{};
  double length_ = 2.0 * std::numbers::pi;
  double initial_scale_ = 1.0;
};

struct GeometrySnapshot {
  double t;
  double tau;
  double scale;             // conformal factor against the reference metric
  double scalar_curvature;  // spatially constant on all three backgrounds
};

inline GeometrySnapshot geometry(const FlowBackground& bg, double t) {
  const double tau = bg.t1() - t;
  require(tau > 0.0, ErrorCode::TimeOutOfWindow,
          "t = " + std::to_string(t) + " is not before t1 = " + std::to_string(bg.t1()));
  if (bg.is(BackgroundKind::ShrinkingSphere)) {
    const double c = bg.initial_scale() - 2.0 * t;
    require(c > 0.0, ErrorCode::TimeOutOfWindow, "sphere is extinct at t = " + std::to_string(t));
    return {t, tau, c, 2.0 / c};
  }
  return {t, tau, 1.0, 0.0};
}

/// Eigenvalue of the Laplace-Beltrami operator of g(t) on the mode-th
/// Fourier pair (circle) or zonal harmonic P_l (sphere).
inline double laplace_eigenvalue(const FlowBackground& bg, int mode, double t) {
  require(mode >= 0, ErrorCode::InvalidArgument, "mode must be nonnegative");
  const GeometrySnapshot g = geometry(bg, t);
  switch (bg.kind()) {
    case BackgroundKind::FlatCircle: {
      const double xi = 2.0 * std::numbers::pi * mode / bg.circle_length();
      return -xi * xi;
    }
    case BackgroundKind::ShrinkingSphere:
      return -static_cast<double>(mode) * (mode + 1) / g.scale;
    case BackgroundKind::GaussianSoliton:
      break;
  }
  fail(ErrorCode::UnsupportedBackground, "the Gaussian soliton Laplacian has continuous spectrum");
}

}  // namespace parafreq
