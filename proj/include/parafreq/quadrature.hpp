#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "parafreq/backgrounds.hpp"
#include "parafreq/kernel.hpp"
#include "parafreq/quadrature_rules.hpp"
#include "parafreq/spectral.hpp"

namespace parafreq {

/// Nodes and weights evaluating integrals against d nu = K dV at time t.
struct WeightedQuadrature {
  double t = 0.0;
  int order = 0;
  int dim = 1;
  std::vector<Point> nodes;
  std::vector<double> weights;

  double integrate(std::span<const double> values) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * values[i];
    return s;
  }

  double total_mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

namespace defaults {
inline constexpr int gauss_hermite_order = 40;
inline constexpr int circle_nodes = 256;
inline constexpr int sphere_nodes = 64;

inline int quadrature_order(const FlowBackground& bg) {
  switch (bg.kind()) {
    case BackgroundKind::GaussianSoliton: return gauss_hermite_order;
    case BackgroundKind::FlatCircle: return circle_nodes;
    case BackgroundKind::ShrinkingSphere: return sphere_nodes;
  }
  return gauss_hermite_order;
}
}  // namespace defaults

/**
 * Gaussian soliton: tensor Gauss-Hermite with x = center + sqrt(4 tau) y,
 * exact against d nu for polynomials of degree <= 2 order - 1 per axis.
 * Circle: `order` uniform nodes starting at the center, weights K dx.
 * Sphere: `order` Gauss-Legendre nodes in cos(theta), weights 2 pi c K w.
 */
inline WeightedQuadrature build_quadrature(const KernelData& kd, int order) {
  require(order >= 4, ErrorCode::InvalidArgument, "quadrature order must be at least 4");
  const FlowBackground& bg = kd.background();
  WeightedQuadrature q;
  q.t = kd.t();
  q.order = order;
  q.dim = bg.dim();

  switch (bg.kind()) {
    case BackgroundKind::GaussianSoliton: {
      const GaussRule gh = gauss_hermite(order);
      const int n = bg.dim();
      const double s = std::sqrt(4.0 * kd.tau());
      const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
      std::size_t total = 1;
      for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(order);
      q.nodes.reserve(total);
      q.weights.reserve(total);
      for (std::size_t idx = 0; idx < total; ++idx) {
        Point x{};
        double w = 1.0;
        std::size_t rem = idx;
        for (int a = 0; a < n; ++a) {
          const std::size_t k = rem % order;
          rem /= order;
          x[a] = bg.center()[a] + s * gh.nodes[k];
          w *= gh.weights[k] * inv_sqrt_pi;
        }
        q.nodes.push_back(x);
        q.weights.push_back(w);
      }
      break;
    }
    case BackgroundKind::FlatCircle: {
      const double L = bg.circle_length();
      const double dx = L / order;
      for (int j = 0; j < order; ++j) {
        const Point x{bg.center()[0] + j * dx, 0.0, 0.0};
        q.nodes.push_back(x);
        q.weights.push_back(kd.K(x) * dx);
      }
      break;
    }
    case BackgroundKind::ShrinkingSphere: {
      const GaussRule gl = gauss_legendre(order);
      const double area = 2.0 * std::numbers::pi * kd.geometry_snapshot().scale;
      for (int i = 0; i < order; ++i) {
        const Point x{gl.nodes[i], 0.0, 0.0};
        q.nodes.push_back(x);
        q.weights.push_back(kd.K(x) * area * gl.weights[i]);
      }
      break;
    }
  }

  for (std::size_t i = 0; i < q.weights.size(); ++i)
    if (!(q.weights[i] > 0.0))
      fail(ErrorCode::KernelNotPositive, "quadrature weight " + std::to_string(i) + " is not positive");
  return q;
}

inline WeightedQuadrature build_quadrature(const FlowBackground& bg, double t, int order,
                                           const KernelOptions& opts = {}) {
  return build_quadrature(kernel_at(bg, t, opts), order);
}

inline double kappa(const KernelData& kd, const WeightedQuadrature& q) { return kappa(kd, q.nodes); }

/// |int (L_f u) v d nu + int <grad u, grad v> d nu|
inline double self_adjointness_residual(const KernelData& kd, const SpectralField& u,
                                        const SpectralField& v, const WeightedQuadrature& q) {
  const std::vector<Jet> uj = jets(u, kd.t(), q.nodes);
  const std::vector<Jet> vj = jets(v, kd.t(), q.nodes);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const KernelJet kj = kd.jet(q.nodes[i]);
    const double lu = drift_apply(kd, uj[i], kj);
    double dot = 0.0;
    for (int a = 0; a < 3; ++a) dot += uj[i].grad[a] * vj[i].grad[a];
    lhs += q.weights[i] * lu * vj[i].value;
    rhs += q.weights[i] * dot;
  }
  return std::abs(lhs + rhs);
}

}  // namespace parafreq
