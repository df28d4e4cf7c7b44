#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "parafreq/backgrounds.hpp"
#include "parafreq/error.hpp"
#include "parafreq/polynomial.hpp"
#include "parafreq/quadrature.hpp"

namespace parafreq {

inline constexpr int max_hermite_degree = 20;

/// e^{x^2} D^k e^{-x^2}: the physicists' Hermite polynomial times (-1)^k.
struct HermitePoly {
  int k = 0;
  std::vector<double> coeffs;  // ascending powers of x

  double operator()(double x) const {
    double s = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) s = s * x + *it;
    return s;
  }
};

/// Integer coefficients of e^{x^2} D^k e^{-x^2} via h_{k+1} = h_k' - 2x h_k.
inline std::vector<std::int64_t> hermite_integer_coeffs(int k) {
  require(k >= 0 && k <= max_hermite_degree, ErrorCode::DegreeTooLarge,
          "Hermite degree " + std::to_string(k) + " exceeds " + std::to_string(max_hermite_degree));
  std::vector<std::int64_t> h{1};
  for (int step = 0; step < k; ++step) {
    std::vector<std::int64_t> next(h.size() + 1, 0);
    for (std::size_t j = 1; j < h.size(); ++j) next[j - 1] += static_cast<std::int64_t>(j) * h[j];
    for (std::size_t j = 0; j < h.size(); ++j) next[j + 1] -= 2 * h[j];
    h = std::move(next);
  }
  return h;
}

inline HermitePoly hermite(int k) {
  const auto ic = hermite_integer_coeffs(k);
  HermitePoly h{k, std::vector<double>(ic.begin(), ic.end())};
  return h;
}

/// Largest coefficient of v'' - 2x v' + 2k v, relative to the largest coefficient of v.
inline double hermite_ode_residual(const HermitePoly& h) {
  const std::size_t n = h.coeffs.size();
  std::vector<double> r(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (j + 2 < n) r[j] += static_cast<double>((j + 2) * (j + 1)) * h.coeffs[j + 2];
    r[j] += (2.0 * h.k - 2.0 * static_cast<double>(j)) * h.coeffs[j];
  }
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    num = std::max(num, std::abs(r[j]));
    den = std::max(den, std::abs(h.coeffs[j]));
  }
  return num / std::max(1.0, den);
}

/// Hermite polynomial scaled to the Gaussian measure at backwards time tau:
/// x -> h_k((x_axis - center) / sqrt(4 tau)), optionally normalized in L2(d nu).
inline Polynomial scaled_hermite(int k, double tau, int dim = 1, int axis = 0, double center = 0.0,
                                 bool normalize = false) {
  const HermitePoly h = hermite(k);
  const double s = 1.0 / std::sqrt(4.0 * tau);
  std::vector<double> c(h.coeffs.size());
  double scale = 1.0;
  if (normalize) {
    // int h_k(y)^2 e^{-y^2} dy / sqrt(pi) = 2^k k!
    double norm2 = 1.0;
    for (int i = 1; i <= k; ++i) norm2 *= 2.0 * i;
    scale = 1.0 / std::sqrt(norm2);
  }
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = scale * h.coeffs[j] * std::pow(s, static_cast<double>(j));
  return Polynomial::univariate(dim, axis, c, center);
}

/// Ornstein-Uhlenbeck drift Laplacian Delta p - <(x - center)/(2 tau), grad p>.
inline Polynomial ou_apply(const Polynomial& p, double tau, const Point& center = {}) {
  Polynomial out = p.laplacian();
  for (int a = 0; a < p.dim(); ++a) out -= Polynomial::shifted_variable(p.dim(), a, center[a]) * p.derivative(a) * (1.0 / (2.0 * tau));
  return out;
}

namespace detail {
inline double l2_norm(const Polynomial& p, const WeightedQuadrature& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double v = p(q.nodes[i]);
    s += q.weights[i] * v * v;
  }
  return std::sqrt(s);
}
}  // namespace detail

/// ||L_f p_k + (k / 2 tau) p_k|| / ||p_k|| in L2(d nu), p_k the scaled Hermite polynomial along `axis`.
inline double ou_eigen_residual(int k, double tau, const WeightedQuadrature& q, const Point& center = {},
                                int axis = 0) {
  const Polynomial p = scaled_hermite(k, tau, q.dim, axis, center[axis]);
  const Polynomial r = ou_apply(p, tau, center) + p * (k / (2.0 * tau));
  return detail::l2_norm(r, q) / detail::l2_norm(p, q);
}

/// ||L_f(u') - (L_f u)' - u' / (2 tau)|| in L2(d nu) for a 1-D polynomial u.
inline double commutator_residual(const Polynomial& u, double tau, const WeightedQuadrature& q,
                                  const Point& center = {}) {
  require(u.dim() == 1, ErrorCode::InvalidArgument, "commutator check takes a 1-D polynomial");
  const Polynomial du = u.derivative(0);
  const Polynomial r = ou_apply(du, tau, center) - ou_apply(u, tau, center).derivative(0) - du * (1.0 / (2.0 * tau));
  return detail::l2_norm(r, q);
}

enum class GalerkinBasis { Hermite, Monomial };

/**
 * Eigenvalues (descending) of the weak drift Laplacian on polynomials of
 * degree <= n_max: A_ij = -int <grad e_i, grad e_j> d nu against the mass
 * matrix M_ij = int e_i e_j d nu. The Hermite basis is orthonormal in
 * L2(d nu); the monomial basis is available to exhibit ill-conditioning.
 */
inline std::vector<double> galerkin_spectrum(double tau, int n_max, GalerkinBasis basis = GalerkinBasis::Hermite) {
  require(tau > 0.0, ErrorCode::InvalidArgument, "tau must be positive");
  require(n_max >= 0, ErrorCode::InvalidArgument, "n_max must be nonnegative");
  require(n_max <= max_hermite_degree, ErrorCode::DegreeTooLarge,
          "Galerkin degree " + std::to_string(n_max) + " exceeds " + std::to_string(max_hermite_degree));

  const FlowBackground bg = FlowBackground::gaussian_soliton(1, 0.0);
  const WeightedQuadrature q = build_quadrature(bg, -tau, std::max(4, n_max + 2));
  const int m = n_max + 1;

  std::vector<Polynomial> e, de;
  for (int i = 0; i < m; ++i) {
    Polynomial p = basis == GalerkinBasis::Hermite ? scaled_hermite(i, tau, 1, 0, 0.0, true)
                                                   : Polynomial::monomial(1, {i, 0, 0});
    de.push_back(p.derivative(0));
    e.push_back(std::move(p));
  }

  const std::size_t nn = q.nodes.size();
  Eigen::MatrixXd V(nn, m), dV(nn, m);
  for (std::size_t r = 0; r < nn; ++r)
    for (int i = 0; i < m; ++i) {
      V(r, i) = e[i](q.nodes[r]);
      dV(r, i) = de[i](q.nodes[r]);
    }
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(q.weights.data(), nn);
  Eigen::MatrixXd M = V.transpose() * w.asDiagonal() * V;
  Eigen::MatrixXd A = -(dV.transpose() * w.asDiagonal() * dV);
  M = 0.5 * (M + M.transpose()).eval();
  A = 0.5 * (A + A.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> mass(M, Eigen::EigenvaluesOnly);
  const double cond = mass.eigenvalues().maxCoeff() / mass.eigenvalues().minCoeff();
  require(mass.eigenvalues().minCoeff() > 0.0 && cond <= 1e12, ErrorCode::IllConditioned,
          "mass matrix condition number " + std::to_string(cond));

  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(A, M, Eigen::EigenvaluesOnly);
  std::vector<double> ev(ges.eigenvalues().data(), ges.eigenvalues().data() + m);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

}  // namespace parafreq
