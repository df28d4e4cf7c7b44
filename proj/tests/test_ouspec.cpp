#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "parafreq/ouspec.hpp"

using namespace parafreq;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

/// Physicists' Hermite H_k from the explicit sum k! sum_m (-1)^m (2x)^(k-2m) / (m! (k-2m)!).
double explicit_H(int k, double x) {
  double s = 0.0;
  for (int m = 0; 2 * m <= k; ++m)
    s += (m % 2 ? -1.0 : 1.0) * std::pow(2 * x, k - 2 * m) / (std::tgamma(m + 1.0) * std::tgamma(k - 2 * m + 1.0));
  return std::tgamma(k + 1.0) * s;
}

WeightedQuadrature gaussian_quadrature(double tau, int order = 30) {
  return build_quadrature(FlowBackground::gaussian_soliton(1, 0.0), -tau, order);
}

}  // namespace

TEST(Hermite, LowDegrees) {
  EXPECT_EQ(hermite_integer_coeffs(0), std::vector<std::int64_t>{1});
  EXPECT_EQ(hermite_integer_coeffs(1), (std::vector<std::int64_t>{0, -2}));
  EXPECT_EQ(hermite_integer_coeffs(2), (std::vector<std::int64_t>{-2, 0, 4}));
  EXPECT_DOUBLE_EQ(hermite(2)(1.5), 4 * 2.25 - 2);
  EXPECT_EQ(code_of([] { hermite(max_hermite_degree + 1); }), ErrorCode::DegreeTooLarge);
}

TEST(Hermite, DerivativeDefinition) {
  // e^{x^2} d^k/dx^k e^{-x^2} by finite differences for small k
  auto g = [](double x) { return std::exp(-x * x); };
  const double h = 1e-3;
  for (double x : {-0.8, 0.3, 1.2}) {
    const double d1 = (g(x + h) - g(x - h)) / (2 * h);
    const double d2 = (g(x + h) - 2 * g(x) + g(x - h)) / (h * h);
    EXPECT_NEAR(std::exp(x * x) * d1, hermite(1)(x), 1e-5);
    EXPECT_NEAR(std::exp(x * x) * d2, hermite(2)(x), 1e-5);
  }
}

TEST(Hermite, MatchesExplicitFormulaWithSign) {
  for (int k = 0; k <= max_hermite_degree; ++k) {
    const auto h = hermite(k);
    EXPECT_DOUBLE_EQ(h.coeffs.back(), std::pow(-2.0, k));
    for (std::size_t j = 0; j < h.coeffs.size(); ++j)
      if ((static_cast<int>(j) - k) % 2 != 0) {
        EXPECT_EQ(h.coeffs[j], 0.0);
      }
    for (double x : {-1.3, 0.0, 0.4, 2.0}) {
      const double ref = (k % 2 ? -1.0 : 1.0) * explicit_H(k, x);
      EXPECT_NEAR(h(x), ref, 1e-12 * std::max(1.0, std::abs(ref))) << k;
    }
  }
}

TEST(Hermite, OdeResidual) {
  EXPECT_EQ(hermite_ode_residual(hermite(0)), 0.0);
  EXPECT_EQ(hermite_ode_residual(hermite(2)), 0.0);
  EXPECT_LE(hermite_ode_residual(hermite(5)), 1e-9);
  for (int k = 0; k <= max_hermite_degree; ++k) EXPECT_LE(hermite_ode_residual(hermite(k)), 1e-12) << k;
}

TEST(OuEigen, Examples) {
  const auto q1 = gaussian_quadrature(1.0);
  EXPECT_LT(ou_eigen_residual(1, 1.0, q1), 1e-14);
  EXPECT_EQ(ou_eigen_residual(0, 1.0, q1), 0.0);
  const auto qh = gaussian_quadrature(0.5);
  EXPECT_LE(ou_eigen_residual(2, 0.5, qh), 1e-9);
  // p_2 at tau = 1/2 is proportional to x^2 - 1 and has eigenvalue -2
  const Polynomial p2 = scaled_hermite(2, 0.5);
  EXPECT_NEAR(p2.coefficient({0, 0, 0}) / p2.coefficient({2, 0, 0}), -1.0, 1e-15);
  const Polynomial lp = ou_apply(p2, 0.5);
  EXPECT_NEAR(lp.coefficient({2, 0, 0}), -2.0 * p2.coefficient({2, 0, 0}), 1e-14);
  for (int k = 0; k <= 12; ++k)
    for (double tau : {0.25, 1.0, 3.0}) EXPECT_LE(ou_eigen_residual(k, tau, gaussian_quadrature(tau)), 1e-9);
}

TEST(OuEigen, TrivialExtensionToHigherDimensions) {
  const auto bg = FlowBackground::gaussian_soliton(3, 0.0, Point{0.5, -1.0, 2.0});
  const auto q = build_quadrature(bg, -1.5, 10);
  for (int axis = 0; axis < 3; ++axis)
    for (int k : {1, 3, 5}) EXPECT_LE(ou_eigen_residual(k, 1.5, q, bg.center(), axis), 1e-9);
}

TEST(Commutator, Examples) {
  const auto q = gaussian_quadrature(1.0);
  const Polynomial x3 = Polynomial::monomial(1, {3, 0, 0});
  EXPECT_LT(commutator_residual(x3, 1.0, q), 1e-13);
  // L_f(3x^2) - (L_f x^3)' = (3/2) x^2 = u'/2
  const Polynomial lhs = ou_apply(x3.derivative(0), 1.0) - ou_apply(x3, 1.0).derivative(0);
  EXPECT_DOUBLE_EQ(lhs.coefficient({2, 0, 0}), 1.5);
  EXPECT_EQ(lhs.coefficient({0, 0, 0}), 0.0);
  EXPECT_EQ(commutator_residual(Polynomial::constant(1, 4.0), 1.0, q), 0.0);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> c(7);
    for (double& v : c) v = U(rng);
    EXPECT_LE(commutator_residual(Polynomial::univariate(1, 0, c), 1.0, q), 1e-10);
  }
  EXPECT_EQ(code_of([&] { commutator_residual(Polynomial::constant(2, 1.0), 1.0, q); }), ErrorCode::InvalidArgument);
}

TEST(Galerkin, Examples) {
  const auto e6 = galerkin_spectrum(1.0, 6);
  ASSERT_EQ(e6.size(), 7u);
  for (int j = 0; j <= 6; ++j) EXPECT_NEAR(e6[j], -0.5 * j, 1e-12);
  const auto e2 = galerkin_spectrum(0.5, 2);
  ASSERT_EQ(e2.size(), 3u);
  for (int j = 0; j <= 2; ++j) EXPECT_NEAR(e2[j], -1.0 * j, 1e-12);
  const auto e0 = galerkin_spectrum(2.0, 0);
  ASSERT_EQ(e0.size(), 1u);
  EXPECT_NEAR(e0[0], 0.0, 1e-15);
}

TEST(Galerkin, MonomialBasisAgreesThenBecomesIllConditioned) {
  const auto h = galerkin_spectrum(1.0, 5, GalerkinBasis::Hermite);
  const auto m = galerkin_spectrum(1.0, 5, GalerkinBasis::Monomial);
  for (std::size_t j = 0; j < h.size(); ++j) EXPECT_NEAR(h[j], m[j], 1e-8);
  EXPECT_EQ(code_of([] { galerkin_spectrum(1.0, 16, GalerkinBasis::Monomial); }), ErrorCode::IllConditioned);
  EXPECT_NO_THROW(galerkin_spectrum(1.0, 16, GalerkinBasis::Hermite));
}

TEST(Galerkin, ErrorPaths) {
  EXPECT_EQ(code_of([] { galerkin_spectrum(0.0, 3); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { galerkin_spectrum(1.0, -1); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { galerkin_spectrum(1.0, max_hermite_degree + 1); }), ErrorCode::DegreeTooLarge);
}
