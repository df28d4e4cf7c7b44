#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "parafreq/frequency.hpp"

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

struct GaussianSlice {
  FlowBackground bg = FlowBackground::gaussian_soliton(1, 0.0);
  KernelData kd = kernel_at(bg, -1.0);
  WeightedQuadrature q = build_quadrature(kd, 40);
  Polynomial x = Polynomial::shifted_variable(1, 0);
  SpectralField field(const Polynomial& p) const { return SpectralField::polynomial(bg, p); }
};

double wrapped_gaussian(double x, double x1, double L, double tau) {
  double s = 0.0;
  for (int m = -200; m <= 200; ++m) s += oracle::gaussian_density(x + m * L, tau, x1);
  return s;
}

TraceOptions quick(int samples = 64) {
  TraceOptions o;
  o.samples = samples;
  return o;
}

}  // namespace

TEST(ComputeI, Examples) {
  GaussianSlice g;
  EXPECT_NEAR(compute_I(g.field(Polynomial::constant(1, 1.0)), g.kd, g.q), 1.0, 1e-14);
  EXPECT_NEAR(compute_I(g.field(g.x), g.kd, g.q), 2.0, 1e-13);
  EXPECT_NEAR(compute_I(g.field(g.x * g.x - Polynomial::constant(1, 2.0)), g.kd, g.q), 8.0, 1e-12);
  // moment oracle: E x^4 - 4 E x^2 + 4 with direct integration
  const double direct = oracle::integrate(
      [](double x) { return (x * x - 2) * (x * x - 2) * oracle::gaussian_density(x, 1.0); }, -40, 40);
  EXPECT_NEAR(direct, 8.0, 1e-9);
}

TEST(ComputeD, Examples) {
  GaussianSlice g;
  EXPECT_EQ(compute_D(g.field(Polynomial::constant(1, 1.0)), g.kd, g.q, 1.0), 0.0);
  EXPECT_NEAR(compute_D(g.field(g.x), g.kd, g.q, 1.0), -1.0, 1e-13);
  EXPECT_NEAR(compute_D(g.field(g.x * g.x - Polynomial::constant(1, 2.0)), g.kd, g.q, 1.0), -8.0, 1e-12);
}

TEST(ComputeD, DualFormMismatchOnUnderresolvedQuadrature) {
  GaussianSlice g;
  const auto coarse = build_quadrature(g.kd, 4);
  const auto u = g.field(Polynomial::monomial(1, {10, 0, 0}));
  EXPECT_EQ(code_of([&] { compute_D(u, g.kd, coarse, 1.0); }), ErrorCode::DualFormMismatch);
  EXPECT_NO_THROW(compute_D(u, g.kd, g.q, 1.0));
}

TEST(ComputeU, Examples) {
  GaussianSlice g;
  auto U_of = [&](const Polynomial& p) {
    const auto u = g.field(p);
    return compute_U(compute_D(u, g.kd, g.q, 1.0), compute_I(u, g.kd, g.q), 1.0);
  };
  EXPECT_NEAR(U_of(g.x), -0.5, 1e-13);
  EXPECT_NEAR(U_of(g.x * g.x - Polynomial::constant(1, 2.0)), -1.0, 1e-13);
  EXPECT_EQ(U_of(Polynomial::constant(1, 1.0)), 0.0);
  EXPECT_EQ(code_of([] { compute_U(-1.0, 0.0, 1.0); }), ErrorCode::ZeroSolution);
  EXPECT_EQ(code_of([&] { U_of(Polynomial(1)); }), ErrorCode::ZeroSolution);
}

TEST(Trace, CaloricDegreeTwoIsConstant) {
  const auto bg = FlowBackground::gaussian_soliton(1, 0.0);
  const auto tr = trace(caloric_polynomial(bg, {2}, TimeWindow{-2.0, -1.0}), quick());
  ASSERT_EQ(tr.samples.size(), 64u);
  EXPECT_EQ(tr.samples.front().t, -2.0);
  EXPECT_EQ(tr.samples.back().t, -1.0);
  for (const auto& s : tr.samples) {
    EXPECT_NEAR(s.U, -1.0, 1e-9);
    EXPECT_NEAR(s.I, 8.0 * s.tau * s.tau, 1e-9 * s.I);  // I = E (y^2 - 2 tau)^2 = 8 tau^2
    EXPECT_EQ(s.Ecorr, 1.0);
    EXPECT_EQ(s.kappa, 1.0);
  }
  EXPECT_NEAR(tr.samples.back().I, 8.0, 1e-12);
}

TEST(Trace, CircleSingleModeAgainstDirectIntegration) {
  const double L = 2.0 * M_PI;
  const auto bg = FlowBackground::flat_circle(L, 0.0);
  const auto sol = solve_heat(bg, SpectralField::fourier(bg, {0.0, 0.0, 1.0}), TimeWindow{-2.0, -1.0});
  const auto tr = trace(sol, quick());
  EXPECT_TRUE(check_monotone(tr).passed);
  for (std::size_t i : {0u, 20u, 63u}) {
    const auto& s = tr.samples[i];
    const double tau = -s.t;
    const double amp = std::exp(-4.0 * (s.t + 2.0));
    auto u = [&](double x) { return amp * std::cos(2 * x); };
    auto du = [&](double x) { return -2 * amp * std::sin(2 * x); };
    const double I = oracle::integrate([&](double x) { return u(x) * u(x) * wrapped_gaussian(x, 0, L, tau); }, -M_PI,
                                       M_PI, 8000);
    const double G = oracle::integrate([&](double x) { return du(x) * du(x) * wrapped_gaussian(x, 0, L, tau); },
                                       -M_PI, M_PI, 8000);
    EXPECT_NEAR(s.I, I, 1e-10 * I);
    EXPECT_NEAR(s.D, -tau * G, 1e-10 * tau * G);
    EXPECT_NEAR(s.U, -tau * G / I, 1e-9);
  }
}

TEST(Trace, ZeroInitialData) {
  const auto bg = FlowBackground::flat_circle(1.0, 0.0);
  const auto sol = solve_heat(bg, SpectralField::fourier(bg, {0.0, 0.0}), TimeWindow{-2.0, -1.0});
  EXPECT_EQ(code_of([&] { trace(sol, quick(8)); }), ErrorCode::ZeroSolution);
  EXPECT_EQ(code_of([&] { trace(sol, quick(4)); }), ErrorCode::InvalidArgument);
}

TEST(Trace, InvariantsOnAllBackgrounds) {
  std::mt19937_64 rng(21);
  const auto circ = FlowBackground::flat_circle(2.0 * M_PI, 0.0);
  const auto sph = FlowBackground::shrinking_sphere(4.0, 1.0);
  const auto gauss = FlowBackground::gaussian_soliton(2, 0.0);
  std::vector<HeatSolution> sols{
      solve_heat(circ, random_band_limited(circ, 5, rng), TimeWindow{-2.0, -1.0}),
      solve_heat(sph, random_zonal(sph, 6, rng), TimeWindow{-1.0, 0.0}),
      caloric_mixture(gauss, random_caloric_terms(2, 6, 3, rng), TimeWindow{-2.0, -1.0}),
  };
  for (const auto& sol : sols) {
    TraceOptions o = quick(32);
    if (sol.background().is(BackgroundKind::GaussianSoliton)) o.order = 24;
    const auto tr = trace(sol, o);
    EXPECT_EQ(tr.samples.front().Ecorr, 1.0);
    for (const auto& s : tr.samples) {
      EXPECT_GT(s.I, 0.0);
      EXPECT_LE(s.U, 1e-10);
      EXPECT_GE(s.kappa, 1.0);
    }
    EXPECT_TRUE(assess_monotone(tr).passed);
    EXPECT_GE(cauchy_schwarz_gap(tr), -1e-10);
    EXPECT_LE(I_prime_identity_residual(tr), 1e-6);
    EXPECT_LE(log_I_identity_residual(tr), 1e-5);
  }
}

TEST(Trace, SphereCorrectionFactorAgainstIndependentQuadrature) {
  const auto bg = FlowBackground::shrinking_sphere(4.0, 1.0);
  const TimeWindow w{-1.0, 0.0};
  const auto tr = trace(solve_heat(bg, SpectralField::legendre(bg, {1.0, 0.5, -0.3}), w), quick());
  KernelOptions ko;
  ko.sphere_eps = 1e-3 * 2.0;
  auto g = [&](double t) {
    const auto kd = kernel_at(bg, t, ko);
    const auto q = build_quadrature(kd, defaults::sphere_nodes);
    return (1.0 - kappa(kd, q)) / kd.tau();
  };
  const double integral = oracle::integrate(g, w.a, w.b, 400);
  EXPECT_NEAR(tr.samples.back().Ecorr, std::exp(integral), 1e-9);
  EXPECT_LT(tr.samples.back().Ecorr, 1.0);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) EXPECT_LT(tr.samples[i].Ecorr, tr.samples[i - 1].Ecorr);
}

TEST(Trace, ParallelIsBitIdentical) {
  std::mt19937_64 rng(5);
  const auto bg = FlowBackground::shrinking_sphere(4.0, 1.0);
  const auto sol = solve_heat(bg, random_zonal(bg, 6, rng), TimeWindow{-1.0, 0.0});
  TraceOptions o = quick(24);
  const auto a = trace(sol, o);
  o.parallel = true;
  const auto b = trace(sol, o);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].U, b.samples[i].U);
    EXPECT_EQ(a.samples[i].U_prime, b.samples[i].U_prime);
    EXPECT_EQ(a.samples[i].Ecorr, b.samples[i].Ecorr);
  }
}

TEST(Monotone, CaloricForwardDifferencesVanish) {
  const auto bg = FlowBackground::gaussian_soliton(1, 0.0);
  const auto tr = trace(caloric_polynomial(bg, {5}, TimeWindow{-2.0, -1.0}), quick());
  const auto r = check_monotone(tr);
  EXPECT_TRUE(r.passed);
  for (std::size_t i = 0; i + 1 < tr.samples.size(); ++i)
    EXPECT_NEAR(tr.samples[i + 1].U - tr.samples[i].U, 0.0, 1e-10);
}

TEST(Monotone, CorruptedTraceFails) {
  const auto bg = FlowBackground::flat_circle(2.0 * M_PI, 0.0);
  std::mt19937_64 rng(1);
  auto tr = trace(solve_heat(bg, random_band_limited(bg, 4, rng), TimeWindow{-2.0, -1.0}), quick(16));
  tr.samples[7].U = tr.samples[6].U - 0.1;
  const auto r = assess_monotone(tr);
  EXPECT_FALSE(r.passed);
  EXPECT_LT(r.margin, 0.0);
  EXPECT_EQ(r.failure_code, ErrorCode::MonotonicityViolation);
  try {
    check_monotone(tr);
    FAIL();
  } catch (const CheckFailure& e) {
    EXPECT_EQ(e.code(), ErrorCode::MonotonicityViolation);
    EXPECT_FALSE(e.report().passed);
  }
}

TEST(EqualityCase, EigenfunctionsAndMixtures) {
  const auto bg = FlowBackground::gaussian_soliton(1, 0.0);
  const TimeWindow w{-2.0, -1.0};
  for (int k : {1, 2, 4}) {
    const auto sol = caloric_polynomial(bg, {k}, w);
    const auto tr = trace(sol, quick(16));
    for (std::size_t i : {0u, 8u, 15u}) {
      const auto& s = tr.samples[i];
      const auto kd = kernel_at(bg, s.t);
      const auto q = build_quadrature(kd, 40);
      EXPECT_LE(equality_case_residual(sol.field_at(s.t), kd, q, s), 1e-7) << k;
    }
  }
  // x + (x^2 - 2 tau): two eigenvalues, U strictly increasing
  const auto mix = caloric_mixture(bg, {CaloricTerm{1.0, {1, 0, 0}}, CaloricTerm{1.0, {2, 0, 0}}}, w);
  const auto tr = trace(mix, quick(16));
  for (const auto& s : tr.samples) {
    EXPECT_GT(s.U_prime, 1e-3);
    const auto kd = kernel_at(bg, s.t);
    const auto q = build_quadrature(kd, 40);
    EXPECT_EQ(code_of([&] { equality_case_residual(mix.field_at(s.t), kd, q, s); }), ErrorCode::NotStationary);
  }
}

TEST(HessianIdentity, GaussianExamples) {
  GaussianSlice g;
  EXPECT_LT(hessian_identity_residual(g.field(g.x), g.kd, g.q), 1e-14);
  // right-hand side for u = x: int (x^2/4 - 1/2) d nu = 0 at tau = 1
  const auto s = integrate_slice(g.field(g.x), g.kd, g.q);
  EXPECT_NEAR(s.lf_sq, 0.5, 1e-14);
  EXPECT_NEAR(s.ricf, 0.5, 1e-14);
  EXPECT_EQ(hessian_identity_residual(g.field(Polynomial::constant(1, 2.0)), g.kd, g.q), 0.0);
}

TEST(HessianIdentity, CircleAgainstFiniteDifferences) {
  const double L = 2.0 * M_PI;
  const auto bg = FlowBackground::flat_circle(L, 0.0);
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 4; ++trial) {
    const auto u = random_band_limited(bg, 6, rng);
    const auto kd = kernel_at(bg, -0.8);
    const auto q = build_quadrature(kd, defaults::circle_nodes);
    EXPECT_LE(hessian_identity_residual(u, kd, q), 1e-7);
    // dense grid: int u''^2 K vs int ((u'' - f' u')^2 - f'' u'^2) K
    const double h = 1e-3;
    auto U = [&](double x) { return synthesize(u, Point{x, 0, 0}); };
    auto F = [&](double x) { return kd.f(Point{x, 0, 0}); };
    auto lhs = [&](double x) {
      const double upp = (U(x + h) - 2 * U(x) + U(x - h)) / (h * h);
      return upp * upp * kd.K(Point{x, 0, 0});
    };
    auto rhs = [&](double x) {
      const double up = (U(x + h) - U(x - h)) / (2 * h), upp = (U(x + h) - 2 * U(x) + U(x - h)) / (h * h);
      const double fp = (F(x + h) - F(x - h)) / (2 * h), fpp = (F(x + h) - 2 * F(x) + F(x - h)) / (h * h);
      const double lf = upp - fp * up;
      return (lf * lf - fpp * up * up) * kd.K(Point{x, 0, 0});
    };
    const double a = oracle::integrate(lhs, -M_PI, M_PI, 4000), b = oracle::integrate(rhs, -M_PI, M_PI, 4000);
    EXPECT_NEAR(a, b, 1e-4 * (1 + a));
  }
}

TEST(LogIIdentity, Examples) {
  const auto bg = FlowBackground::gaussian_soliton(1, 0.0);
  const TimeWindow w{-2.0, -1.0};
  const auto tx = trace(caloric_polynomial(bg, {1}, w), quick());
  EXPECT_LT(log_I_identity_residual(tx), 1e-8);
  for (const auto& s : tx.samples) EXPECT_NEAR(s.I, 2 * s.tau, 1e-12);
  const auto t1 = trace(caloric_polynomial(bg, {0}, w), quick());
  EXPECT_LT(log_I_identity_residual(t1), 1e-12);
  const auto circ = FlowBackground::flat_circle(2.0 * M_PI, 0.0);
  const auto tc = trace(solve_heat(circ, SpectralField::fourier(circ, {0.0, 1.0}), w), quick());
  EXPECT_LE(log_I_identity_residual(tc), 1e-5);
}

TEST(BackwardsBound, Examples) {
  const auto bg = FlowBackground::gaussian_soliton(1, 0.0);
  const TimeWindow w{-2.0, -1.0};
  const auto tx = trace(caloric_polynomial(bg, {1}, w), quick());
  const auto r = backwards_bound_check(tx);
  EXPECT_NEAR(tx.samples.back().I / tx.samples.front().I, 0.5, 1e-14);
  EXPECT_NEAR(r.lhs, r.rhs, 1e-8);
  EXPECT_NEAR(inverse_correction_integral(tx), std::log(2.0), 1e-8);

  const auto t1 = trace(caloric_polynomial(bg, {0}, w), quick());
  const auto r1 = backwards_bound_check(t1);
  EXPECT_NEAR(r1.lhs, 1.0, 1e-15);
  EXPECT_NEAR(r1.rhs, 1.0, 1e-15);

  const auto circ = FlowBackground::flat_circle(2.0 * M_PI, 0.0);
  const auto tc = trace(solve_heat(circ, SpectralField::fourier(circ, {0.3, 1.0, 0.0, 0.5}), w), quick());
  const auto rc = backwards_bound_check(tc);
  EXPECT_GT(rc.lhs - rc.rhs, 1e-3 * rc.rhs);

  auto bad = tc;
  bad.samples.back().I *= 1e-3;
  EXPECT_EQ(code_of([&] { backwards_bound_check(bad); }), ErrorCode::BoundViolation);
}

TEST(GeneralBounds, HoldForPerturbedCircle) {
  const auto bg = FlowBackground::flat_circle(2.0 * M_PI, 0.0);
  const TimeWindow w{-2.0, -1.0};
  std::mt19937_64 rng(31);
  const auto u0 = random_band_limited(bg, 4, rng);

  const auto heat = trace(solve_heat(bg, u0, w), quick());
  EXPECT_TRUE(general_bounds_check(heat).passed);
  for (std::size_t i = 1; i + 1 < heat.samples.size(); ++i) EXPECT_GE(heat.samples[i].U_prime, -1e-8);

  const auto beta = trace(solve_perturbed(bg, u0, TimeCoefficient::constant(0.0), TimeCoefficient::constant(0.1), w),
                          quick());
  EXPECT_TRUE(general_bounds_check(beta).passed);
  const auto alpha =
      trace(solve_perturbed(bg, u0, TimeCoefficient::sine(0.2), TimeCoefficient::constant(0.0), w), quick());
  EXPECT_TRUE(general_bounds_check(alpha).passed);
}

TEST(GeneralBounds, UnderstatedConstantFails) {
  const auto bg = FlowBackground::flat_circle(2.0 * M_PI, 0.0);
  const TimeWindow w{-2.0, -1.0};
  const auto sol = solve_perturbed(bg, SpectralField::fourier(bg, {1.0, 0.5}), TimeCoefficient::constant(0.0),
                                   TimeCoefficient::constant(-0.3), w);
  const auto tr = trace(sol, quick(16));
  EXPECT_TRUE(assess_general_bounds(tr).passed);
  const auto r = assess_general_bounds(tr, {}, [](double) { return 0.0; });
  EXPECT_FALSE(r.passed);
  EXPECT_NE(r.detail.find("inequality"), std::string::npos);
  EXPECT_EQ(code_of([&] { general_bounds_check(tr, {}, [](double) { return 0.0; }); }), ErrorCode::BoundViolation);
}

TEST(CorollaryBound, Examples) {
  const auto bg = FlowBackground::flat_circle(2.0 * M_PI, 0.0);
  const TimeWindow w{-2.0, -1.0};
  std::mt19937_64 rng(32);
  const auto u0 = random_band_limited(bg, 4, rng);
  const auto heat = trace(solve_heat(bg, u0, w), quick());
  const auto c0 = corollary_bound_check(heat);
  EXPECT_DOUBLE_EQ(c0.rhs, assess_backwards_bound(heat).rhs);

  const auto beta = trace(solve_perturbed(bg, u0, TimeCoefficient::constant(0.0), TimeCoefficient::constant(0.1), w),
                          quick());
  const auto r = corollary_bound_check(beta);
  EXPECT_GT(r.margin, 0.0);
  EXPECT_GT(r.lhs, r.rhs);

  // larger sup C weakens the right-hand side
  double prev = std::numeric_limits<double>::infinity();
  for (double supC : {0.0, 0.1, 0.2, 0.5, 1.0}) {
    const double rhs = corollary_rhs(2.0, -1.5, 2.0, supC, supC * supC, 0.7, 1.0);
    EXPECT_LE(rhs, prev);
    prev = rhs;
  }
}

TEST(Tolerances, Scaling) {
  const Tolerances t;
  const Tolerances s = t.scaled(10.0);
  EXPECT_DOUBLE_EQ(s.monotone, 10 * t.monotone);
  EXPECT_DOUBLE_EQ(s.corollary, 10 * t.corollary);
}
