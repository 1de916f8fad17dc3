#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pifluid/kernel.hpp"
#include "support/reference.hpp"

using namespace pifluid;

namespace {

const DoubleWellParams kDoubleWell{1.0, -2.0, 1e-4, 1.0, 1.0};

double phase_error(cplx a, cplx b) { return std::abs(std::arg(a / b)); }

KernelParams params(int k_max) {
  KernelParams p;
  p.k_max = k_max;
  p.bvp_tol = 1e-12;
  return p;
}

}  // namespace

TEST(Frequency, HarmonicIsConstant) {
  const auto v = PotentialModel::harmonic(1.0, 1.7, 1.0);
  const auto path = solve_bvp_shooting(v, 0.3, -0.4, 1.0, 0.0, 1e-12);
  for (double t : {0.0, 0.5, 1.0}) EXPECT_NEAR(std::abs(instantaneous_frequency(v, path, t) - 1.7), 0.0, 1e-14);
}

TEST(Frequency, BarrierTopIsImaginary) {
  const auto v = kDoubleWell.potential();
  const auto path = solve_bvp_shooting(v, 0.0, 0.0, 0.5, 0.0, 1e-12);
  const cplx w = instantaneous_frequency(v, path, 0.25);
  EXPECT_NEAR(w.real(), 0.0, 1e-15);
  EXPECT_NEAR(w.imag(), std::sqrt(2.0), 1e-14);
}

TEST(Frequency, QuarticOnly) {
  const PotentialModel v({0.0, 0.0, 0.0, 0.0, 0.25e-4}, 1.0, 1.0);
  const auto path = solve_bvp_shooting(v, 2.0, 2.0, 0.3, 0.0, 1e-12);
  EXPECT_NEAR(instantaneous_frequency(v, path, 0.0).real(), std::sqrt(12e-4), 1e-15);
}

TEST(Phase, ConstantFrequencyAndFreeParticle) {
  const auto v = PotentialModel::harmonic(1.0, 0.9, 1.0);
  const auto path = solve_bvp_shooting(v, 1.0, 2.0, 1.5, 0.0, 1e-12);
  EXPECT_NEAR(std::abs(accumulated_phase(v, path, 1.5) - 0.9 * 1.5), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(accumulated_phase(v, path, 0.6) - 0.9 * 0.6), 0.0, 1e-13);
  const auto f = PotentialModel::free_particle(1.0, 1.0);
  EXPECT_EQ(accumulated_phase(f, solve_bvp_shooting(f, 0.0, 1.0, 1.0, 0.0, 1e-12), 1.0), cplx(0.0));
}

TEST(Phase, DoubleWellAgainstRefinedTrapezoid) {
  const auto v = kDoubleWell.potential();
  for (bool lindstedt : {false, true}) {
    const auto path = lindstedt ? solve_lindstedt(kDoubleWell, -3.126, 1.0, 0.5)
                                : solve_bvp_shooting(v, -3.126, 1.0, 0.5, 0.0, 1e-12);
    const cplx phi = accumulated_phase(v, path, 0.5);
    auto trap = [&](int n) {
      cplx acc = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        const cplx curv = v.derivative(2, path.position(0.5 * i / n)) / v.mass();
        cplx root = std::sqrt(curv);
        if (curv.real() < 0.0 && root.imag() < 0.0) root = -root;
        acc += w * root;
      }
      return acc * (0.5 / n);
    };
    // Richardson on the halving sequence.
    const cplx t1 = trap(2000), t2 = trap(4000);
    const cplx refined = (4.0 * t2 - t1) / 3.0;
    EXPECT_LT(std::abs(phi - refined), 1e-8 * std::abs(refined));
  }
}

TEST(Moments, VanishForHarmonic) {
  const auto v = PotentialModel::harmonic(1.0, 1.0, 1.0);
  const auto path = solve_bvp_shooting(v, 0.0, 1.0, 1.0, 0.0, 1e-12);
  EXPECT_EQ(moment_integral(v, path, 4), cplx(0.0));
  EXPECT_EQ(moment_integral(v, path, 8), cplx(0.0));
  EXPECT_THROW(moment_integral(v, path, 3), InvalidArgument);
}

TEST(Moments, ConstantIntegrand) {
  // V = w0^2 x^2 / 2 + c x^4 / 24 on the static path x = 0.
  const double w0 = 1.3, c = 0.7, t = 0.8;
  const PotentialModel v({0.0, 0.0, 0.5 * w0 * w0, 0.0, c / 24.0}, 1.0, 1.0);
  const auto path = solve_bvp_shooting(v, 0.0, 0.0, t, 0.0, 1e-12);
  EXPECT_NEAR(std::abs(moment_integral(v, path, 4) - c * t / (w0 * w0)), 0.0, 1e-14);
}

TEST(Moments, FrequencyZeroIsReported) {
  // V'' vanishes at x = 0 for a pure quartic.
  const PotentialModel v({0.0, 0.0, 0.0, 0.0, 1.0}, 1.0, 1.0);
  const auto path = solve_bvp_shooting(v, 0.0, 0.0, 1.0, 0.0, 1e-12);
  EXPECT_THROW(moment_integral(v, path, 4), FrequencyZero);
}

TEST(InverseOmega2, Limits) {
  const auto harmonic = PotentialModel::harmonic(1.0, 1.2, 1.0);
  const auto c = fit_boundary_constants(0.5, -0.3, 0.9, 1.2, 0.0);
  EXPECT_NEAR(std::abs(closed_form_inv_omega2(c, harmonic, 0.9) - 0.9 / 1.44), 0.0, 1e-13);
  EXPECT_EQ(closed_form_inv_omega2(c, harmonic, 0.0), cplx(0.0));
  // Long durations cross many branch cuts of arctan(r tan u).
  EXPECT_NEAR(std::abs(closed_form_inv_omega2(c, harmonic, 17.3) - 17.3 / 1.44), 0.0, 1e-11);
}

TEST(InverseOmega2, MatchesQuadratureOfItsIntegrand) {
  // In the double well x grows like cosh(sqrt(2) t) and w^2 crosses zero
  // near t = 2.8, so only short durations are regular there.
  const std::vector<std::pair<DoubleWellParams, std::vector<double>>> cases{
      {kDoubleWell, {0.5, 1.5, 2.0}}, {DoubleWellParams{1.0, 1.0, 0.05, 1.0, 1.0}, {0.5, 3.0, 9.0}}};
  for (const auto& [dw, durations] : cases) {
    const auto v = dw.potential();
    const auto c = fit_boundary_constants(-3.126, -3.0, 0.5, dw.omega0(), dw.lambda);
    const double lk = dw.lambda * dw.K;
    for (double T : durations) {
      const cplx closed = closed_form_inv_omega2(c, v, T);
      const cplx quad = integrate_gl(
          [&](double t) {
            const cplx x = c.amplitude_A * std::cos(c.omega * t + c.phase_phi0);
            return 1.0 / (dw.a + 3.0 * lk * x * x);
          },
          0.0, T, 2000, 8);
      EXPECT_LT(std::abs(closed - quad), 1e-10 * std::abs(quad)) << "T=" << T;
    }
  }
}

TEST(InverseOmega2, DoubleWellAgainstMomentQuadrature) {
  const auto v = kDoubleWell.potential();
  const auto path = solve_lindstedt(kDoubleWell, -3.126, -3.0, 0.5);
  const cplx closed = closed_form_inv_omega2(*path.constants(), v, 0.5);
  const cplx moment = moment_integral(v, path, 4) / (6.0 * kDoubleWell.mass * kDoubleWell.lambda * kDoubleWell.K);
  EXPECT_LT(std::abs(closed - moment), 1e-6 * std::abs(moment));
}

TEST(InverseOmega2, DiscriminantZero) {
  // p^2 = q^2 when a = 0.
  const auto v = PotentialModel::double_well(1.0, 0.0, 1e-2, 1.0, 1.0);
  const LindstedtConstants c{1.0, 0.0, cplx(1e-3, 0.0), cplx(1e-3, 0.0)};
  EXPECT_THROW(closed_form_inv_omega2(c, v, 1.0), DiscriminantZero);
}

TEST(Series, FreeParticle) {
  const auto v = PotentialModel::free_particle(1.0, 1.0);
  const cplx k = kernel_series(v, 0.0, 1.0, 1.0, params(4));
  EXPECT_NEAR(std::abs(k), 1.0 / std::sqrt(2.0 * M_PI), 1e-14);
  EXPECT_LT(std::abs(k - ref::free_kernel(1.0, 1.0, 0.0, 1.0, 1.0)), 1e-12);
}

TEST(Series, HarmonicMatchesMehler) {
  const auto v = PotentialModel::harmonic(1.0, 1.0, 1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (double t : {0.3, 1.0, 2.0}) {
    for (int i = 0; i < 20; ++i) {
      const double xa = u(rng), xb = u(rng);
      const cplx k = kernel_series(v, xa, xb, t, params(3));
      const cplx e = ref::harmonic_kernel(1.0, 1.0, 1.0, xa, xb, t);
      EXPECT_LT(std::abs(std::abs(k) - std::abs(e)) / std::abs(e), 1e-8);
      EXPECT_LT(phase_error(k, e), 1e-8);
    }
  }
}

TEST(Series, HarmonicHigherOrdersAreExactlyZero) {
  const auto v = PotentialModel::harmonic(1.0, 0.7, 1.0);
  const auto k0 = kernel_series_detailed(v, -1.0, 2.0, 1.1, params(0));
  const auto k5 = kernel_series_detailed(v, -1.0, 2.0, 1.1, params(5));
  EXPECT_EQ(k0.value, k5.value);
  EXPECT_TRUE(k5.converged);
}

TEST(Series, FreeLimitIsContinuous) {
  const PotentialModel v({0.0, 0.0, 1e-12}, 1.0, 1.0);
  for (auto [xa, xb, t] : {std::tuple{0.0, 1.0, 1.0}, {-2.0, 2.5, 0.3}, {1.0, -1.0, 2.0}}) {
    const cplx k = kernel_series(v, xa, xb, t, params(2));
    const cplx f = ref::free_kernel(1.0, 1.0, xa, xb, t);
    EXPECT_LT(std::abs(k - f) / std::abs(f), 1e-6);
  }
}

TEST(Series, EndpointSymmetry) {
  const auto v = kDoubleWell.potential();
  const cplx ab = kernel_series(v, -3.1, -1.0, 0.4, params(4));
  const cplx ba = kernel_series(v, -1.0, -3.1, 0.4, params(4));
  EXPECT_LT(std::abs(ab - ba), 1e-9 * std::abs(ab));
}

TEST(Series, TermsDecayInPerturbativeRegime) {
  const auto v = kDoubleWell.potential();
  const auto r = kernel_series_detailed(v, -3.126, -2.0, 0.5, params(6));
  ASSERT_GE(r.terms.size(), 2u);
  for (std::size_t k = 1; k < r.terms.size(); ++k) {
    EXPECT_LT(std::abs(r.terms[k].term), std::abs(r.terms[k - 1].term));
  }
  EXPECT_TRUE(r.converged);
}

TEST(Series, GrowingTermsRaise) {
  // Strongly anharmonic: lambda K / w^2 large over a long time.
  const PotentialModel v({0.0, 0.0, 0.005, 0.0, 5.0}, 1.0, 1.0);
  KernelParams p = params(8);
  EXPECT_THROW(kernel_series(v, 0.0, 0.0, 1.0, p), NoConvergence);
}

TEST(Series, NearCaustic) {
  const auto v = PotentialModel::harmonic(1.0, 1.0, 1.0);
  EXPECT_THROW(kernel_series(v, 0.0, 0.0, M_PI, params(1)), NearCaustic);
}

TEST(Series, RejectsBadParams) {
  const auto v = kDoubleWell.potential();
  KernelParams p;
  p.k_max = 13;
  EXPECT_THROW(kernel_series(v, 0.0, 1.0, 1.0, p), InvalidArgument);
  p.k_max = 4;
  p.jet_order = 5;
  EXPECT_THROW(kernel_series(v, 0.0, 1.0, 1.0, p), InvalidArgument);
  EXPECT_THROW(kernel_series(v, 0.0, 1.0, 0.0, params(1)), InvalidArgument);
}

TEST(DoubleWell, ZeroLambdaIsQuadraticKernel) {
  const auto v = PotentialModel::double_well(1.0, -2.0, 0.0, 1.0, 1.0);
  const auto c = fit_boundary_constants(-1.0, 0.5, 0.7, std::sqrt(cplx(-2.0)), 0.0);
  const auto r = kernel_double_well_detailed(c, v, -1.0, 0.5, 0.7, params(4));
  EXPECT_EQ(r.terms.size(), 1u);
  EXPECT_LT(std::abs(r.value - quadratic_kernel(v, -1.0, 0.5, 0.7)), 1e-10 * std::abs(r.value));
}

TEST(DoubleWell, SharesZerothTermWithGeneralSeries) {
  const auto v = kDoubleWell.potential();
  const auto c = fit_boundary_constants(-3.126, -3.0, 0.5, kDoubleWell.omega0(), kDoubleWell.lambda);
  const auto dw = kernel_double_well_detailed(c, v, -3.126, -3.0, 0.5, params(0));
  const auto path = ClassicalPath::from_lindstedt(v, c, -3.126, -3.0, 0.5);
  const auto gen = kernel_series_on_path(v, path, params(0));
  EXPECT_EQ(dw.value, gen.value);
}

TEST(DoubleWell, FirstOrderTermMatchesGeneralSeries) {
  const auto v = kDoubleWell.potential();
  const auto c = fit_boundary_constants(-3.126, -3.0, 0.5, kDoubleWell.omega0(), kDoubleWell.lambda);
  KernelParams p = params(1);
  p.tol = 1e-300;
  const auto dw = kernel_double_well_detailed(c, v, -3.126, -3.0, 0.5, p);
  const auto gen = kernel_series_on_path(v, ClassicalPath::from_lindstedt(v, c, -3.126, -3.0, 0.5), p);
  ASSERT_EQ(dw.terms.size(), 2u);
  ASSERT_EQ(gen.terms.size(), 2u);
  EXPECT_LT(std::abs(dw.terms[1].term - gen.terms[1].term), 1e-6 * std::abs(gen.terms[1].term));
}

TEST(QuadraticKernel, InvertedOscillatorMatchesSeries) {
  const auto v = PotentialModel::double_well(1.0, -2.0, 0.0, 1.0, 1.0);
  for (double xb : {-4.0, 0.0, 3.0}) {
    const cplx exact = quadratic_kernel(v, -3.126, xb, 0.5);
    const cplx series = kernel_series(v, -3.126, xb, 0.5, params(2));
    EXPECT_LT(std::abs(series - exact), 1e-9 * std::abs(exact));
  }
}
