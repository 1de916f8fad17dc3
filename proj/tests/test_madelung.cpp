#include <gtest/gtest.h>

#include <cmath>

#include "pifluid/madelung.hpp"
#include "pifluid/oracle.hpp"
#include "support/reference.hpp"

using namespace pifluid;
using ref::cplx;

namespace {

WavefunctionGrid sample(const GridSpec& g, const std::function<cplx(double)>& f, double t = 0.0) {
  WavefunctionGrid psi(g, t);
  for (int i = 0; i < psi.size(); ++i) psi[i] = f(psi.x(i));
  return psi;
}

// Largest |residual| over interior points whose density is above `floor` of the peak.
double residual_norm(const MadelungFields& a, const MadelungFields& b, double dt, double floor = 1e-10) {
  const auto r = continuity_residual(a, b, dt);
  double peak = 0.0;
  for (double v : a.rho) peak = std::max(peak, v);
  double m = 0.0;
  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    if (a.rho[i] > floor * peak) m = std::max(m, std::abs(r[i]));
  }
  return m;
}

}  // namespace

TEST(Decompose, RealGaussianHasZeroPhase) {
  const GridSpec g{-6.0, 6.0, 512};
  const auto psi = sample(g, [](double x) { return std::exp(-x * x / 2.0); });
  const auto f = decompose(psi, 1.0);
  for (int i = 0; i < g.n_points; ++i) {
    EXPECT_EQ(f.S_M[static_cast<std::size_t>(i)], 0.0);
    EXPECT_EQ(f.R[static_cast<std::size_t>(i)], psi[i].real());
    EXPECT_EQ(f.rho[static_cast<std::size_t>(i)], f.R[static_cast<std::size_t>(i)] * f.R[static_cast<std::size_t>(i)]);
  }
}

TEST(Decompose, PlaneWaveUnwrapsLinearly) {
  const GridSpec g{-5.0, 5.0, 1000};
  const double p = 7.3, hbar = 0.9;
  const auto psi = sample(g, [&](double x) { return std::exp(cplx(0.0, p * x / hbar)); });
  for (bool rtl : {false, true}) {
    const auto f = madelung_fields(psi, 2.0, hbar, {1e-8, rtl});
    const double offset = f.S_M[0] - p * g.x(0);
    for (int i = 0; i < g.n_points; ++i) {
      EXPECT_NEAR(f.S_M[static_cast<std::size_t>(i)] - p * g.x(i), offset, 1e-11);
      EXPECT_NEAR(f.v[static_cast<std::size_t>(i)], p / 2.0, 1e-9);
      EXPECT_NEAR(f.Q[static_cast<std::size_t>(i)], 0.0, 1e-9);
    }
  }
}

TEST(Decompose, CoherentStateVelocityAtQuarterPeriod) {
  const GridSpec g{-8.0, 8.0, 2048};
  const double l = 2.0, t = M_PI / 2.0;
  const auto psi = sample(g, [&](double x) { return ref::coherent_state(1.0, 1.0, 1.0, l, x, t); }, t);
  const auto f = madelung_fields(psi, 1.0, 1.0);
  // At a quarter period the packet sits at the origin moving with -l w.
  for (int i = 0; i < g.n_points; ++i) {
    if (std::abs(g.x(i)) < 3.0) {
      EXPECT_NEAR(f.v[static_cast<std::size_t>(i)], -l, 1e-4);
    }
  }
}

TEST(QuantumPotential, GaussianClosedForm) {
  const GridSpec g{-6.0, 6.0, 2048};
  const double alpha = 0.7, m = 1.3, hbar = 0.8;
  const auto psi = sample(g, [&](double x) { return std::exp(-x * x / (4.0 * alpha * alpha)); });
  const auto f = madelung_fields(psi, m, hbar);
  for (int i = 1; i + 1 < g.n_points; ++i) {
    if (f.node[static_cast<std::size_t>(i)]) continue;
    const double x = g.x(i);
    const double expect = -(hbar * hbar / (2.0 * m)) * (x * x / (4.0 * std::pow(alpha, 4)) - 1.0 / (2.0 * alpha * alpha));
    EXPECT_NEAR(f.Q[static_cast<std::size_t>(i)], expect, 1e-4 * (1.0 + std::abs(expect)));
  }
  const int mid = g.n_points / 2;
  EXPECT_GT(f.Q[static_cast<std::size_t>(mid)], 0.0);
}

TEST(QuantumPotential, NodesCopyNearestValue) {
  const GridSpec g{-10.0, 10.0, 401};
  const auto psi = sample(g, [](double x) { return std::exp(-x * x); });
  const auto f = madelung_fields(psi, 1.0, 1.0);
  int first_good = 0;
  while (f.node[static_cast<std::size_t>(first_good)]) ++first_good;
  ASSERT_GT(first_good, 0);
  for (int i = 0; i < first_good; ++i) EXPECT_EQ(f.Q[static_cast<std::size_t>(i)], f.Q[static_cast<std::size_t>(first_good)]);
}

TEST(QuantumPotential, GlobalPhaseAndScaleInvariance) {
  const GridSpec g{-8.0, 8.0, 1024};
  const auto psi = sample(g, [](double x) { return ref::coherent_state(1.0, 1.3, 1.0, 1.5, x, 0.4); });
  const auto base = madelung_fields(psi, 1.0, 1.0);
  // Multiplying by i swaps components exactly, so |psi| is reproduced bit for bit.
  WavefunctionGrid turned = psi;
  for (auto& z : turned.values) z *= cplx(0.0, 1.0);
  EXPECT_EQ(madelung_fields(turned, 1.0, 1.0).Q, base.Q);
  // A generic phase changes |psi| only at rounding level.
  WavefunctionGrid rotated = psi, scaled = psi;
  for (auto& z : rotated.values) z *= std::polar(1.0, 0.731);
  for (auto& z : scaled.values) z *= 3.7;
  const auto qr = madelung_fields(rotated, 1.0, 1.0).Q, qs = madelung_fields(scaled, 1.0, 1.0).Q;
  for (std::size_t i = 0; i < base.Q.size(); ++i) {
    EXPECT_NEAR(qr[i], base.Q[i], 1e-6 * (1.0 + std::abs(base.Q[i])));
    EXPECT_NEAR(qs[i], base.Q[i], 1e-6 * (1.0 + std::abs(base.Q[i])));
  }
}

TEST(QuantumPotential, SelfConsistentForRealNodelessStates) {
  const GridSpec g{-3.0, 3.0, 601};
  const auto psi = sample(g, [](double x) { return 2.0 + std::cos(x) + 0.3 * x; });
  const auto f = madelung_fields(psi, 1.0, 1.0);
  std::vector<double> re(static_cast<std::size_t>(g.n_points));
  for (int i = 0; i < g.n_points; ++i) re[static_cast<std::size_t>(i)] = psi[i].real();
  const auto d2 = detail::second_derivative(re, g.dx());
  for (std::size_t i = 0; i < re.size(); ++i) EXPECT_NEAR(f.Q[i] * re[i], -0.5 * d2[i], 1e-12);
}

TEST(Continuity, StationaryEigenstate) {
  // Ground state of the grid Hamiltonian evolves by a phase only.
  const auto small = diagonalize(PotentialModel::harmonic(1.0, 1.0, 1.0), GridSpec{-10.0, 10.0, 512});
  WavefunctionGrid psi(small.grid);
  for (int i = 0; i < psi.size(); ++i) psi[i] = small.vec(0, i) / std::sqrt(small.grid.dx());
  const auto later = spectral_evolve(small, psi, 0.01);
  const auto r = continuity_residual(madelung_fields(psi, 1.0, 1.0), madelung_fields(later, 1.0, 1.0), 0.01);
  double peak = 0.0;
  for (const auto& z : psi.values) peak = std::max(peak, std::norm(z));
  for (int i = 0; i < psi.size(); ++i) {
    if (std::norm(psi[i]) > 1e-12 * peak) {
      EXPECT_LT(std::abs(r[static_cast<std::size_t>(i)]), 1e-6);
    }
  }
}

TEST(Continuity, FreeGaussianSecondOrder) {
  auto residual = [](int n, double dt) {
    const GridSpec g{-8.0, 8.0, n};
    auto at = [&](double t) {
      return sample(g, [&](double x) { return ref::free_gaussian(1.0, 1.0, 0.7, 0.0, x, t); }, t);
    };
    const double t0 = 0.4;
    return residual_norm(madelung_fields(at(t0), 1.0, 1.0), madelung_fields(at(t0 + dt), 1.0, 1.0), dt);
  };
  const double coarse = residual(257, 0.02), fine = residual(513, 0.01);
  EXPECT_GT(coarse / fine, 3.5);
}

TEST(Continuity, CoherentStateSmall) {
  const GridSpec g{-8.0, 8.0, 2048};
  auto at = [&](double t) {
    return sample(g, [&](double x) { return ref::coherent_state(1.0, 1.0, 1.0, 2.0, x, t); }, t);
  };
  EXPECT_LT(residual_norm(madelung_fields(at(0.3), 1.0, 1.0), madelung_fields(at(0.301), 1.0, 1.0), 1e-3), 1e-3);
}

TEST(Continuity, Errors) {
  const auto a = madelung_fields(WavefunctionGrid(GridSpec{-1.0, 1.0, 64}), 1.0, 1.0);
  const auto b = madelung_fields(WavefunctionGrid(GridSpec{-1.0, 1.0, 65}), 1.0, 1.0);
  EXPECT_THROW(continuity_residual(a, b, 0.1), GridMismatch);
  EXPECT_THROW(continuity_residual(a, a, 0.0), InvalidArgument);
  WavefunctionGrid bad(GridSpec{-1.0, 1.0, 64});
  bad[3] = cplx(NAN, 0.0);
  EXPECT_THROW(decompose(bad, 1.0), InvalidArgument);
}
