#pragma once

// Reference Schrodinger solvers on the finite-difference Hamiltonian
//   H = diag(V(x_i) + hbar^2 / (M dx^2)) + offdiag(-hbar^2 / (2 M dx^2)),
// with hard walls just outside the grid.

#include <lapacke.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "pifluid/error.hpp"
#include "pifluid/grid.hpp"
#include "pifluid/potential.hpp"

namespace pifluid {

struct GridHamiltonian {
  GridSpec grid;
  std::vector<double> diagonal;
  double off_diagonal = 0.0;
  double hbar = 1.0;

  GridHamiltonian(const PotentialModel& potential, const GridSpec& g) : grid(g), hbar(potential.hbar()) {
    g.validate();
    const double kin = hbar * hbar / (2.0 * potential.mass() * g.dx() * g.dx());
    diagonal.resize(static_cast<std::size_t>(g.n_points));
    for (int i = 0; i < g.n_points; ++i) diagonal[static_cast<std::size_t>(i)] = potential.value(g.x(i)) + 2.0 * kin;
    off_diagonal = -kin;
  }

  std::vector<std::complex<double>> apply(const std::vector<std::complex<double>>& psi) const {
    const std::size_t n = psi.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto acc = diagonal[i] * psi[i];
      if (i > 0) acc += off_diagonal * psi[i - 1];
      if (i + 1 < n) acc += off_diagonal * psi[i + 1];
      out[i] = acc;
    }
    return out;
  }
};

struct CrankNicolsonOptions {
  double contamination_tol = 1e-6;  // edge amplitude relative to the peak
  int check_every = 100;
};

/// Cayley stepping (1 + i H dt / 2 hbar) psi_{n+1} = (1 - i H dt / 2 hbar) psi_n.
/// The step is shrunk slightly so that an integer number of steps spans `duration`.
class CrankNicolson {
 public:
  CrankNicolson(const PotentialModel& potential, const GridSpec& grid, double dt,
                CrankNicolsonOptions options = {})
      : h_(potential, grid), dt_(dt), options_(options) {
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    factor(dt);
  }

  const GridHamiltonian& hamiltonian() const { return h_; }

  WavefunctionGrid evolve(const WavefunctionGrid& psi0, double duration) {
    if (!(psi0.grid == h_.grid)) throw GridMismatch("wavefunction and Hamiltonian grids differ");
    if (duration < 0.0) throw InvalidArgument("duration must be non-negative");
    WavefunctionGrid psi = psi0;
    if (duration == 0.0) return psi;
    const auto steps = static_cast<long>(std::ceil(duration / dt_ - 1e-9));
    const double dt = duration / static_cast<double>(steps);
    if (dt != factored_dt_) factor(dt);
    for (long s = 0; s < steps; ++s) {
      step(psi.values);
      if ((s + 1) % options_.check_every == 0 || s + 1 == steps) check_edges(psi);
    }
    psi.time = psi0.time + duration;
    return psi;
  }

 private:
  void factor(double dt) {
    factored_dt_ = dt;
    const std::size_t n = h_.diagonal.size();
    const std::complex<double> c(0.0, dt / (2.0 * h_.hbar));
    // Thomas factorization of the left-hand matrix.
    off_ = c * h_.off_diagonal;
    diag_.resize(n);
    inv_pivot_.resize(n);
    lower_.resize(n);
    for (std::size_t i = 0; i < n; ++i) diag_[i] = 1.0 + c * h_.diagonal[i];
    std::complex<double> pivot = diag_[0];
    inv_pivot_[0] = 1.0 / pivot;
    for (std::size_t i = 1; i < n; ++i) {
      lower_[i] = off_ * inv_pivot_[i - 1];
      pivot = diag_[i] - lower_[i] * off_;
      inv_pivot_[i] = 1.0 / pivot;
    }
    rhs_diag_.resize(n);
    for (std::size_t i = 0; i < n; ++i) rhs_diag_[i] = 1.0 - c * h_.diagonal[i];
  }

  void step(std::vector<std::complex<double>>& psi) {
    const std::size_t n = psi.size();
    rhs_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto acc = rhs_diag_[i] * psi[i];
      if (i > 0) acc -= off_ * psi[i - 1];
      if (i + 1 < n) acc -= off_ * psi[i + 1];
      rhs_[i] = acc;
    }
    for (std::size_t i = 1; i < n; ++i) rhs_[i] -= lower_[i] * rhs_[i - 1];
    psi[n - 1] = rhs_[n - 1] * inv_pivot_[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) psi[i] = (rhs_[i] - off_ * psi[i + 1]) * inv_pivot_[i];
  }

  void check_edges(const WavefunctionGrid& psi) const {
    if (psi.edge_ratio() > options_.contamination_tol) {
      throw BoundaryContamination("edge amplitude reached " + std::to_string(psi.edge_ratio()) + " of the peak");
    }
  }

  GridHamiltonian h_;
  double dt_;
  CrankNicolsonOptions options_;
  double factored_dt_ = 0.0;
  std::complex<double> off_;
  std::vector<std::complex<double>> diag_, inv_pivot_, lower_, rhs_diag_, rhs_;
};

inline WavefunctionGrid crank_nicolson_evolve(const PotentialModel& potential, const WavefunctionGrid& psi0,
                                              double duration, double dt, CrankNicolsonOptions options = {}) {
  CrankNicolson cn(potential, psi0.grid, dt, options);
  return cn.evolve(psi0, duration);
}

/// All eigenpairs of the grid Hamiltonian; vectors are unit in the
/// discrete sense (sum v_i^2 = 1), stored column-major.
struct SpectralDecomposition {
  GridSpec grid;
  double hbar = 1.0;
  std::vector<double> energies;
  std::vector<double> vectors;  // vectors[n * N + i] = v_n(x_i)

  double vec(int n, int i) const {
    return vectors[static_cast<std::size_t>(n) * static_cast<std::size_t>(grid.n_points) + static_cast<std::size_t>(i)];
  }
};

inline SpectralDecomposition diagonalize(const GridHamiltonian& h) {
  const int n = h.grid.n_points;
  SpectralDecomposition out;
  out.grid = h.grid;
  out.hbar = h.hbar;
  out.energies = h.diagonal;
  std::vector<double> off(static_cast<std::size_t>(std::max(1, n - 1)), h.off_diagonal);
  out.vectors.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  // Implicit QL/QR (dstev). The divide-and-conquer driver in some OpenBLAS
  // builds returns non-orthogonal vectors once n exceeds a few hundred.
  const lapack_int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'V', n, out.energies.data(), off.data(),
                                        out.vectors.data(), n);
  if (info != 0) throw EigenFailure("dstev returned " + std::to_string(info));
  return out;
}

inline SpectralDecomposition diagonalize(const PotentialModel& potential, const GridSpec& grid) {
  return diagonalize(GridHamiltonian(potential, grid));
}

/// psi(t) = sum_n v_n (v_n . psi0) exp(-i E_n t / hbar).
inline WavefunctionGrid spectral_evolve(const SpectralDecomposition& s, const WavefunctionGrid& psi0, double duration) {
  if (!(psi0.grid == s.grid)) throw GridMismatch("wavefunction and spectrum grids differ");
  const int n = s.grid.n_points;
  WavefunctionGrid out(s.grid, psi0.time + duration);
  for (int k = 0; k < n; ++k) {
    std::complex<double> overlap = 0.0;
    for (int i = 0; i < n; ++i) overlap += s.vec(k, i) * psi0[i];
    overlap *= std::exp(std::complex<double>(0.0, -s.energies[static_cast<std::size_t>(k)] * duration / s.hbar));
    if (overlap == 0.0) continue;
    for (int i = 0; i < n; ++i) out[i] += overlap * s.vec(k, i);
  }
  return out;
}

struct PropagatorColumn {
  WavefunctionGrid column;
  double tail = 0.0;  // largest |v_n . source| over the top 5% of the spectrum, relative to the largest overall
};

/// K(x, T; x0, 0) for x0 = grid point `x0_index`. With smoothing > 0 the
/// source is the unit-area Gaussian exp(-(x - x0)^2 / (2 s^2)) / sqrt(2 pi s^2)
/// instead of the grid delta 1/dx, i.e. the column is convolved with it.
inline PropagatorColumn exact_propagator_column(const SpectralDecomposition& s, int x0_index, double duration,
                                                double smoothing = 0.0) {
  const int n = s.grid.n_points;
  if (x0_index < 0 || x0_index >= n) throw InvalidArgument("x0 index outside the grid");
  WavefunctionGrid source(s.grid);
  if (smoothing > 0.0) {
    const double x0 = s.grid.x(x0_index);
    for (int i = 0; i < n; ++i) {
      const double d = (s.grid.x(i) - x0) / smoothing;
      source[i] = std::exp(-0.5 * d * d) / (std::sqrt(2.0 * std::numbers::pi) * smoothing);
    }
  } else {
    source[x0_index] = 1.0 / s.grid.dx();
  }
  PropagatorColumn out;
  out.column = WavefunctionGrid(s.grid, duration);
  double largest = 0.0, tail = 0.0;
  const int tail_start = n - std::max(1, n / 20);
  for (int k = 0; k < n; ++k) {
    std::complex<double> overlap = 0.0;
    for (int i = 0; i < n; ++i) overlap += s.vec(k, i) * source[i];
    largest = std::max(largest, std::abs(overlap));
    if (k >= tail_start) tail = std::max(tail, std::abs(overlap));
    overlap *= std::exp(std::complex<double>(0.0, -s.energies[static_cast<std::size_t>(k)] * duration / s.hbar));
    for (int i = 0; i < n; ++i) out.column[i] += overlap * s.vec(k, i);
  }
  out.tail = largest > 0.0 ? tail / largest : 0.0;
  return out;
}

inline PropagatorColumn exact_propagator_column(const PotentialModel& potential, const GridSpec& grid, int x0_index,
                                                double duration, double smoothing = 0.0) {
  return exact_propagator_column(diagonalize(potential, grid), x0_index, duration, smoothing);
}

}  // namespace pifluid
