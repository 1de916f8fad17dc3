#pragma once

// Initial packets and the Green's-function convolution
//   psi(xt, T) = int K(xt, T; x0, 0) psi0(x0) dx0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "pifluid/error.hpp"
#include "pifluid/grid.hpp"

namespace pifluid {

/// psi0(x) = exp(-(x - l)^2 / (2 alpha^2)) / sqrt(2 pi alpha^2) * exp(i p x / hbar).
/// The prefactor is kept as is unless `renormalize` asks for unit norm.
struct GaussianPacketSpec {
  double alpha = 0.4;
  double center_l = -3.126;
  double momentum = 0.0;
  double hbar = 1.0;
  bool renormalize = false;
};

inline WavefunctionGrid gaussian_packet(const GaussianPacketSpec& spec, const GridSpec& grid) {
  if (!(spec.alpha > 0.0)) throw InvalidArgument("packet width alpha must be positive");
  WavefunctionGrid psi(grid);
  const double pref = 1.0 / std::sqrt(2.0 * std::numbers::pi * spec.alpha * spec.alpha);
  for (int i = 0; i < psi.size(); ++i) {
    const double d = psi.x(i) - spec.center_l;
    psi[i] = pref * std::exp(-d * d / (2.0 * spec.alpha * spec.alpha)) *
             std::exp(std::complex<double>(0.0, spec.momentum * psi.x(i) / spec.hbar));
  }
  // The peak may fall between grid points; compare against the true maximum.
  const double edge = std::max(std::abs(psi.values.front()), std::abs(psi.values.back()));
  if (edge >= 1e-12 * pref) {
    throw GridTooNarrow("packet amplitude at the grid edge is " + std::to_string(edge / pref) + " of its peak");
  }
  if (spec.renormalize) {
    const double s = 1.0 / std::sqrt(psi.norm2());
    for (auto& v : psi.values) v *= s;
  }
  return psi;
}

struct PropagateOptions {
  double support_cut = 1e-12;  // relative to max |psi0|
  double edge_tol = 1e-12;     // psi0 at the grid edges, relative to its peak
  unsigned threads = 0;        // 0 uses the hardware concurrency
};

/// Trapezoid quadrature of K psi0 over the input points with |psi0| above
/// the support cut. Each worker thread owns a copy of `kernel_fn`, so
/// stateful kernels (warm-started path solvers) are safe to pass.
template <class KernelFn>
WavefunctionGrid propagate(const KernelFn& kernel_fn, const WavefunctionGrid& psi0, double duration,
                           const GridSpec& out_grid, const PropagateOptions& options = {}) {
  if (!(duration > 0.0)) throw InvalidArgument("duration must be positive");
  out_grid.validate();
  if (psi0.edge_ratio() >= options.edge_tol) {
    throw GridTooNarrow("input wavefunction does not decay at the grid edges");
  }
  const double cut = options.support_cut * psi0.max_abs();
  std::vector<int> support;
  for (int i = 0; i < psi0.size(); ++i) {
    if (std::abs(psi0[i]) > cut) support.push_back(i);
  }
  std::vector<std::complex<double>> weighted(support.size());
  for (std::size_t s = 0; s < support.size(); ++s) {
    const int i = support[s];
    const double w = (i == 0 || i == psi0.size() - 1) ? 0.5 : 1.0;
    weighted[s] = w * psi0.dx() * psi0[i];
  }

  WavefunctionGrid out(out_grid, psi0.time + duration);
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(out_grid.n_points));

  auto work = [&](int begin, int end) {
    KernelFn kernel = kernel_fn;
    for (int o = begin; o < end; ++o) {
      const double xt = out_grid.x(o);
      std::complex<double> acc = 0.0;
      for (std::size_t s = 0; s < support.size(); ++s) {
        acc += kernel(psi0.x(support[s]), xt, duration) * weighted[s];
      }
      out[o] = acc;
    }
  };

  if (threads <= 1) {
    work(0, out_grid.n_points);
    return out;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const int chunk = (out_grid.n_points + static_cast<int>(threads) - 1) / static_cast<int>(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const int b = static_cast<int>(t) * chunk;
    const int e = std::min(out_grid.n_points, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e] {
      try {
        work(b, e);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Largest input spacing free of quadrature ghosts. The trapezoid sum of the
/// quadratic kernel phase M (x - y)^2 / (2 hbar t) over inputs spaced dx
/// repeats the propagated state at shifts 2 pi hbar t / (M dx); this keeps
/// them beyond every output point. `margin` > 1 adds headroom.
inline double ghost_free_spacing(double mass, double hbar, double duration, double support_lo, double support_hi,
                                 const GridSpec& out_grid, double margin = 1.25) {
  const double reach = std::max(out_grid.x_max - support_lo, support_hi - out_grid.x_min);
  return 2.0 * std::numbers::pi * hbar * duration / (mass * reach * margin);
}

}  // namespace pifluid
