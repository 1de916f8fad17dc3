#pragma once

// psi = R exp(i S_M / hbar): amplitude, unwrapped phase, density, velocity
// v = S_M' / M and quantum potential Q = -(hbar^2 / 2M) R'' / R.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "pifluid/error.hpp"
#include "pifluid/grid.hpp"

namespace pifluid {

struct MadelungOptions {
  double node_floor = 1e-8;  // relative to max R
  bool right_to_left = false;
};

struct MadelungFields {
  GridSpec grid;
  double time = 0.0;
  std::vector<double> R, S_M, rho, v, Q;
  std::vector<char> node;  // R below the node floor

  int size() const { return grid.n_points; }
  double x(int i) const { return grid.x(i); }
};

namespace detail {

/// Second-order first derivative; one-sided stencils at the ends.
inline std::vector<double> first_derivative(const std::vector<double>& f, double dx) {
  const std::size_t n = f.size();
  std::vector<double> d(n, 0.0);
  if (n < 3) throw InvalidArgument("derivative needs at least three points");
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
  return d;
}

inline std::vector<double> second_derivative(const std::vector<double>& f, double dx) {
  const std::size_t n = f.size();
  if (n < 4) throw InvalidArgument("second derivative needs at least four points");
  std::vector<double> d(n, 0.0);
  const double h2 = dx * dx;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
  d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
  d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
  return d;
}

}  // namespace detail

/// R, rho, node flags and the unwrapped S_M. Node points take S_M by linear
/// interpolation between the neighbouring non-node values.
inline MadelungFields decompose(const WavefunctionGrid& psi, double hbar, const MadelungOptions& opt = {}) {
  const int n = psi.size();
  MadelungFields f;
  f.grid = psi.grid;
  f.time = psi.time;
  f.R.resize(static_cast<std::size_t>(n));
  f.rho.resize(static_cast<std::size_t>(n));
  f.S_M.assign(static_cast<std::size_t>(n), 0.0);
  f.node.assign(static_cast<std::size_t>(n), 0);
  double rmax = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto z = psi[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InvalidArgument("non-finite amplitude");
    f.R[static_cast<std::size_t>(i)] = std::abs(z);
    f.rho[static_cast<std::size_t>(i)] = f.R[static_cast<std::size_t>(i)] * f.R[static_cast<std::size_t>(i)];
    rmax = std::max(rmax, f.R[static_cast<std::size_t>(i)]);
  }
  const double floor = opt.node_floor * rmax;
  std::vector<int> good;
  for (int i = 0; i < n; ++i) {
    if (f.R[static_cast<std::size_t>(i)] < floor || rmax == 0.0) {
      f.node[static_cast<std::size_t>(i)] = 1;
    } else {
      good.push_back(i);
    }
  }
  if (good.empty()) return f;
  if (opt.right_to_left) std::reverse(good.begin(), good.end());

  const double two_pi = 2.0 * std::numbers::pi;
  double prev = std::arg(psi[good.front()]);
  f.S_M[static_cast<std::size_t>(good.front())] = prev;
  for (std::size_t k = 1; k < good.size(); ++k) {
    double theta = std::arg(psi[good[k]]);
    theta += two_pi * std::round((prev - theta) / two_pi);
    f.S_M[static_cast<std::size_t>(good[k])] = theta;
    prev = theta;
  }
  if (opt.right_to_left) std::reverse(good.begin(), good.end());

  // Fill nodes: constant beyond the outermost good points, linear between.
  for (int i = 0; i < good.front(); ++i) f.S_M[static_cast<std::size_t>(i)] = f.S_M[static_cast<std::size_t>(good.front())];
  for (int i = good.back() + 1; i < n; ++i) f.S_M[static_cast<std::size_t>(i)] = f.S_M[static_cast<std::size_t>(good.back())];
  for (std::size_t k = 0; k + 1 < good.size(); ++k) {
    const int a = good[k], b = good[k + 1];
    for (int i = a + 1; i < b; ++i) {
      const double s = static_cast<double>(i - a) / (b - a);
      f.S_M[static_cast<std::size_t>(i)] =
          (1.0 - s) * f.S_M[static_cast<std::size_t>(a)] + s * f.S_M[static_cast<std::size_t>(b)];
    }
  }
  for (auto& s : f.S_M) s *= hbar;
  return f;
}

inline std::vector<double> velocity_field(const MadelungFields& f, double mass) {
  auto v = detail::first_derivative(f.S_M, f.grid.dx());
  for (auto& x : v) x /= mass;
  return v;
}

/// Q = -(hbar^2 / 2M) R'' / R; node points copy Q from the nearest non-node point.
inline std::vector<double> quantum_potential(const MadelungFields& f, double mass, double hbar) {
  const auto d2 = detail::second_derivative(f.R, f.grid.dx());
  const std::size_t n = f.R.size();
  std::vector<double> q(n, 0.0);
  const double c = -hbar * hbar / (2.0 * mass);
  for (std::size_t i = 0; i < n; ++i) {
    if (!f.node[i]) q[i] = c * d2[i] / f.R[i];
  }
  // Nearest non-node neighbour, scanning both ways.
  std::vector<long> nearest(n, -1);
  long last = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!f.node[i]) last = static_cast<long>(i);
    nearest[i] = last;
  }
  last = -1;
  for (std::size_t j = n; j-- > 0;) {
    if (!f.node[j]) last = static_cast<long>(j);
    if (f.node[j] && last >= 0) {
      const long left = nearest[j];
      if (left < 0 || (last - static_cast<long>(j)) < (static_cast<long>(j) - left)) nearest[j] = last;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (f.node[i] && nearest[i] >= 0) q[i] = q[static_cast<std::size_t>(nearest[i])];
  }
  return q;
}

inline MadelungFields madelung_fields(const WavefunctionGrid& psi, double mass, double hbar,
                                      const MadelungOptions& opt = {}) {
  auto f = decompose(psi, hbar, opt);
  f.v = velocity_field(f, mass);
  f.Q = quantum_potential(f, mass, hbar);
  return f;
}

/// d(rho v)/dx averaged over the two times plus (rho_{t+dt} - rho_t) / dt.
inline std::vector<double> continuity_residual(const MadelungFields& a, const MadelungFields& b, double dt) {
  if (!(a.grid == b.grid)) throw GridMismatch("continuity residual needs identical grids");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (a.v.size() != a.rho.size() || b.v.size() != b.rho.size()) {
    throw InvalidArgument("velocity fields missing; build the fields with madelung_fields");
  }
  const std::size_t n = a.rho.size();
  std::vector<double> fa(n), fb(n);
  for (std::size_t i = 0; i < n; ++i) {
    fa[i] = a.rho[i] * a.v[i];
    fb[i] = b.rho[i] * b.v[i];
  }
  const auto da = detail::first_derivative(fa, a.grid.dx());
  const auto db = detail::first_derivative(fb, a.grid.dx());
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = 0.5 * (da[i] + db[i]) + (b.rho[i] - a.rho[i]) / dt;
  return r;
}

}  // namespace pifluid
