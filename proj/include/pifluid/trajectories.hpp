#pragma once

// Bohmian trajectories dx/dt = v(x, t) through a time series of Madelung
// snapshots, with v interpolated linearly in x and t.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "pifluid/error.hpp"
#include "pifluid/madelung.hpp"
#include "pifluid/potential.hpp"

namespace pifluid {

struct TrajectoryOptions {
  double barrier = 0.0;
  double v_cap_factor = 10.0;   // |v| <= factor * max non-node speed
  double cells_per_step = 0.5;  // substep so that v_cap * h <= this * dx
  int min_substeps = 4;         // per snapshot interval
  double cadence_cells = 8.0;   // require max|v| * snapshot spacing < this * dx
};

struct TrajectorySet {
  std::vector<double> seeds;
  std::vector<double> times;
  std::vector<std::vector<double>> positions;  // [seed][time]
  std::vector<char> crossed_barrier;           // ever on the other side of the barrier
  std::vector<char> left_grid;                 // LeftGrid: clamped at an edge from then on
  std::vector<int> capped_steps;               // RK4 stages that hit v_cap
  double v_cap = 0.0;
};

namespace detail {

struct LeftGridEvent {};

/// Linear interpolation of a node field at x; x must lie inside the grid.
inline double interpolate(const GridSpec& g, const std::vector<double>& f, double x) {
  const double s = (x - g.x_min) / g.dx();
  auto i = static_cast<int>(std::floor(s));
  i = std::clamp(i, 0, g.n_points - 2);
  const double w = s - i;
  return (1.0 - w) * f[static_cast<std::size_t>(i)] + w * f[static_cast<std::size_t>(i + 1)];
}

}  // namespace detail

inline TrajectorySet integrate_trajectories(const std::vector<MadelungFields>& snapshots,
                                            const std::vector<double>& seeds,
                                            const TrajectoryOptions& opt = {}) {
  if (snapshots.size() < 2) throw InvalidArgument("trajectories need at least two snapshots");
  const GridSpec g = snapshots.front().grid;
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    if (!(snapshots[s].grid == g)) throw GridMismatch("snapshots live on different grids");
    if (snapshots[s].v.size() != static_cast<std::size_t>(g.n_points)) {
      throw InvalidArgument("snapshot lacks a velocity field");
    }
    if (s > 0 && !(snapshots[s].time > snapshots[s - 1].time)) {
      throw InvalidArgument("snapshot times must increase strictly");
    }
  }
  for (double x : seeds) {
    if (!(x > g.x_min && x < g.x_max)) throw InvalidArgument("seed outside the grid interior");
  }

  double vmax = 0.0;
  std::vector<double> speed(snapshots.size(), 0.0);
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    const auto& f = snapshots[s];
    for (int i = 0; i < g.n_points; ++i) {
      if (!f.node[static_cast<std::size_t>(i)]) speed[s] = std::max(speed[s], std::abs(f.v[static_cast<std::size_t>(i)]));
    }
    vmax = std::max(vmax, speed[s]);
  }
  for (std::size_t s = 0; s + 1 < snapshots.size(); ++s) {
    const double span = snapshots[s + 1].time - snapshots[s].time;
    if (std::max(speed[s], speed[s + 1]) * span >= opt.cadence_cells * g.dx()) {
      throw InvalidArgument("snapshots too far apart: max|v| dt = " +
                            std::to_string(std::max(speed[s], speed[s + 1]) * span) + " at t = " +
                            std::to_string(snapshots[s].time) + " exceeds " + std::to_string(opt.cadence_cells) +
                            " dx");
    }
  }

  TrajectorySet out;
  out.seeds = seeds;
  out.v_cap = opt.v_cap_factor * vmax;
  for (const auto& f : snapshots) out.times.push_back(f.time);
  const std::size_t ns = seeds.size(), nt = snapshots.size();
  out.positions.assign(ns, std::vector<double>(nt, 0.0));
  out.crossed_barrier.assign(ns, 0);
  out.left_grid.assign(ns, 0);
  out.capped_steps.assign(ns, 0);

  using detail::LeftGridEvent;
  for (std::size_t s = 0; s < ns; ++s) {
    double x = seeds[s];
    out.positions[s][0] = x;
    const bool start_right = x > opt.barrier;
    for (std::size_t k = 0; k + 1 < nt; ++k) {
      if (out.left_grid[s]) {
        out.positions[s][k + 1] = x;
        continue;
      }
      const auto& fa = snapshots[k];
      const auto& fb = snapshots[k + 1];
      const double t0 = fa.time, span = fb.time - fa.time;
      int steps = opt.min_substeps;
      if (out.v_cap > 0.0) {
        steps = std::max(steps, static_cast<int>(std::ceil(out.v_cap * span / (opt.cells_per_step * g.dx()))));
      }
      const double h = span / steps;
      auto vel = [&](double xx, double t) {
        if (!(xx >= g.x_min && xx <= g.x_max)) throw LeftGridEvent{};
        const double w = (t - t0) / span;
        double v = (1.0 - w) * detail::interpolate(g, fa.v, xx) + w * detail::interpolate(g, fb.v, xx);
        if (std::abs(v) > out.v_cap) {
          v = std::copysign(out.v_cap, v);
          ++out.capped_steps[s];
        }
        return v;
      };
      try {
        for (int step = 0; step < steps; ++step) {
          const double t = t0 + step * h;
          const double k1 = vel(x, t);
          const double k2 = vel(x + 0.5 * h * k1, t + 0.5 * h);
          const double k3 = vel(x + 0.5 * h * k2, t + 0.5 * h);
          const double k4 = vel(x + h * k3, t + h);
          x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
          if (!(x > g.x_min && x < g.x_max)) throw LeftGridEvent{};
          if ((x > opt.barrier) != start_right) out.crossed_barrier[s] = 1;
        }
      } catch (const LeftGridEvent&) {
        out.left_grid[s] = 1;
        x = std::clamp(x, g.x_min, g.x_max);
        if (!std::isfinite(x)) x = g.x_min;
      }
      out.positions[s][k + 1] = x;
    }
  }
  return out;
}

/// Seeds drawn from rho by inverting its trapezoid CDF.
inline std::vector<double> sample_seeds(const MadelungFields& f, int count, std::uint64_t rng_seed) {
  if (count < 0) throw InvalidArgument("negative seed count");
  const int n = f.size();
  std::vector<double> cdf(static_cast<std::size_t>(n), 0.0);
  for (int i = 1; i < n; ++i) {
    cdf[static_cast<std::size_t>(i)] = cdf[static_cast<std::size_t>(i - 1)] +
                                       0.5 * (f.rho[static_cast<std::size_t>(i - 1)] + f.rho[static_cast<std::size_t>(i)]) * f.grid.dx();
  }
  const double total = cdf.back();
  if (!(total > 0.0)) throw InvalidArgument("density integrates to zero");
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> uni(0.0, total);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double u = uni(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    auto i = static_cast<int>(it - cdf.begin());
    i = std::clamp(i, 1, n - 1);
    const double c0 = cdf[static_cast<std::size_t>(i - 1)], c1 = cdf[static_cast<std::size_t>(i)];
    const double w = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
    out.push_back(std::clamp(f.x(i - 1) + w * f.grid.dx(), std::nextafter(f.grid.x_min, f.grid.x_max),
                             std::nextafter(f.grid.x_max, f.grid.x_min)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// n seeds evenly spaced over [lo, hi].
inline std::vector<double> uniform_seeds(double lo, double hi, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (count - 1));
  return out;
}

/// Bohmian acceleration -(V' + Q') / M at each seed from one snapshot.
inline std::vector<double> initial_accelerations(const MadelungFields& f, const PotentialModel& potential,
                                                 const std::vector<double>& seeds) {
  const auto dq = detail::first_derivative(f.Q, f.grid.dx());
  std::vector<double> out;
  for (double x : seeds) {
    out.push_back(-(potential.derivative(1, x) + detail::interpolate(f.grid, dq, x)) / potential.mass());
  }
  return out;
}

}  // namespace pifluid
