#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "pifluid/error.hpp"

namespace pifluid {

/// Uniform spatial grid, endpoints included.
struct GridSpec {
  double x_min = -8.0;
  double x_max = 8.0;
  int n_points = 2048;

  double dx() const { return (x_max - x_min) / (n_points - 1); }
  double x(int i) const { return x_min + i * dx(); }

  void validate() const {
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
      throw InvalidArgument("grid needs finite x_min < x_max");
    }
    if (n_points < 2) throw InvalidArgument("grid needs at least two points");
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Complex amplitudes psi(x_i) at one time.
struct WavefunctionGrid {
  GridSpec grid;
  std::vector<std::complex<double>> values;
  double time = 0.0;

  WavefunctionGrid() = default;
  explicit WavefunctionGrid(GridSpec g, double t = 0.0)
      : grid(g), values(static_cast<std::size_t>(g.n_points), 0.0), time(t) {
    g.validate();
  }

  int size() const { return grid.n_points; }
  double dx() const { return grid.dx(); }
  double x(int i) const { return grid.x(i); }
  std::complex<double>& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
  const std::complex<double>& operator[](int i) const { return values[static_cast<std::size_t>(i)]; }

  /// sum |psi|^2 dx, trapezoid weights.
  double norm2() const {
    double acc = 0.0;
    for (int i = 0; i < size(); ++i) {
      const double w = (i == 0 || i == size() - 1) ? 0.5 : 1.0;
      acc += w * std::norm(values[static_cast<std::size_t>(i)]);
    }
    return acc * dx();
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v));
    return m;
  }

  /// max(|psi_0|, |psi_{n-1}|) relative to the peak.
  double edge_ratio() const {
    const double peak = max_abs();
    if (peak == 0.0) return 0.0;
    return std::max(std::abs(values.front()), std::abs(values.back())) / peak;
  }

  /// Trapezoid integral of |psi|^2 over x >= x_cut, splitting the cell that
  /// contains x_cut linearly.
  double probability_right_of(double x_cut) const {
    double acc = 0.0;
    for (int i = 0; i + 1 < size(); ++i) {
      const double a = x(i), b = x(i + 1);
      if (b <= x_cut) continue;
      const double ra = std::norm(values[static_cast<std::size_t>(i)]);
      const double rb = std::norm(values[static_cast<std::size_t>(i + 1)]);
      if (a >= x_cut) {
        acc += 0.5 * (ra + rb) * (b - a);
      } else {
        const double s = (x_cut - a) / (b - a);
        const double rc = ra + s * (rb - ra);
        acc += 0.5 * (rc + rb) * (b - x_cut);
      }
    }
    return acc;
  }
};

/// sqrt(sum |a - b|^2 dx) on matching grids.
inline double l2_distance(const WavefunctionGrid& a, const WavefunctionGrid& b) {
  if (!(a.grid == b.grid)) throw GridMismatch("wavefunctions live on different grids");
  WavefunctionGrid d = a;
  for (int i = 0; i < d.size(); ++i) d[i] -= b[i];
  return std::sqrt(d.norm2());
}

}  // namespace pifluid
