#pragma once

// Independent reference values for the tests: closed-form propagators and
// wavefunctions written directly from textbook formulas, plus a brute-force
// lattice moment evaluator. Nothing here calls into the library's numerics.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace ref {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline const cplx I(0.0, 1.0);

/// sqrt(M / 2 pi i hbar t) exp(i M (xb - xa)^2 / 2 hbar t).
inline cplx free_kernel(double m, double hbar, double xa, double xb, double t) {
  const double d = xb - xa;
  return std::exp(-I * pi / 4.0) * std::sqrt(m / (2.0 * pi * hbar * t)) * std::exp(I * m * d * d / (2.0 * hbar * t));
}

/// Mehler kernel for V = M w^2 x^2 / 2 with 0 < w t < pi.
inline cplx harmonic_kernel(double m, double w, double hbar, double xa, double xb, double t) {
  const double s = std::sin(w * t), c = std::cos(w * t);
  const double action = m * w / (2.0 * s) * ((xa * xa + xb * xb) * c - 2.0 * xa * xb);
  return std::exp(-I * pi / 4.0) * std::sqrt(m * w / (2.0 * pi * hbar * s)) * std::exp(I * action / hbar);
}

inline double harmonic_action(double m, double w, double xa, double xb, double t) {
  return m * w / (2.0 * std::sin(w * t)) * ((xa * xa + xb * xb) * std::cos(w * t) - 2.0 * xa * xb);
}

/// Free evolution of exp(-(x - l)^2 / (2 a^2)) (amplitude 1 at t = 0).
inline cplx free_gaussian(double m, double hbar, double a, double l, double x, double t) {
  const cplx z = 1.0 + I * hbar * t / (m * a * a);
  const double d = x - l;
  return std::exp(-d * d / (2.0 * a * a * z)) / std::sqrt(z);
}

/// Coherent state of V = M w^2 x^2 / 2 displaced to l at t = 0 (unit norm).
inline cplx coherent_state(double m, double w, double hbar, double l, double x, double t) {
  const double k = m * w / hbar;
  const cplx e = std::exp(-I * w * t);
  const cplx expo = -0.5 * k * (x * x + 0.5 * l * l * (1.0 + e * e) - 2.0 * x * l * e) - 0.5 * I * w * t;
  return std::pow(k / pi, 0.25) * std::exp(expo);
}

/// Width-sigma Gaussian smoothing of the free kernel in its initial point:
/// int K(x, t; y) exp(-(y - x0)^2 / 2 s^2) / sqrt(2 pi s^2) dy.
inline cplx smoothed_free_kernel(double m, double hbar, double x0, double x, double t, double s) {
  // Complex Gaussian integral int exp(-A y^2 + B y + C) dy = sqrt(pi / A) exp(B^2 / 4A + C).
  const cplx c = I * m / (2.0 * hbar * t);
  const cplx A = 1.0 / (2.0 * s * s) - c;
  const cplx B = x0 / (s * s) - 2.0 * c * x;
  const cplx C = -x0 * x0 / (2.0 * s * s) + c * x * x;
  const cplx pref = std::exp(-I * pi / 4.0) * std::sqrt(m / (2.0 * pi * hbar * t)) / std::sqrt(2.0 * pi * s * s);
  return pref * std::sqrt(pi / A) * std::exp(B * B / (4.0 * A) + C);
}

inline cplx smoothed_harmonic_kernel(double m, double w, double hbar, double x0, double x, double t, double s) {
  const double sn = std::sin(w * t), cs = std::cos(w * t);
  // Action = m w / (2 sn) ((y^2 + x^2) cs - 2 x y) in the initial point y.
  const cplx c = I * m * w / (2.0 * hbar * sn);
  const cplx A = 1.0 / (2.0 * s * s) - c * cs;
  const cplx B = x0 / (s * s) - 2.0 * c * x;
  const cplx C = -x0 * x0 / (2.0 * s * s) + c * x * x * cs;
  const cplx pref = std::exp(-I * pi / 4.0) * std::sqrt(m * w / (2.0 * pi * hbar * sn)) / std::sqrt(2.0 * pi * s * s);
  return pref * std::sqrt(pi / A) * std::exp(B * B / (4.0 * A) + C);
}

// ---------------------------------------------------------------------------
// Brute-force lattice oracle

/// <y_{i_1} ... y_{i_p}> for a zero-mean complex Gaussian with covariance C,
/// by summing over every perfect matching of the index list.
inline cplx wick_brute_force(const std::vector<std::vector<cplx>>& C, std::vector<int> idx) {
  if (idx.empty()) return 1.0;
  if (idx.size() % 2) return 0.0;
  const int first = idx[0];
  cplx acc = 0.0;
  for (std::size_t j = 1; j < idx.size(); ++j) {
    std::vector<int> rest;
    for (std::size_t k = 1; k < idx.size(); ++k) {
      if (k != j) rest.push_back(idx[k]);
    }
    acc += C[static_cast<std::size_t>(first)][static_cast<std::size_t>(idx[j])] * wick_brute_force(C, rest);
  }
  return acc;
}

/// Inverse of the 2- or 3-slice lattice form
///   A = -(i / hbar) (M / eps tridiag(-1, 2, -1) - eps diag(vpp)),
/// written out by cofactors.
inline std::vector<std::vector<cplx>> lattice_covariance(double eps, double mass, double hbar,
                                                         const std::vector<double>& vpp) {
  const std::size_t n = vpp.size();
  const cplx s(0.0, -1.0 / hbar);
  std::vector<std::vector<cplx>> a(n, std::vector<cplx>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    a[j][j] = s * (2.0 * mass / eps - eps * vpp[j]);
    if (j + 1 < n) a[j][j + 1] = a[j + 1][j] = -s * mass / eps;
  }
  std::vector<std::vector<cplx>> c(n, std::vector<cplx>(n, 0.0));
  if (n == 2) {
    const cplx det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    c[0][0] = a[1][1] / det;
    c[1][1] = a[0][0] / det;
    c[0][1] = -a[0][1] / det;
    c[1][0] = -a[1][0] / det;
    return c;
  }
  const cplx det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                   a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                   a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const std::size_t r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      c[i][j] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / det;
    }
  }
  return c;
}

inline double fact(int n) { return n <= 1 ? 1.0 : n * fact(n - 1); }

/// (1/2!) (-i eps / hbar)^2 sum_{(j1,m1)} sum_{(j2,m2)} D_{m1}(j1) D_{m2}(j2) / (m1! m2!)
///     < y_j1^m1 y_j2^m2 >,
/// ordered double sum with D_m(j) = V^(m)(x_j), m over `orders`.
inline cplx lattice_k2_brute_force(const std::vector<std::vector<cplx>>& C, double eps, double hbar,
                                   const std::function<double(int, int)>& vder, int n_slices,
                                   const std::vector<int>& orders) {
  cplx acc = 0.0;
  for (int j1 = 0; j1 < n_slices; ++j1) {
    for (int m1 : orders) {
      for (int j2 = 0; j2 < n_slices; ++j2) {
        for (int m2 : orders) {
          std::vector<int> idx(static_cast<std::size_t>(m1), j1);
          idx.insert(idx.end(), static_cast<std::size_t>(m2), j2);
          const double d = vder(m1, j1) * vder(m2, j2) / (fact(m1) * fact(m2));
          if (d == 0.0) continue;
          acc += d * wick_brute_force(C, idx);
        }
      }
    }
  }
  const cplx step = -I * eps / hbar;
  return 0.5 * step * step * acc;
}

}  // namespace ref
