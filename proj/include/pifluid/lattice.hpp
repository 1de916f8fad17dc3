#pragma once

// Finite time-lattice form of the fluctuation integral, before the
// continuum limit. With n interior slices y_1..y_n (y_0 = y_{n+1} = 0) and
// eps = T / (n + 1), the quadratic part of the exponent is -y^T A y / 2 with
//   A = -(i / hbar) (M / eps * tridiag(-1, 2, -1) - eps * diag(V''(x_j))).
// The k-th term of the expansion of the anharmonic part is
//   (1/k!) (-i eps / hbar)^k < (sum_j sum_m V^(m)(x_j) y_j^m / m!)^k >,
// where <.> is the normalized Gaussian average. Here the power is expanded
// by the multinomial theorem, first over how many factors carry each m
// (P_m) and then over how those are spread across the slices (l^j_m); each
// resulting monomial is averaged by Wick's theorem.

#include <complex>
#include <functional>
#include <map>
#include <vector>

#include "pifluid/error.hpp"
#include "pifluid/potential.hpp"

namespace pifluid {

struct LatticeProblem {
  PotentialModel potential;
  double duration = 1.0;
  std::vector<double> x_cl;  // classical path at the n interior slices
};

using ComplexMatrix = std::vector<std::vector<std::complex<double>>>;

inline double lattice_spacing(const LatticeProblem& p) {
  return p.duration / static_cast<double>(p.x_cl.size() + 1);
}

inline ComplexMatrix lattice_quadratic_form(const LatticeProblem& p) {
  const std::size_t n = p.x_cl.size();
  if (n == 0) throw InvalidArgument("lattice needs at least one interior slice");
  const double eps = lattice_spacing(p);
  const double mass = p.potential.mass(), hbar = p.potential.hbar();
  const std::complex<double> scale(0.0, -1.0 / hbar);
  ComplexMatrix a(n, std::vector<std::complex<double>>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    a[j][j] = scale * (2.0 * mass / eps - eps * p.potential.derivative(2, p.x_cl[j]));
    if (j + 1 < n) a[j][j + 1] = a[j + 1][j] = scale * (-mass / eps);
  }
  return a;
}

/// Inverse by Gauss-Jordan with partial pivoting.
inline ComplexMatrix invert(ComplexMatrix a) {
  const std::size_t n = a.size();
  ComplexMatrix inv(n, std::vector<std::complex<double>>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) == 0.0) throw InvalidArgument("singular lattice quadratic form");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const auto d = a[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] /= d;
      inv[col][c] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      const auto f = a[r][col];
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

/// Normalized Gaussian moments <prod_j y_j^e_j> for covariance C, by the
/// recursion <y_i Y> = sum_j C_ij <d Y / d y_j>.
class GaussianMoments {
 public:
  explicit GaussianMoments(ComplexMatrix covariance) : c_(std::move(covariance)) {}

  std::complex<double> operator()(std::vector<int> exponents) {
    int total = 0;
    for (int e : exponents) total += e;
    if (total == 0) return 1.0;
    if (total % 2 == 1) return 0.0;
    if (auto it = memo_.find(exponents); it != memo_.end()) return it->second;
    std::size_t i = 0;
    while (exponents[i] == 0) ++i;
    auto rest = exponents;
    --rest[i];
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < rest.size(); ++j) {
      if (rest[j] == 0) continue;
      const double mult = rest[j];
      --rest[j];
      acc += c_[i][j] * mult * (*this)(rest);
      ++rest[j];
    }
    memo_.emplace(std::move(exponents), acc);
    return acc;
  }

 private:
  ComplexMatrix c_;
  std::map<std::vector<int>, std::complex<double>> memo_;
};

namespace detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Calls f(parts) for every composition of `total` into parts.size() non-negative parts.
inline void for_each_composition(int total, std::size_t parts, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> cur(parts, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t idx, int left) {
    if (idx + 1 == parts) {
      cur[idx] = left;
      f(cur);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      cur[idx] = v;
      rec(idx + 1, left - v);
    }
  };
  if (parts == 0) {
    if (total == 0) f(cur);
    return;
  }
  rec(0, total);
}

}  // namespace detail

/// k-th lattice term. With `even_only` the m-sum keeps only even m >= 4;
/// otherwise every m >= 3 up to the potential's degree contributes.
inline std::complex<double> lattice_series_term(const LatticeProblem& p, int k, bool even_only = false) {
  if (k < 0) throw InvalidArgument("negative series order");
  const std::size_t n = p.x_cl.size();
  const double eps = lattice_spacing(p), hbar = p.potential.hbar();
  std::vector<int> orders;
  for (int m = even_only ? 4 : 3; m <= p.potential.degree(); m += even_only ? 2 : 1) orders.push_back(m);

  GaussianMoments moments(invert(lattice_quadratic_form(p)));

  // Expand (sum_m sum_j V^(m)_j y_j^m / m!)^k.
  std::complex<double> average = 0.0;
  detail::for_each_composition(k, orders.size(), [&](const std::vector<int>& pm) {
    // k! / prod P_m!  *  prod 1 / m!^P_m
    double outer = detail::factorial(k);
    for (std::size_t a = 0; a < orders.size(); ++a) {
      outer /= detail::factorial(pm[a]) * std::pow(detail::factorial(orders[a]), pm[a]);
    }
    // For each m, spread P_m over the slices (l^j_m), accumulating monomials.
    std::map<std::vector<int>, std::complex<double>> monomials{{std::vector<int>(n, 0), 1.0}};
    for (std::size_t a = 0; a < orders.size(); ++a) {
      const int m = orders[a];
      std::map<std::vector<int>, std::complex<double>> next;
      detail::for_each_composition(pm[a], n, [&](const std::vector<int>& l) {
        double coeff = detail::factorial(pm[a]);
        std::complex<double> value = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
          coeff /= detail::factorial(l[j]);
          value *= std::pow(p.potential.derivative(m, p.x_cl[j]), l[j]);
        }
        for (const auto& [exps, c] : monomials) {
          auto e = exps;
          for (std::size_t j = 0; j < n; ++j) e[j] += m * l[j];
          next[e] += c * coeff * value;
        }
      });
      monomials.swap(next);
    }
    for (const auto& [exps, c] : monomials) average += outer * c * moments(exps);
  });

  const std::complex<double> step(0.0, -eps / hbar);
  return std::pow(step, k) / detail::factorial(k) * average;
}

}  // namespace pifluid
