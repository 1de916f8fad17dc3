#pragma once

// Truncated power series ("jets"): c[n] is the n-th Taylor coefficient of a
// function about a fixed center, so the n-th derivative is n! * c[n].

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "pifluid/error.hpp"

namespace pifluid {

template <class T>
class Jet {
 public:
  Jet() = default;
  explicit Jet(std::size_t order) : c_(order + 1, T(0.0)) {}

  static Jet constant(std::size_t order, T value) {
    Jet j(order);
    j.c_[0] = value;
    return j;
  }

  /// The independent variable about `center`: center + eps.
  static Jet variable(std::size_t order, T center) {
    Jet j(order);
    j.c_[0] = center;
    if (order >= 1) j.c_[1] = T(1.0);
    return j;
  }

  std::size_t order() const noexcept { return c_.size() - 1; }
  const T& operator[](std::size_t n) const { return c_[n]; }
  T& operator[](std::size_t n) { return c_[n]; }
  const std::vector<T>& coefficients() const noexcept { return c_; }

  /// n-th derivative at the center.
  T derivative(std::size_t n) const {
    double fact = 1.0;
    for (std::size_t k = 2; k <= n; ++k) fact *= static_cast<double>(k);
    return c_[n] * fact;
  }

  Jet& operator+=(const Jet& o) {
    for (std::size_t n = 0; n < c_.size(); ++n) c_[n] += o.c_[n];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t n = 0; n < c_.size(); ++n) c_[n] -= o.c_[n];
    return *this;
  }
  Jet& operator*=(T s) {
    for (auto& v : c_) v *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, T s) { return a *= s; }
  friend Jet operator*(T s, Jet a) { return a *= s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet out(a.order());
    for (std::size_t n = 0; n <= a.order(); ++n) {
      T acc(0.0);
      for (std::size_t k = 0; k <= n; ++k) acc += a.c_[k] * b.c_[n - k];
      out.c_[n] = acc;
    }
    return out;
  }

  friend Jet operator/(const Jet& a, const Jet& b) {
    if (b.c_[0] == T(0.0)) throw InvalidArgument("jet division by a series with zero constant term");
    Jet q(a.order());
    for (std::size_t n = 0; n <= a.order(); ++n) {
      T acc = a.c_[n];
      for (std::size_t k = 1; k <= n; ++k) acc -= b.c_[k] * q.c_[n - k];
      q.c_[n] = acc / b.c_[0];
    }
    return q;
  }

 private:
  std::vector<T> c_;
};

/// Principal square root, continued along the series.
template <class T>
Jet<T> sqrt(const Jet<T>& a) {
  using std::sqrt;
  Jet<T> s(a.order());
  s[0] = sqrt(a[0]);
  if (s[0] == T(0.0)) throw InvalidArgument("jet sqrt at a zero center");
  for (std::size_t n = 1; n <= a.order(); ++n) {
    T acc = a[n];
    for (std::size_t k = 1; k < n; ++k) acc -= s[k] * s[n - k];
    s[n] = acc / (T(2.0) * s[0]);
  }
  return s;
}

/// sin and cos of a jet, by the coupled recurrences s' = c u', c' = -s u'.
template <class T>
void sincos(const Jet<T>& u, Jet<T>& s, Jet<T>& c) {
  using std::cos;
  using std::sin;
  const std::size_t order = u.order();
  s = Jet<T>(order);
  c = Jet<T>(order);
  s[0] = sin(u[0]);
  c[0] = cos(u[0]);
  for (std::size_t n = 1; n <= order; ++n) {
    T sa(0.0), ca(0.0);
    for (std::size_t k = 1; k <= n; ++k) {
      const T ku = static_cast<double>(k) * u[k];
      sa += ku * c[n - k];
      ca += ku * s[n - k];
    }
    s[n] = sa / static_cast<double>(n);
    c[n] = -ca / static_cast<double>(n);
  }
}

}  // namespace pifluid
