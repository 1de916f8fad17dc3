#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "pifluid/error.hpp"

namespace pifluid {

inline constexpr int kMaxPotentialDegree = 16;

/// One-dimensional polynomial potential V(x) = sum_m c_m x^m together with the
/// particle mass and hbar. Every derivative is evaluated in closed form.
class PotentialModel {
 public:
  PotentialModel() = default;

  PotentialModel(std::span<const double> coefficients, double mass, double hbar)
      : mass_(mass), hbar_(hbar) {
    if (coefficients.size() > static_cast<std::size_t>(kMaxPotentialDegree + 1)) {
      throw InvalidArgument("potential degree exceeds " + std::to_string(kMaxPotentialDegree));
    }
    if (!(mass > 0.0) || !(hbar > 0.0)) {
      throw InvalidArgument("mass and hbar must be positive");
    }
    for (double c : coefficients) {
      if (!std::isfinite(c)) throw InvalidArgument("non-finite potential coefficient");
    }
    std::copy(coefficients.begin(), coefficients.end(), coeffs_.begin());
    update_degree();
  }

  PotentialModel(std::initializer_list<double> coefficients, double mass, double hbar)
      : PotentialModel(std::span<const double>(coefficients.begin(), coefficients.size()), mass,
                       hbar) {}

  /// V(x) = M a x^2 / 2 + M lambda K x^4 / 4.
  static PotentialModel double_well(double mass, double a, double lambda, double k, double hbar) {
    return PotentialModel({0.0, 0.0, 0.5 * mass * a, 0.0, 0.25 * mass * lambda * k}, mass, hbar);
  }

  /// V(x) = M omega0^2 x^2 / 2.
  static PotentialModel harmonic(double mass, double omega0, double hbar) {
    return PotentialModel({0.0, 0.0, 0.5 * mass * omega0 * omega0}, mass, hbar);
  }

  static PotentialModel free_particle(double mass, double hbar) {
    return PotentialModel(std::span<const double>{}, mass, hbar);
  }

  double mass() const noexcept { return mass_; }
  double hbar() const noexcept { return hbar_; }
  int degree() const noexcept { return degree_; }
  std::span<const double> coefficients() const noexcept {
    return {coeffs_.data(), static_cast<std::size_t>(degree_ + 1)};
  }
  double coefficient(int m) const noexcept {
    return (m >= 0 && m <= kMaxPotentialDegree) ? coeffs_[static_cast<std::size_t>(m)] : 0.0;
  }

  /// d^order V / dx^order at x. Orders above the degree return exactly zero.
  template <class T>
  T derivative(int order, T x) const {
    if (order < 0) throw InvalidArgument("negative derivative order");
    if (order > degree_) return T(0.0);
    // Horner on c_m * m!/(m-order)! x^(m-order), highest power first.
    T acc(0.0);
    if (order < kTabulatedOrders) {
      const auto& row = scaled_[static_cast<std::size_t>(order)];
      for (int m = degree_; m >= order; --m) acc = acc * x + T(row[static_cast<std::size_t>(m)]);
      return acc;
    }
    for (int m = degree_; m >= order; --m) {
      acc = acc * x + T(coeffs_[static_cast<std::size_t>(m)] * falling_factorial(m, order));
    }
    return acc;
  }

  double value(double x) const { return derivative(0, x); }
  double force(double x) const { return -derivative(1, x); }

  bool is_quadratic_or_lower() const noexcept { return degree_ <= 2; }

  friend PotentialModel operator+(const PotentialModel& lhs, const PotentialModel& rhs) {
    if (lhs.mass_ != rhs.mass_ || lhs.hbar_ != rhs.hbar_) {
      throw InvalidArgument("cannot add potentials with different mass or hbar");
    }
    PotentialModel out = lhs;
    for (std::size_t m = 0; m < out.coeffs_.size(); ++m) out.coeffs_[m] += rhs.coeffs_[m];
    out.update_degree();
    return out;
  }

 private:
  static double falling_factorial(int m, int order) {
    double f = 1.0;
    for (int j = 0; j < order; ++j) f *= static_cast<double>(m - j);
    return f;
  }

  void update_degree() {
    degree_ = 0;
    for (int m = kMaxPotentialDegree; m > 0; --m) {
      if (coeffs_[static_cast<std::size_t>(m)] != 0.0) {
        degree_ = m;
        break;
      }
    }
    for (int order = 0; order < kTabulatedOrders; ++order) {
      for (int m = 0; m <= kMaxPotentialDegree; ++m) {
        scaled_[static_cast<std::size_t>(order)][static_cast<std::size_t>(m)] =
            m >= order ? coeffs_[static_cast<std::size_t>(m)] * falling_factorial(m, order) : 0.0;
      }
    }
  }

  // c_m m!/(m-order)! for the orders used by the integrators.
  static constexpr int kTabulatedOrders = 3;
  std::array<std::array<double, kMaxPotentialDegree + 1>, kTabulatedOrders> scaled_{};

  std::array<double, kMaxPotentialDegree + 1> coeffs_{};
  int degree_ = 0;
  double mass_ = 1.0;
  double hbar_ = 1.0;
};

}  // namespace pifluid
