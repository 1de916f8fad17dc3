#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "pifluid/error.hpp"

namespace pifluid {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendreRule(int n) : nodes(static_cast<std::size_t>(n)), weights(static_cast<std::size_t>(n)) {
    for (int i = 0; i < n; ++i) {
      // Tricomi initial guess, then Newton on P_n.
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      // Recompute the derivative at the converged node.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      nodes[static_cast<std::size_t>(i)] = -x;
      weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  int size() const noexcept { return static_cast<int>(nodes.size()); }
};

inline constexpr int kMaxGaussLegendrePoints = 32;

/// Shared rules for 1..kMaxGaussLegendrePoints points; built once.
inline const GaussLegendreRule& gauss_legendre(int n) {
  static const std::vector<GaussLegendreRule> rules = [] {
    std::vector<GaussLegendreRule> out;
    for (int k = 1; k <= kMaxGaussLegendrePoints; ++k) out.emplace_back(k);
    return out;
  }();
  if (n < 1 || n > kMaxGaussLegendrePoints) throw InvalidArgument("unsupported Gauss-Legendre size");
  return rules[static_cast<std::size_t>(n - 1)];
}

/// Composite Gauss-Legendre over [a, b] with `panels` equal panels.
template <class F>
auto integrate_gl(F&& f, double a, double b, int panels, int points = 8) {
  const auto& rule = gauss_legendre(points);
  const double h = (b - a) / panels;
  decltype(f(a)) acc{};
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < rule.size(); ++i) {
      acc += f(mid + 0.5 * h * rule.nodes[static_cast<std::size_t>(i)]) *
             (0.5 * h * rule.weights[static_cast<std::size_t>(i)]);
    }
  }
  return acc;
}

}  // namespace pifluid
