#pragma once

// Classical boundary-value paths x_cl(t) between (x0, 0) and (xt, T): a generic
// shooting solver and the first-order Lindstedt-Poincare closed form for the
// quartic double well.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "pifluid/error.hpp"
#include "pifluid/potential.hpp"
#include "pifluid/quadrature.hpp"

namespace pifluid {

using cplx = std::complex<double>;

enum class PathSource { Shooting, LindstedtPoincare };

struct PathSample {
  double t = 0.0;
  cplx x;
  cplx v;
};

/// Integration constants of the perturbative double-well path
/// x(t) = A cos(w t + phi) - (lambda K A^3 / 8 w0^2) cos(w t + 3 phi) sin^2(w t),
/// w = w0 + 3 lambda A^2 / (8 w0).
struct LindstedtConstants {
  cplx amplitude_A;
  cplx phase_phi0;
  cplx omega0;
  cplx omega;
};

/// Double-well parameters in the M, a, lambda, K, hbar form.
struct DoubleWellParams {
  double mass = 1.0;
  double a = -2.0;
  double lambda = 1e-4;
  double K = 1.0;
  double hbar = 1.0;

  PotentialModel potential() const { return PotentialModel::double_well(mass, a, lambda, K, hbar); }
  cplx omega0() const { return std::sqrt(cplx(a, 0.0)); }
};

inline cplx lindstedt_path(const LindstedtConstants& c, const PotentialModel& potential, double t);
inline cplx lindstedt_velocity(const LindstedtConstants& c, const PotentialModel& potential, double t);

namespace detail {

// Quintic Hermite basis on s in [0, 1] (values) and its s-derivative.
struct HermiteWeights {
  std::array<double, 6> value{};
  std::array<double, 6> slope{};

  explicit HermiteWeights(double s) {
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    value = {1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
             s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
             0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
             10.0 * s3 - 15.0 * s4 + 6.0 * s5,
             -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
             0.5 * s3 - s4 + 0.5 * s5};
    slope = {-30.0 * s2 + 60.0 * s3 - 30.0 * s4,
             1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
             s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4,
             30.0 * s2 - 60.0 * s3 + 30.0 * s4,
             -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
             1.5 * s2 - 4.0 * s3 + 2.5 * s4};
  }
};

}  // namespace detail

/// A sampled classical path on a uniform time grid. Shooting paths are real
/// and interpolated between samples with quintic Hermite polynomials built
/// from position, velocity and the exact acceleration -V'(x)/M; perturbative
/// paths are complex-valued and evaluated in closed form.
class ClassicalPath {
 public:
  static constexpr int kDefaultSamples = 512;
  static constexpr int kNodesPerInterval = 3;

  static ClassicalPath from_shooting(const PotentialModel& potential, double x0, double duration,
                                     std::vector<double> positions, std::vector<double> velocities) {
    ClassicalPath p;
    p.source_ = PathSource::Shooting;
    p.potential_ = potential;
    p.duration_ = duration;
    p.x0_ = x0;
    p.xt_ = positions.back();
    p.xr_ = std::move(positions);
    p.vr_ = std::move(velocities);
    p.ar_.resize(p.xr_.size());
    for (std::size_t i = 0; i < p.xr_.size(); ++i) {
      p.ar_[i] = potential.force(p.xr_[i]) / potential.mass();
    }
    p.finish();
    return p;
  }

  static ClassicalPath from_lindstedt(const PotentialModel& potential, const LindstedtConstants& c,
                                      double x0, double xt, double duration,
                                      int samples = kDefaultSamples) {
    if (samples < 2) throw InvalidArgument("a path needs at least two samples");
    ClassicalPath p;
    p.source_ = PathSource::LindstedtPoincare;
    p.potential_ = potential;
    p.duration_ = duration;
    p.x0_ = x0;
    p.xt_ = xt;
    p.constants_ = c;
    p.lambda_k_ = 4.0 * potential.coefficient(4) / potential.mass();
    p.xc_.resize(static_cast<std::size_t>(samples));
    p.vc_.resize(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
      const double t = duration * i / (samples - 1);
      p.xc_[static_cast<std::size_t>(i)] = lindstedt_path(c, potential, t);
      p.vc_[static_cast<std::size_t>(i)] = lindstedt_velocity(c, potential, t);
    }
    p.finish();
    return p;
  }

  PathSource source() const noexcept { return source_; }
  double x0() const noexcept { return x0_; }
  double xt() const noexcept { return xt_; }
  double duration() const noexcept { return duration_; }
  std::size_t sample_count() const noexcept { return n_; }
  double dt() const noexcept { return duration_ / static_cast<double>(n_ - 1); }
  const PotentialModel& potential() const noexcept { return potential_; }
  const std::optional<LindstedtConstants>& constants() const noexcept { return constants_; }

  /// Classical action along the path; complex for perturbative paths.
  /// Computed on first use.
  cplx action() const;

  /// Shooting bookkeeping: converged initial velocity and d x(T) / d v0.
  double initial_velocity() const noexcept { return initial_velocity_; }
  double terminal_sensitivity() const noexcept { return sensitivity_; }
  int newton_iterations() const noexcept { return iterations_; }

  std::vector<PathSample> samples() const {
    std::vector<PathSample> out(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      out[i].t = duration_ * static_cast<double>(i) / static_cast<double>(n_ - 1);
      out[i].x = sample_x(i);
      out[i].v = sample_v(i);
    }
    return out;
  }

  cplx position(double t) const {
    if (source_ == PathSource::LindstedtPoincare) return lindstedt_path(*constants_, potential_, t);
    double x, v;
    hermite(t, x, v);
    return x;
  }

  cplx velocity(double t) const {
    if (source_ == PathSource::LindstedtPoincare) {
      return lindstedt_velocity(*constants_, potential_, t);
    }
    double x, v;
    hermite(t, x, v);
    return v;
  }

  /// Composite Gauss-Legendre over the sample grid up to `upto`, calling
  /// f(weight, x, v) at every node. x and v are double for shooting paths
  /// and std::complex<double> for perturbative ones.
  template <class F>
  void visit_nodes(double upto, F&& f) const {
    upto = std::clamp(upto, 0.0, duration_);
    const auto& rule = gauss_legendre(kNodesPerInterval);
    const double h = dt();
    const auto full = static_cast<std::size_t>(std::min<double>(std::floor(upto / h), n_ - 1));
    if (source_ == PathSource::Shooting) {
      static const std::array<detail::HermiteWeights, kNodesPerInterval> basis = [] {
        const auto& r = gauss_legendre(kNodesPerInterval);
        return std::array<detail::HermiteWeights, kNodesPerInterval>{
            detail::HermiteWeights(0.5 * (1.0 + r.nodes[0])),
            detail::HermiteWeights(0.5 * (1.0 + r.nodes[1])),
            detail::HermiteWeights(0.5 * (1.0 + r.nodes[2]))};
      }();
      for (std::size_t i = 0; i < full; ++i) {
        for (int q = 0; q < kNodesPerInterval; ++q) {
          double x, v;
          hermite_on(i, h, basis[static_cast<std::size_t>(q)], x, v);
          f(0.5 * h * rule.weights[static_cast<std::size_t>(q)], x, v);
        }
      }
      const double t0 = static_cast<double>(full) * h;
      const double rem = upto - t0;
      if (rem > 1e-14 * duration_ && full < n_ - 1) {
        for (int q = 0; q < kNodesPerInterval; ++q) {
          const double s = rem * 0.5 * (1.0 + rule.nodes[static_cast<std::size_t>(q)]) / h;
          double x, v;
          hermite_on(full, h, detail::HermiteWeights(s), x, v);
          f(0.5 * rem * rule.weights[static_cast<std::size_t>(q)], x, v);
        }
      }
      return;
    }
    auto closed = [&](double a, double b) {
      for (int q = 0; q < kNodesPerInterval; ++q) {
        const double t = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[static_cast<std::size_t>(q)];
        f(0.5 * (b - a) * rule.weights[static_cast<std::size_t>(q)],
          lindstedt_path(*constants_, potential_, t), lindstedt_velocity(*constants_, potential_, t));
      }
    };
    for (std::size_t i = 0; i < full; ++i) {
      closed(static_cast<double>(i) * h, static_cast<double>(i + 1) * h);
    }
    const double t0 = static_cast<double>(full) * h;
    if (upto - t0 > 1e-14 * duration_) closed(t0, upto);
  }

  // Internal: set by the shooting solver.
  void set_shooting_info(double v0, double sensitivity, int iterations) {
    initial_velocity_ = v0;
    sensitivity_ = sensitivity;
    iterations_ = iterations;
  }

 private:
  ClassicalPath() = default;

  cplx sample_x(std::size_t i) const { return source_ == PathSource::Shooting ? cplx(xr_[i]) : xc_[i]; }
  cplx sample_v(std::size_t i) const { return source_ == PathSource::Shooting ? cplx(vr_[i]) : vc_[i]; }

  void hermite_on(std::size_t i, double h, const detail::HermiteWeights& w, double& x, double& v) const {
    const double hv0 = h * vr_[i], hv1 = h * vr_[i + 1];
    const double ha0 = h * h * ar_[i], ha1 = h * h * ar_[i + 1];
    x = w.value[0] * xr_[i] + w.value[1] * hv0 + w.value[2] * ha0 + w.value[3] * xr_[i + 1] +
        w.value[4] * hv1 + w.value[5] * ha1;
    v = (w.slope[0] * xr_[i] + w.slope[1] * hv0 + w.slope[2] * ha0 + w.slope[3] * xr_[i + 1] +
         w.slope[4] * hv1 + w.slope[5] * ha1) /
        h;
  }

  void hermite(double t, double& x, double& v) const {
    const double h = dt();
    t = std::clamp(t, 0.0, duration_);
    auto i = static_cast<std::size_t>(std::floor(t / h));
    if (i >= n_ - 1) i = n_ - 2;
    hermite_on(i, h, detail::HermiteWeights((t - static_cast<double>(i) * h) / h), x, v);
  }

  void finish();

  PathSource source_ = PathSource::Shooting;
  PotentialModel potential_;
  double x0_ = 0.0, xt_ = 0.0, duration_ = 0.0;
  std::size_t n_ = 0;
  std::vector<double> xr_, vr_, ar_;
  std::vector<cplx> xc_, vc_;
  std::optional<LindstedtConstants> constants_;
  double lambda_k_ = 0.0;
  mutable std::optional<cplx> action_;
  double initial_velocity_ = 0.0, sensitivity_ = 0.0;
  int iterations_ = 0;
};

/// Integral of M v^2 / 2 - V(x) along the path by composite Gauss-Legendre.
inline cplx classical_action(const ClassicalPath& path, const PotentialModel& potential) {
  cplx acc(0.0);
  const double m = potential.mass();
  path.visit_nodes(path.duration(), [&](double w, auto x, auto v) {
    acc += w * (0.5 * m * v * v - potential.derivative(0, x));
  });
  return acc;
}

inline void ClassicalPath::finish() { n_ = source_ == PathSource::Shooting ? xr_.size() : xc_.size(); }

inline cplx ClassicalPath::action() const {
  if (!action_) action_ = classical_action(*this, potential_);
  return *action_;
}

// ---------------------------------------------------------------------------
// Shooting

enum class ShootingJacobian {
  Variational,       // d x(T) / d v0 integrated alongside the path
  CentralDifference  // two extra IVPs at v0 +- 1e-6 max(1, |v0|)
};

struct ShootingOptions {
  int samples = ClassicalPath::kDefaultSamples;
  int max_iterations = 50;
  ShootingJacobian jacobian = ShootingJacobian::Variational;
};

namespace detail {

/// Fixed-step RK4 for M x'' = -V'(x), carried together with the variational
/// equation M d'' = -V''(x) d, d(0) = 0, d'(0) = 1, so that `sensitivity`
/// is d x(T) / d v0. Optionally records every step.
inline void integrate_ivp(const PotentialModel& potential, double x0, double v0, double duration,
                          int steps, double& x_end, double& v_end, double* sensitivity = nullptr,
                          std::vector<double>* xs = nullptr, std::vector<double>* vs = nullptr) {
  const double h = duration / steps;
  const double inv_m = 1.0 / potential.mass();
  double x = x0, v = v0, d = 0.0, e = 1.0;
  if (xs) {
    xs->assign(static_cast<std::size_t>(steps + 1), 0.0);
    vs->assign(static_cast<std::size_t>(steps + 1), 0.0);
    (*xs)[0] = x;
    (*vs)[0] = v;
  }
  for (int s = 0; s < steps; ++s) {
    const double a1 = potential.force(x) * inv_m;
    const double x2 = x + 0.5 * h * v, v2 = v + 0.5 * h * a1;
    const double a2 = potential.force(x2) * inv_m;
    const double x3 = x + 0.5 * h * v2, v3 = v + 0.5 * h * a2;
    const double a3 = potential.force(x3) * inv_m;
    const double x4 = x + h * v3, v4 = v + h * a3;
    const double a4 = potential.force(x4) * inv_m;
    if (sensitivity) {
      const double k1 = -potential.derivative(2, x) * inv_m;
      const double k2 = -potential.derivative(2, x2) * inv_m;
      const double k3 = -potential.derivative(2, x3) * inv_m;
      const double k4 = -potential.derivative(2, x4) * inv_m;
      const double d2 = d + 0.5 * h * e, e2 = e + 0.5 * h * k1 * d;
      const double d3 = d + 0.5 * h * e2, e3 = e + 0.5 * h * k2 * d2;
      const double d4 = d + h * e3, e4 = e + h * k3 * d3;
      const double de = h / 6.0 * (k1 * d + 2.0 * k2 * d2 + 2.0 * k3 * d3 + k4 * d4);
      d += h / 6.0 * (e + 2.0 * e2 + 2.0 * e3 + e4);
      e += de;
    }
    x += h / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4);
    v += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    if (xs) {
      (*xs)[static_cast<std::size_t>(s + 1)] = x;
      (*vs)[static_cast<std::size_t>(s + 1)] = v;
    }
  }
  x_end = x;
  v_end = v;
  if (sensitivity) *sensitivity = d;
}

}  // namespace detail

/// Damped Newton on the terminal-position map v0 -> x(T). By default RK4
/// carries the variational equation, so every trial also yields the exact
/// Jacobian of the discrete map. The returned path's branch is the one
/// reached from `guess_v0`.
inline ClassicalPath solve_bvp_shooting(const PotentialModel& potential, double x0, double xt,
                                        double duration, double guess_v0, double tol,
                                        const ShootingOptions& options = {}) {
  if (!(duration > 0.0)) throw InvalidArgument("duration must be positive");
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (options.samples < 2) throw InvalidArgument("a path needs at least two samples");
  const int steps = options.samples - 1;

  struct Trial {
    double v0, residual, jacobian;
    std::vector<double> xs, vs;
  };
  auto shoot = [&](double v0, Trial& out) {
    double xe, ve;
    out.v0 = v0;
    if (options.jacobian == ShootingJacobian::Variational) {
      detail::integrate_ivp(potential, x0, v0, duration, steps, xe, ve, &out.jacobian, &out.xs, &out.vs);
    } else {
      detail::integrate_ivp(potential, x0, v0, duration, steps, xe, ve, nullptr, &out.xs, &out.vs);
      const double h = 1e-6 * std::max(1.0, std::abs(v0));
      double xp, xm, unused;
      detail::integrate_ivp(potential, x0, v0 + h, duration, steps, xp, unused);
      detail::integrate_ivp(potential, x0, v0 - h, duration, steps, xm, unused);
      out.jacobian = (xp - xm) / (2.0 * h);
    }
    out.residual = xe - xt;
  };

  Trial cur, trial;
  shoot(guess_v0, cur);
  int iter = 0;
  for (; iter < options.max_iterations && !(std::abs(cur.residual) < tol); ++iter) {
    if (!std::isfinite(cur.jacobian) || cur.jacobian == 0.0 || !std::isfinite(cur.residual)) {
      throw NoConvergence("singular shooting Jacobian");
    }
    const double dv = -cur.residual / cur.jacobian;
    double damping = 1.0;
    shoot(cur.v0 + dv, trial);
    while (!(std::abs(trial.residual) < std::abs(cur.residual)) && damping > 1.0 / 1024.0) {
      damping *= 0.5;
      shoot(cur.v0 + damping * dv, trial);
    }
    std::swap(cur, trial);
  }
  if (!(std::abs(cur.residual) < tol)) {
    throw NoConvergence("shooting did not reach tolerance in " + std::to_string(options.max_iterations) +
                        " iterations (residual " + std::to_string(cur.residual) + ")");
  }
  auto path = ClassicalPath::from_shooting(potential, x0, duration, std::move(cur.xs), std::move(cur.vs));
  path.set_shooting_info(cur.v0, cur.jacobian, iter);
  return path;
}

// ---------------------------------------------------------------------------
// Lindstedt-Poincare closed form

inline cplx lindstedt_path(const LindstedtConstants& c, const PotentialModel& potential, double t) {
  const double lambda_k = 4.0 * potential.coefficient(4) / potential.mass();
  const cplx wt = c.omega * t;
  const cplx s = std::sin(wt);
  const cplx a3 = c.amplitude_A * c.amplitude_A * c.amplitude_A;
  const cplx corr = lambda_k * a3 / (8.0 * c.omega0 * c.omega0);
  return c.amplitude_A * std::cos(wt + c.phase_phi0) - corr * std::cos(wt + 3.0 * c.phase_phi0) * s * s;
}

inline cplx lindstedt_velocity(const LindstedtConstants& c, const PotentialModel& potential, double t) {
  const double lambda_k = 4.0 * potential.coefficient(4) / potential.mass();
  const cplx w = c.omega;
  const cplx wt = w * t;
  const cplx s = std::sin(wt), co = std::cos(wt);
  const cplx a3 = c.amplitude_A * c.amplitude_A * c.amplitude_A;
  const cplx corr = lambda_k * a3 / (8.0 * c.omega0 * c.omega0);
  const cplx c3 = std::cos(wt + 3.0 * c.phase_phi0), s3 = std::sin(wt + 3.0 * c.phase_phi0);
  return -c.amplitude_A * w * std::sin(wt + c.phase_phi0) -
         corr * w * (-s3 * s * s + 2.0 * c3 * s * co);
}

/// Amplitude and phase constant from x(0) = x_i and the zeroth-order
/// x(T) = x_f. Among the (A, phi) pairs generated by the closed form
///   A = sqrt(x_f^2 + x_i^2 - 2 x_f x_i cos(w0 T)) csc(w0 T),
///   phi = arccos(x_i sin(w0 T) / sqrt(...)),
/// the one meeting both boundary values is chosen, preferring Re A >= 0 and
/// then Re phi in [0, pi].
inline LindstedtConstants fit_boundary_constants(double x_i, double x_f, double duration, cplx omega0,
                                                 double lambda = 0.0) {
  const cplx wt = omega0 * duration;
  const cplx sn = std::sin(wt), cs = std::cos(wt);
  if (std::abs(omega0.imag()) < 1e-14 * std::max(1.0, std::abs(omega0)) && std::abs(sn) < 1e-10) {
    throw ConjugatePoint("w0 T is a multiple of pi; the amplitude diverges");
  }
  if (std::abs(sn) == 0.0) throw ConjugatePoint("sin(w0 T) vanishes");

  const cplx disc = x_f * x_f + x_i * x_i - 2.0 * x_f * x_i * cs;
  const cplx root = std::sqrt(disc);
  const double scale = std::max({1.0, std::abs(x_i), std::abs(x_f)});

  LindstedtConstants out;
  out.omega0 = omega0;
  if (std::abs(root) <= 1e-300) {
    if (x_i != 0.0 || x_f != 0.0) throw InvalidArgument("degenerate boundary data for the amplitude fit");
    out.amplitude_A = 0.0;
    out.phase_phi0 = std::numbers::pi / 2.0;
    out.omega = omega0;
    return out;
  }

  struct Candidate {
    cplx A, phi;
    double residual;
    int preference;
  };
  std::vector<Candidate> candidates;
  for (double sa : {1.0, -1.0}) {
    const cplx amp = sa * root / sn;
    const cplx base = std::acos(cplx(x_i) / amp);
    for (double sp : {1.0, -1.0}) {
      const cplx phi = sp * base;
      const double r0 = std::abs(amp * std::cos(phi) - x_i);
      const double r1 = std::abs(amp * std::cos(wt + phi) - x_f);
      int pref = 0;
      if (amp.real() < -1e-12 * std::abs(amp)) pref += 2;
      if (phi.real() < -1e-12 || phi.real() > std::numbers::pi + 1e-12) pref += 1;
      candidates.push_back({amp, phi, std::max(r0, r1) / scale, pref});
    }
  }
  const double best_residual =
      std::min_element(candidates.begin(), candidates.end(), [](auto& a, auto& b) {
        return a.residual < b.residual;
      })->residual;
  const double accept = std::max(1e-9, 10.0 * best_residual);
  const Candidate* chosen = nullptr;
  for (const auto& c : candidates) {
    if (c.residual <= accept && (!chosen || c.preference < chosen->preference)) chosen = &c;
  }
  out.amplitude_A = chosen->A;
  out.phase_phi0 = chosen->phi;
  out.omega = omega0 + 3.0 * lambda * out.amplitude_A * out.amplitude_A / (8.0 * omega0);
  return out;
}

/// Lindstedt-Poincare path for the double well between (x0, 0) and (xt, T).
inline ClassicalPath solve_lindstedt(const DoubleWellParams& dw, double x0, double xt, double duration,
                                     int samples = ClassicalPath::kDefaultSamples) {
  const auto c = fit_boundary_constants(x0, xt, duration, dw.omega0(), dw.lambda);
  return ClassicalPath::from_lindstedt(dw.potential(), c, x0, xt, duration, samples);
}

}  // namespace pifluid
