#pragma once

// Propagator K(xt, T; x0, 0) as a series in moments of the potential's
// higher derivatives along the classical path:
//
//   K = sqrt(M / 2 pi i hbar T) exp(i S / hbar)
//       * sum_k (1/k!) (-i/hbar)^k sum_{m_1..m_k even >= 4} prod_a I_{m_a} / m_a!
//           * (hbar / -iM)^N  g^(N)(phi),          N = sum_a m_a / 2
//
// with I_m = int V^(m)(x_cl) / w^(m/2) dt, w = sqrt(V''(x_cl)/M),
// phi = int w dt and g(phi) = sqrt(phi / sin phi).

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "pifluid/classical.hpp"
#include "pifluid/error.hpp"
#include "pifluid/jet.hpp"
#include "pifluid/potential.hpp"

namespace pifluid {

inline constexpr int kMaxKernelOrder = 12;
inline constexpr int kMaxJetOrder = 64;
inline constexpr double kCausticThreshold = 1e-8;

enum class PathChoice { Shooting, LindstedtPoincare };

struct KernelParams {
  int k_max = 4;
  double tol = 1e-12;
  int jet_order = 0;  // 0 picks the smallest order the series needs
  int path_samples = ClassicalPath::kDefaultSamples;
  double bvp_tol = 1e-11;
};

/// Taylor coefficients of g(phi) = sqrt(phi / sin phi) about `center`.
struct PhaseJet {
  cplx center;
  std::vector<cplx> coefficients;

  cplx derivative(std::size_t n) const {
    double fact = 1.0;
    for (std::size_t k = 2; k <= n; ++k) fact *= static_cast<double>(k);
    return coefficients.at(n) * fact;
  }
};

inline PhaseJet g_jet(cplx phi, int order) {
  if (order < 0 || order > kMaxJetOrder) throw InvalidArgument("jet order must lie in [0, 64]");
  const auto n = static_cast<std::size_t>(order);
  const Jet<cplx> u = Jet<cplx>::variable(n, phi);
  Jet<cplx> sinc(n);
  if (std::abs(phi) <= 1.0) {
    // sin(u)/u = sum_j (-1)^j u^(2j) / (2j+1)!, summed as a jet. With
    // u = phi + h, u^2 = phi^2 + 2 phi h + h^2, so each power is a
    // three-term update in place.
    const cplx p2 = phi * phi, two_p = 2.0 * phi;
    Jet<cplx> term = Jet<cplx>::constant(n, 1.0);
    sinc = term;
    for (int j = 1; j < 200; ++j) {
      const cplx scale(-1.0 / ((2.0 * j) * (2.0 * j + 1.0)));
      double mag2 = 0.0;
      for (std::size_t i = n + 1; i-- > 0;) {
        cplx v = p2 * term[i];
        if (i >= 1) v += two_p * term[i - 1];
        if (i >= 2) v += term[i - 2];
        term[i] = scale * v;
        sinc[i] += term[i];
        mag2 = std::max(mag2, std::norm(term[i]));
      }
      if (mag2 < 1e-36 && 2 * j > order) break;
    }
  } else {
    if (std::abs(std::sin(phi)) < kCausticThreshold) {
      throw NearCaustic("sin(phi) vanishes at phi = (" + std::to_string(phi.real()) + ", " +
                        std::to_string(phi.imag()) + ")");
    }
    Jet<cplx> s, c;
    sincos(u, s, c);
    sinc = s / u;
  }
  const Jet<cplx> g = sqrt(Jet<cplx>::constant(n, 1.0) / sinc);
  return {phi, g.coefficients()};
}

namespace detail {

inline cplx frequency_from_curvature(double curvature) {
  return curvature >= 0.0 ? cplx(std::sqrt(curvature), 0.0) : cplx(0.0, std::sqrt(-curvature));
}
// Same branch as the real overload: Re w >= 0 when Re w^2 >= 0, else Im w >= 0.
// The principal root alone flips sign across a -0 imaginary part.
inline cplx frequency_from_curvature(cplx curvature) {
  cplx w = std::sqrt(curvature);
  if (curvature.real() < 0.0 && w.imag() < 0.0) w = -w;
  return w;
}

}  // namespace detail

inline cplx instantaneous_frequency(const PotentialModel& potential, const ClassicalPath& path, double tprime) {
  if (path.source() == PathSource::Shooting) {
    return detail::frequency_from_curvature(potential.derivative(2, path.position(tprime).real()) /
                                            potential.mass());
  }
  return detail::frequency_from_curvature(potential.derivative(2, path.position(tprime)) / potential.mass());
}

/// Action, accumulated phase and moment integrals from one quadrature sweep.
struct PathIntegrals {
  cplx action;
  cplx phi;
  std::array<cplx, kMaxPotentialDegree + 1> moments{};  // indexed by m
};

inline PathIntegrals integrate_along_path(const PotentialModel& potential, const ClassicalPath& path,
                                          double upto, bool with_moments = true) {
  PathIntegrals out;
  const double m = potential.mass();
  const int deg = with_moments ? potential.degree() : 0;
  path.visit_nodes(upto, [&](double w, auto x, auto v) {
    out.action += w * (0.5 * m * v * v - potential.derivative(0, x));
    const cplx omega = detail::frequency_from_curvature(potential.derivative(2, x) / m);
    out.phi += w * omega;
    if (deg >= 4) {
      if (omega == cplx(0.0)) throw FrequencyZero("w(t) vanishes on the classical path");
      cplx power = omega * omega;
      for (int order = 4; order <= deg; order += 2) {
        out.moments[static_cast<std::size_t>(order)] += w * potential.derivative(order, x) / power;
        power *= omega;
      }
    }
  });
  return out;
}

inline cplx accumulated_phase(const PotentialModel& potential, const ClassicalPath& path, double upto) {
  return integrate_along_path(potential, path, upto, false).phi;
}

inline cplx moment_integral(const PotentialModel& potential, const ClassicalPath& path, int m) {
  if (m < 4 || m % 2 != 0) throw InvalidArgument("moment order must be even and at least 4");
  if (m > potential.degree()) return 0.0;
  return integrate_along_path(potential, path, path.duration()).moments[static_cast<std::size_t>(m)];
}

/// int_0^T dt / w(t)^2 for w^2 = a + 3 lambda K x^2 with x ~ A cos(w t + phi0),
/// i.e. w^2 = p + q cos(2 w t + 2 phi0), p = a + 3 lambda K A^2 / 2,
/// q = 3 lambda K A^2 / 2. Antiderivative in u = w t + phi0:
///   arctan(r tan u) / (r (p + q)),  r = sqrt((p - q) / (p + q)),
/// with multiples of pi / (r (p + q)) restored wherever a principal branch
/// jumps, so the result is continuous in T.
inline cplx closed_form_inv_omega2(const LindstedtConstants& c, const PotentialModel& potential,
                                   double duration) {
  const double mass = potential.mass();
  const double a = 2.0 * potential.coefficient(2) / mass;
  const double lambda_k = 4.0 * potential.coefficient(4) / mass;
  const cplx A2 = c.amplitude_A * c.amplitude_A;
  const cplx q = 1.5 * lambda_k * A2;
  const cplx p = a + q;
  const cplx disc = p * p - q * q;
  if (std::abs(disc) <= 1e-14 * std::max(1.0, std::abs(p * p))) {
    throw DiscriminantZero("p^2 - q^2 vanishes");
  }
  if (duration == 0.0) return 0.0;
  if (std::abs(p + q) == 0.0) throw DiscriminantZero("p + q vanishes");
  const cplx r = std::sqrt((p - q) / (p + q));
  const cplx denom = r * (p + q);
  const cplx w = c.omega;
  if (std::abs(w) == 0.0) throw FrequencyZero("renormalized frequency vanishes");
  auto antiderivative = [&](double t) { return std::atan(r * std::tan(w * t + c.phase_phi0)) / denom; };
  auto integrand = [&](double t) { return 1.0 / (p + q * std::cos(2.0 * (w * t + c.phase_phi0))); };

  const int pieces = 64 + static_cast<int>(std::ceil(16.0 * std::abs(w) * duration / std::numbers::pi));
  const double h = duration / pieces;
  const cplx branch = std::numbers::pi / denom;
  cplx total = 0.0;
  cplx prev = antiderivative(0.0);
  for (int i = 1; i <= pieces; ++i) {
    const double t1 = i * h;
    const cplx cur = antiderivative(t1);
    cplx step = (cur - prev) / w;
    // Simpson estimate of the same piece decides the branch offset.
    const cplx expected =
        h / 6.0 * (integrand(t1 - h) + 4.0 * integrand(t1 - 0.5 * h) + integrand(t1));
    const double jumps = std::round(((expected - step) * w / branch).real());
    step += jumps * branch / w;
    total += step;
    prev = cur;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Series evaluation

struct KernelTerm {
  int k = 0;
  cplx term;     // dimensionless, multiplies the prefactor
  cplx partial;  // running sum through this k
};

struct KernelResult {
  cplx value;
  cplx prefactor;  // sqrt(M / 2 pi i hbar T) exp(i S / hbar)
  cplx action;
  cplx phi;
  std::vector<KernelTerm> terms;
  bool converged = false;
};

inline cplx free_prefactor(double mass, double hbar, double duration) {
  return std::sqrt(cplx(0.0, -mass / (2.0 * std::numbers::pi * hbar * duration)));
}

namespace detail {

inline int required_jet_order(const KernelParams& params, int degree) {
  const int needed = std::max(2 * params.k_max, params.k_max * (degree / 2));
  if (params.jet_order == 0) {
    if (needed > kMaxJetOrder) throw InvalidArgument("series needs a jet order above 64");
    return needed;
  }
  if (params.jet_order < needed) throw InvalidArgument("jet_order below the largest N the series reaches");
  return params.jet_order;
}

inline void validate(const KernelParams& params) {
  if (params.k_max < 0 || params.k_max > kMaxKernelOrder) throw InvalidArgument("k_max must lie in [0, 12]");
  if (!(params.tol > 0.0)) throw InvalidArgument("tol must be positive");
  if (params.jet_order < 0 || params.jet_order > kMaxJetOrder) throw InvalidArgument("jet_order must lie in [0, 64]");
}

/// Appends term and checks decay; returns true once the stopping rule fires.
inline bool accept_term(KernelResult& r, int k, cplx term, double tol) {
  const cplx previous = r.terms.empty() ? cplx(0.0) : r.terms.back().term;
  if (k >= 1 && term != cplx(0.0) && previous != cplx(0.0) && std::abs(term) > std::abs(previous)) {
    throw NoConvergence("series term " + std::to_string(k) + " exceeds term " + std::to_string(k - 1));
  }
  const cplx partial = (r.terms.empty() ? cplx(0.0) : r.terms.back().partial) + term;
  r.terms.push_back({k, term, partial});
  return k >= 1 && std::abs(term) < tol * std::abs(partial);
}

}  // namespace detail

/// General series evaluated along an already-solved classical path.
inline KernelResult kernel_series_on_path(const PotentialModel& potential, const ClassicalPath& path,
                                          const KernelParams& params) {
  detail::validate(params);
  const int deg = potential.degree();
  const int order = detail::required_jet_order(params, deg);
  const double mass = potential.mass(), hbar = potential.hbar();
  const double T = path.duration();

  const PathIntegrals in = integrate_along_path(potential, path, T, params.k_max > 0);
  const PhaseJet g = g_jet(in.phi, order);

  KernelResult r;
  r.action = in.action;
  r.phi = in.phi;
  r.prefactor = free_prefactor(mass, hbar, T) * std::exp(cplx(0.0, 1.0) * in.action / hbar);
  r.converged = detail::accept_term(r, 0, g.coefficients[0], params.tol) || params.k_max == 0;

  // base(z) = sum_{m even >= 4} I_m / m! z^(m/2); the k-th power collects
  // every ordered tuple (m_1..m_k) by N.
  const auto width = static_cast<std::size_t>(order + 1);
  std::vector<cplx> base(width, 0.0);
  bool any_moment = false;
  double fact = 24.0;
  for (int m = 4; m <= deg; ++m) {
    if (m > 4) fact *= m;
    if (m % 2 == 0 && m / 2 <= order) {
      base[static_cast<std::size_t>(m / 2)] = in.moments[static_cast<std::size_t>(m)] / fact;
      any_moment = any_moment || base[static_cast<std::size_t>(m / 2)] != cplx(0.0);
    }
  }

  // weights[N] = (hbar / -iM)^N g^(N)(phi)
  std::vector<cplx> weights(width);
  const cplx unit = hbar / (cplx(0.0, -1.0) * mass);
  cplx unit_pow = 1.0;
  for (std::size_t n = 0; n < width; ++n) {
    weights[n] = unit_pow * g.derivative(n);
    unit_pow *= unit;
  }

  std::vector<cplx> power(width, 0.0);
  power[0] = 1.0;
  const cplx minus_i_over_hbar(0.0, -1.0 / hbar);
  cplx k_factor = 1.0;
  for (int k = 1; k <= params.k_max && !r.converged; ++k) {
    cplx term = 0.0;
    if (any_moment) {
      std::vector<cplx> next(width, 0.0);
      for (std::size_t i = 0; i < width; ++i) {
        if (power[i] == cplx(0.0)) continue;
        for (std::size_t j = 2; i + j < width; ++j) next[i + j] += power[i] * base[j];
      }
      power.swap(next);
      k_factor *= minus_i_over_hbar / static_cast<double>(k);
      for (std::size_t n = 0; n < width; ++n) term += weights[n] * power[n];
      term *= k_factor;
    }
    if (term == cplx(0.0)) {
      // Every moment vanishes, so every higher term does as well.
      r.terms.push_back({k, term, r.terms.back().partial});
      r.converged = true;
      break;
    }
    r.converged = detail::accept_term(r, k, term, params.tol);
  }
  r.value = r.prefactor * r.terms.back().partial;
  return r;
}

/// Lindstedt-Poincare constants for a double well held only as a potential
/// (c2 = M a / 2, c4 = M lambda K / 4); the frequency shift uses lambda K.
inline LindstedtConstants lindstedt_constants(const PotentialModel& potential, double x0, double xt,
                                              double duration) {
  const double a = 2.0 * potential.coefficient(2) / potential.mass();
  const double lambda_k = 4.0 * potential.coefficient(4) / potential.mass();
  return fit_boundary_constants(x0, xt, duration, std::sqrt(cplx(a, 0.0)), lambda_k);
}

inline ClassicalPath solve_path(const PotentialModel& potential, double x0, double xt, double duration,
                                const KernelParams& params, PathChoice choice,
                                std::optional<double> guess_v0 = std::nullopt) {
  if (choice == PathChoice::LindstedtPoincare) {
    return ClassicalPath::from_lindstedt(potential, lindstedt_constants(potential, x0, xt, duration), x0, xt,
                                         duration, params.path_samples);
  }
  const double cold = (xt - x0) / duration;
  ShootingOptions opt;
  opt.samples = params.path_samples;
  if (guess_v0) {
    try {
      return solve_bvp_shooting(potential, x0, xt, duration, *guess_v0, params.bvp_tol, opt);
    } catch (const NoConvergence&) {
      if (*guess_v0 == cold) throw;
    }
  }
  return solve_bvp_shooting(potential, x0, xt, duration, cold, params.bvp_tol, opt);
}

inline KernelResult kernel_series_detailed(const PotentialModel& potential, double x0, double xt,
                                           double duration, const KernelParams& params,
                                           PathChoice path_source = PathChoice::Shooting) {
  if (!(duration > 0.0)) throw InvalidArgument("duration must be positive");
  detail::validate(params);
  return kernel_series_on_path(potential, solve_path(potential, x0, xt, duration, params, path_source), params);
}

inline cplx kernel_series(const PotentialModel& potential, double x0, double xt, double duration,
                          const KernelParams& params, PathChoice path_source = PathChoice::Shooting) {
  return kernel_series_detailed(potential, x0, xt, duration, params, path_source).value;
}

/// Perturbative double-well propagator:
///   K = sqrt(M / 2 pi i hbar T) exp(i S / hbar)
///       * sum_k (1/k!) (i hbar lambda K / 4M)^k [int w^-2 dt]^k g^(2k)(phi).
inline KernelResult kernel_double_well_detailed(const LindstedtConstants& constants,
                                                const PotentialModel& potential, double x0, double xt,
                                                double duration, const KernelParams& params) {
  if (!(duration > 0.0)) throw InvalidArgument("duration must be positive");
  detail::validate(params);
  const int order = params.jet_order == 0 ? 2 * params.k_max : params.jet_order;
  if (order < 2 * params.k_max) throw InvalidArgument("jet_order must be at least 2 k_max");
  const double mass = potential.mass(), hbar = potential.hbar();
  const double lambda_k = 4.0 * potential.coefficient(4) / mass;

  const auto path = ClassicalPath::from_lindstedt(potential, constants, x0, xt, duration, params.path_samples);
  const PathIntegrals in = integrate_along_path(potential, path, duration, false);
  const PhaseJet g = g_jet(in.phi, order);

  KernelResult r;
  r.action = in.action;
  r.phi = in.phi;
  r.prefactor = free_prefactor(mass, hbar, duration) * std::exp(cplx(0.0, 1.0) * in.action / hbar);
  r.converged = detail::accept_term(r, 0, g.coefficients[0], params.tol) || params.k_max == 0;
  if (params.k_max > 0 && lambda_k != 0.0) {
    const cplx j = closed_form_inv_omega2(constants, potential, duration);
    const cplx step = cplx(0.0, hbar * lambda_k / (4.0 * mass)) * j;
    cplx coeff = 1.0;
    for (int k = 1; k <= params.k_max && !r.converged; ++k) {
      coeff *= step / static_cast<double>(k);
      r.converged = detail::accept_term(r, k, coeff * g.derivative(static_cast<std::size_t>(2 * k)), params.tol);
    }
  } else {
    r.converged = true;
  }
  r.value = r.prefactor * r.terms.back().partial;
  return r;
}

inline cplx kernel_double_well(const LindstedtConstants& constants, const PotentialModel& potential, double x0,
                               double xt, double duration, const KernelParams& params) {
  return kernel_double_well_detailed(constants, potential, x0, xt, duration, params).value;
}

// ---------------------------------------------------------------------------
// Closed-form kernels

inline cplx free_kernel(double mass, double hbar, double x0, double xt, double duration) {
  if (!(duration > 0.0)) throw InvalidArgument("duration must be positive");
  const double dx = xt - x0;
  return free_prefactor(mass, hbar, duration) * std::exp(cplx(0.0, mass * dx * dx / (2.0 * hbar * duration)));
}

/// Exact propagator of V = c0 + c2 x^2 (c2 may be negative), principal branch
/// of the prefactor square root.
inline cplx quadratic_kernel(const PotentialModel& potential, double x0, double xt, double duration) {
  if (!potential.is_quadratic_or_lower() || potential.coefficient(1) != 0.0) {
    throw InvalidArgument("exact quadratic kernel needs V = c0 + c2 x^2");
  }
  if (!(duration > 0.0)) throw InvalidArgument("duration must be positive");
  const double mass = potential.mass(), hbar = potential.hbar();
  const double c2 = potential.coefficient(2);
  const cplx offset = std::exp(cplx(0.0, -potential.coefficient(0) * duration / hbar));
  if (c2 == 0.0) return offset * free_kernel(mass, hbar, x0, xt, duration);
  const cplx w = detail::frequency_from_curvature(2.0 * c2 / mass);
  const cplx s = std::sin(w * duration);
  if (std::abs(s) < kCausticThreshold) throw NearCaustic("sin(w T) vanishes");
  const cplx action = mass * w / (2.0 * s) * ((x0 * x0 + xt * xt) * std::cos(w * duration) - 2.0 * x0 * xt);
  return offset * std::sqrt(mass * w / (2.0 * std::numbers::pi * cplx(0.0, 1.0) * hbar * s)) *
         std::exp(cplx(0.0, 1.0) * action / hbar);
}

/// Callable kernel for convolution loops: solves the classical path per
/// pair, warm-starting Newton from the previous solutions.
class SeriesKernel {
 public:
  SeriesKernel(PotentialModel potential, KernelParams params, PathChoice choice = PathChoice::Shooting)
      : potential_(std::move(potential)), params_(params), choice_(choice) {
    detail::validate(params_);
  }

  cplx operator()(double x0, double xt, double duration) {
    std::optional<double> guess;
    // Warm starts only along one output point, so each output value is
    // independent of evaluation order.
    if (choice_ == PathChoice::Shooting && have_ >= 1 && last_[0].t == duration && last_[0].xt == xt) {
      const auto& a = last_[0];
      const auto& b = last_[1];
      if (have_ >= 2 && b.t == duration && b.xt == xt && a.x0 != b.x0) {
        guess = a.v0 + (a.v0 - b.v0) * (x0 - a.x0) / (a.x0 - b.x0);
      } else {
        guess = a.v0 - (x0 - a.x0) / duration;
      }
    }
    const auto path = solve_path(potential_, x0, xt, duration, params_, choice_, guess);
    if (choice_ == PathChoice::Shooting) {
      last_[1] = last_[0];
      last_[0] = {x0, xt, duration, path.initial_velocity()};
      have_ = std::min(have_ + 1, 2);
    }
    return kernel_series_on_path(potential_, path, params_).value;
  }

  const PotentialModel& potential() const noexcept { return potential_; }
  const KernelParams& params() const noexcept { return params_; }

 private:
  struct Solved {
    double x0 = 0.0, xt = 0.0, t = 0.0, v0 = 0.0;
  };
  PotentialModel potential_;
  KernelParams params_;
  PathChoice choice_;
  Solved last_[2];
  int have_ = 0;
};

}  // namespace pifluid
