#pragma once

// Config-driven orchestration shared by the command-line tool and the
// acceptance suite.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pifluid/classical.hpp"
#include "pifluid/config.hpp"
#include "pifluid/evolve.hpp"
#include "pifluid/kernel.hpp"
#include "pifluid/madelung.hpp"
#include "pifluid/oracle.hpp"
#include "pifluid/trajectories.hpp"

namespace pifluid {

/// Kernel selected by `kernel.mode`, callable as k(x0, xt, T).
class ConfiguredKernel {
 public:
  explicit ConfiguredKernel(const RunConfig& c)
      : mode_(c.kernel.mode),
        potential_(c.potential.model()),
        params_(c.kernel_params()),
        series_(potential_, params_),
        lambda_(c.potential.lambda) {
    if (mode_ == "double-well" && c.potential.kind != "double_well") {
      throw ConfigError("kernel.mode double-well needs potential.kind double_well");
    }
    if (mode_ == "harmonic-exact" && (!potential_.is_quadratic_or_lower() || potential_.coefficient(1) != 0.0)) {
      throw ConfigError("kernel.mode harmonic-exact needs V = c0 + c2 x^2");
    }
    omega0_ = std::sqrt(cplx(2.0 * potential_.coefficient(2) / potential_.mass(), 0.0));
  }

  cplx operator()(double x0, double xt, double duration) {
    if (mode_ == "general") return series_(x0, xt, duration);
    if (mode_ == "free") return free_kernel(potential_.mass(), potential_.hbar(), x0, xt, duration);
    if (mode_ == "harmonic-exact") return quadratic_kernel(potential_, x0, xt, duration);
    const auto c = fit_boundary_constants(x0, xt, duration, omega0_, lambda_);
    return kernel_double_well(c, potential_, x0, xt, duration, params_);
  }

  /// Value plus the per-k term table.
  KernelResult detailed(double x0, double xt, double duration) const {
    if (mode_ == "general") return kernel_series_detailed(potential_, x0, xt, duration, params_);
    if (mode_ == "double-well") {
      const auto c = fit_boundary_constants(x0, xt, duration, omega0_, lambda_);
      return kernel_double_well_detailed(c, potential_, x0, xt, duration, params_);
    }
    KernelResult r;
    r.value = mode_ == "free" ? free_kernel(potential_.mass(), potential_.hbar(), x0, xt, duration)
                              : quadratic_kernel(potential_, x0, xt, duration);
    r.prefactor = r.value;
    r.terms.push_back({0, 1.0, 1.0});
    r.converged = true;
    return r;
  }

  const PotentialModel& potential() const { return potential_; }

 private:
  std::string mode_;
  PotentialModel potential_;
  KernelParams params_;
  SeriesKernel series_;
  double lambda_;
  cplx omega0_;
};

inline WavefunctionGrid initial_state(const RunConfig& c) { return gaussian_packet(c.packet_spec(), c.grid); }

/// psi0 sampled finely enough that the kernel quadrature to time t puts no
/// ghost copy on `out_grid`; the run grid itself when it already does.
inline WavefunctionGrid kernel_input(const RunConfig& c, const WavefunctionGrid& psi0, double t,
                                     const GridSpec& out_grid) {
  const double cut = c.kernel.support_cut * psi0.max_abs();
  int lo = psi0.size(), hi = -1;
  for (int i = 0; i < psi0.size(); ++i) {
    if (std::abs(psi0[i]) > cut) lo = std::min(lo, i), hi = i;
  }
  if (hi < 0) return psi0;
  const double dx = ghost_free_spacing(c.potential.mass, c.potential.hbar, t, psi0.x(lo), psi0.x(hi), out_grid);
  if (psi0.dx() <= dx) return psi0;
  GridSpec fine = c.grid;
  fine.n_points = static_cast<int>(std::ceil((fine.x_max - fine.x_min) / dx)) + 1;
  return gaussian_packet(c.packet_spec(), fine);
}

/// psi at every requested time. Kernel runs propagate psi0 (on the run grid)
/// directly to each time and may write to a different output grid; the
/// oracles step through the times on the run grid.
inline std::vector<WavefunctionGrid> evolve_snapshots(const RunConfig& c, const std::vector<double>& times,
                                                      const GridSpec& out_grid) {
  const auto psi0 = initial_state(c);
  const auto potential = c.potential.model();
  std::vector<WavefunctionGrid> out;
  if (c.evolve.method == "kernel") {
    ConfiguredKernel kernel(c);
    PropagateOptions opt;
    opt.support_cut = c.kernel.support_cut;
    for (double t : times) {
      if (t == 0.0) {
        out.push_back(out_grid == c.grid ? psi0 : gaussian_packet(c.packet_spec(), out_grid));
      } else {
        out.push_back(propagate(kernel, kernel_input(c, psi0, t, out_grid), t, out_grid, opt));
      }
    }
    return out;
  }
  if (!(out_grid == c.grid)) throw ConfigError("a separate output grid needs evolve.method kernel");
  if (c.evolve.method == "crank_nicolson") {
    CrankNicolson cn(potential, c.grid, c.oracle.dt);
    WavefunctionGrid psi = psi0;
    double now = 0.0;
    for (double t : times) {
      psi = cn.evolve(psi, t - now);
      psi.time = t;
      now = t;
      out.push_back(psi);
    }
  } else {
    const auto spectrum = diagonalize(potential, c.grid);
    for (double t : times) out.push_back(t == 0.0 ? psi0 : spectral_evolve(spectrum, psi0, t));
  }
  return out;
}

inline std::vector<WavefunctionGrid> evolve_snapshots(const RunConfig& c, const std::vector<double>& times) {
  return evolve_snapshots(c, times, c.grid);
}

inline std::vector<WavefunctionGrid> evolve_snapshots(const RunConfig& c) {
  return evolve_snapshots(c, c.snapshot_times());
}

/// Uniform times 0, T / n, ..., T for the trajectory field snapshots.
inline std::vector<double> field_times(const RunConfig& c) {
  std::vector<double> t;
  const int n = c.trajectories.field_snapshots;
  for (int k = 0; k <= n; ++k) t.push_back(c.time.duration * k / n);
  return t;
}

inline MadelungOptions madelung_options(const RunConfig& c) {
  return {c.madelung.node_floor, c.madelung.right_to_left};
}

// ---------------------------------------------------------------------------
// Output

/// Formats a double with 17 significant digits.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& hash, const std::vector<std::string>& columns)
      : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot write " + path.string());
    out_ << "# config_hash=" << hash << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(values), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  std::ofstream out_;
};

inline std::string snapshot_name(const std::string& stem, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu.csv", stem.c_str(), index);
  return buf;
}

}  // namespace pifluid
