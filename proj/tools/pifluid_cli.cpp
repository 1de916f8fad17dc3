// pifluid: kernel, evolve, fields, trajectories and verify subcommands.
// Exit codes: 0 success, 1 acceptance criteria failed, 2 configuration
// error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acceptance_suite.hpp"
#include "pifluid/run.hpp"

using namespace pifluid;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "run configuration (JSON); defaults when omitted");
  app->add_option("--out", c.out_dir, "output directory (overrides output.dir)");
  app->add_option("--override", c.overrides, "KEY=VALUE with a dotted key, repeatable");
}

RunConfig load(const Common& c) {
  RunConfig cfg = load_config(c.config_path, c.overrides);
  if (!c.out_dir.empty()) cfg.output_dir = c.out_dir;
  return cfg;
}

fs::path prepare_output(const RunConfig& c) {
  const fs::path dir(c.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}, {"arg", std::arg(z)}}; }

int cmd_kernel(const RunConfig& c, double x0, double xt, double duration) {
  if (!(duration > 0.0)) throw ConfigError("kernel duration must be positive");
  ConfiguredKernel kernel(c);
  const auto r = kernel.detailed(x0, xt, duration);
  json terms = json::array();
  for (const auto& t : r.terms) {
    terms.push_back({{"k", t.k}, {"term", complex_json(t.term)}, {"abs_term", std::abs(t.term)},
                     {"cumulative", complex_json(t.partial)}});
  }
  const json out = {{"mode", c.kernel.mode},   {"x0", x0},
                    {"xt", xt},                {"t", duration},
                    {"K", complex_json(r.value)}, {"prefactor", complex_json(r.prefactor)},
                    {"converged", r.converged}, {"terms", terms},
                    {"config_hash", config_hash_hex(c)}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_evolve(const RunConfig& c) {
  const auto dir = prepare_output(c);
  const auto hash = config_hash_hex(c);
  const auto snaps = evolve_snapshots(c);
  const double barrier = c.trajectories.barrier;
  json rows = json::array();
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    const auto& psi = snaps[s];
    CsvWriter w(dir / snapshot_name("psi", s), hash, {"x", "t", "re_psi", "im_psi", "rho"});
    for (int i = 0; i < psi.size(); ++i) w.row(psi.x(i), psi.time, psi[i].real(), psi[i].imag(), std::norm(psi[i]));
    rows.push_back({{"index", s},
                    {"t", psi.time},
                    {"norm", psi.norm2()},
                    {"P_R", psi.probability_right_of(barrier)},
                    {"edge_ratio", psi.edge_ratio()}});
  }
  write_json(dir / "evolve_summary.json",
             {{"config_hash", hash}, {"config", config_to_json(c)}, {"barrier", barrier}, {"snapshots", rows}});
  std::printf("wrote %zu snapshots to %s\n", snaps.size(), dir.string().c_str());
  return 0;
}

int cmd_fields(const RunConfig& c) {
  const auto dir = prepare_output(c);
  const auto hash = config_hash_hex(c);
  const auto snaps = evolve_snapshots(c);
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    const auto f = madelung_fields(snaps[s], c.potential.mass, c.potential.hbar, madelung_options(c));
    CsvWriter w(dir / snapshot_name("fields", s), hash, {"x", "t", "R", "S_M", "v", "Q", "node_flag"});
    for (int i = 0; i < f.size(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      w.row(f.x(i), f.time, f.R[k], f.S_M[k], f.v[k], f.Q[k], static_cast<int>(f.node[k]));
    }
  }
  std::printf("wrote %zu field snapshots to %s\n", snaps.size(), dir.string().c_str());
  return 0;
}

int cmd_trajectories(const RunConfig& c) {
  const auto dir = prepare_output(c);
  const auto hash = config_hash_hex(c);
  const auto& t = c.trajectories;
  const auto waves = evolve_snapshots(c, field_times(c), t.field_grid_or(c.grid));
  std::vector<MadelungFields> fields;
  for (const auto& w : waves) fields.push_back(madelung_fields(w, c.potential.mass, c.potential.hbar, madelung_options(c)));
  const auto seeds = t.seed_mode == "uniform" ? uniform_seeds(t.seed_min, t.seed_max, t.seeds)
                                              : sample_seeds(fields.front(), t.seeds, t.rng_seed);
  TrajectoryOptions opt;
  opt.barrier = t.barrier;
  const auto set = integrate_trajectories(fields, seeds, opt);
  const auto acc = initial_accelerations(fields.front(), c.potential.model(), seeds);

  CsvWriter w(dir / "trajectories.csv", hash, {"seed_index", "seed", "t", "x"});
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    for (std::size_t k = 0; k < set.times.size(); ++k) w.row(s, seeds[s], set.times[k], set.positions[s][k]);
  }
  json per_seed = json::array();
  int crossed = 0, right = 0;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    crossed += set.crossed_barrier[s] ? 1 : 0;
    right += set.positions[s].back() > t.barrier ? 1 : 0;
    per_seed.push_back({{"seed", seeds[s]},
                        {"crossed", static_cast<bool>(set.crossed_barrier[s])},
                        {"final_x", set.positions[s].back()},
                        {"left_grid", static_cast<bool>(set.left_grid[s])},
                        {"initial_acceleration", acc[s]}});
  }
  const double n = std::max<double>(1.0, static_cast<double>(seeds.size()));
  write_json(dir / "tunneling_summary.json",
             {{"config_hash", hash},
              {"barrier", t.barrier},
              {"seeds", seeds.size()},
              {"crossing_fraction", crossed / n},
              {"final_right_fraction", right / n},
              {"P_R_final", waves.back().probability_right_of(t.barrier)},
              {"v_cap", set.v_cap},
              {"per_seed", per_seed}});
  std::printf("%d of %zu seeds crossed x = %g\n", crossed, seeds.size(), t.barrier);
  return 0;
}

int cmd_verify(const RunConfig& c) {
  const bool ok = acceptance::run_all(c, [](const acceptance::Outcome& o) {
    std::printf("%s\n", acceptance::line(o).c_str());
    std::fflush(stdout);
  });
  return ok ? 0 : 1;
}

void report(const Error& e) {
  const json j = {{"error", e.name()}, {"message", e.what()}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-integral propagation and quantum-fluid diagnostics"};
  app.require_subcommand(1);
  Common common;

  double x0 = 0.0, xt = 0.0, kt = 0.0;
  auto* kernel = app.add_subcommand("kernel", "evaluate K(xt, t; x0, 0) and print its term table as JSON");
  add_common(kernel, common);
  kernel->add_option("--x0", x0, "initial point")->required();
  kernel->add_option("--xt", xt, "final point")->required();
  kernel->add_option("--time", kt, "duration (time.duration when omitted)");
  auto* evolve = app.add_subcommand("evolve", "write psi snapshots (x, t, Re psi, Im psi, rho)");
  add_common(evolve, common);
  auto* fields = app.add_subcommand("fields", "write Madelung fields (x, t, R, S_M, v, Q, node_flag)");
  add_common(fields, common);
  auto* traj = app.add_subcommand("trajectories", "integrate Bohmian trajectories and summarize tunneling");
  add_common(traj, common);
  auto* verify = app.add_subcommand("verify", "run the acceptance criteria and print a PASS/FAIL table");
  add_common(verify, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig c = load(common);
    if (*kernel) return cmd_kernel(c, x0, xt, kernel->count("--time") ? kt : c.time.duration);
    if (*evolve) return cmd_evolve(c);
    if (*fields) return cmd_fields(c);
    if (*traj) return cmd_trajectories(c);
    return cmd_verify(c);
  } catch (const Error& e) {
    report(e);
    return e.is_config_error() ? 2 : 3;
  } catch (const json::exception& e) {
    std::cerr << json{{"error", "ConfigError"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Failure"}, {"message", e.what()}}.dump() << '\n';
    return 3;
  }
}
