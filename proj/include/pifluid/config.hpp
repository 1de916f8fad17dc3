#pragma once

// JSON run configuration. Every field has a default, unknown keys are
// rejected, and to_json emits the complete schema so that
// parse -> serialize -> parse is the identity.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pifluid/classical.hpp"
#include "pifluid/error.hpp"
#include "pifluid/evolve.hpp"
#include "pifluid/grid.hpp"
#include "pifluid/kernel.hpp"
#include "pifluid/potential.hpp"

namespace pifluid {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct PotentialConfig {
  std::string kind = "double_well";  // double_well | polynomial
  double mass = 1.0;
  double hbar = 1.0;
  double a = -2.0;
  double lambda = 1e-4;
  double K = 1.0;
  std::vector<double> coefficients;  // polynomial only, c_0 first

  PotentialModel model() const {
    if (kind == "double_well") return PotentialModel::double_well(mass, a, lambda, K, hbar);
    return PotentialModel(std::span<const double>(coefficients), mass, hbar);
  }
};

struct PacketConfig {
  double alpha = 0.4;
  double center = -3.126;
  double momentum = 0.0;
  bool renormalize = true;
};

struct TimeConfig {
  double duration = 0.5;
  int snapshots = 10;  // output times duration * k / snapshots, k = 0..snapshots
};

struct KernelConfig {
  std::string mode = "general";  // general | double-well | free | harmonic-exact
  int k_max = 4;
  double tol = 1e-12;
  int jet_order = 0;
  int path_samples = 16;
  double bvp_tol = 1e-13;  // looser targets leave Newton noise in the far tails of psi
  double support_cut = 1e-12;
};

struct EvolveConfig {
  std::string method = "kernel";  // kernel | crank_nicolson | spectral
};

struct OracleConfig {
  double dt = 1e-4;
};

struct MadelungConfig {
  double node_floor = 1e-8;
  bool right_to_left = false;
};

struct TrajectoryConfig {
  int seeds = 1000;
  std::string seed_mode = "density";  // density | uniform
  double seed_min = 0.0;              // uniform mode only
  double seed_max = 0.0;
  std::uint64_t rng_seed = 20240607;
  double barrier = 0.0;
  int field_snapshots = 200;  // velocity snapshots over the run
  GridSpec field_grid{0.0, 0.0, 0};  // output grid of those snapshots; n_points 0 means the run grid

  const GridSpec& field_grid_or(const GridSpec& run) const { return field_grid.n_points == 0 ? run : field_grid; }
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  PotentialConfig potential;
  PacketConfig packet;
  GridSpec grid{-16.0, 8.0, 2048};
  TimeConfig time;
  KernelConfig kernel;
  EvolveConfig evolve;
  OracleConfig oracle;
  MadelungConfig madelung;
  TrajectoryConfig trajectories;
  std::string output_dir = "out";

  KernelParams kernel_params() const {
    KernelParams p;
    p.k_max = kernel.k_max;
    p.tol = kernel.tol;
    p.jet_order = kernel.jet_order;
    p.path_samples = kernel.path_samples;
    p.bvp_tol = kernel.bvp_tol;
    return p;
  }

  GaussianPacketSpec packet_spec() const {
    return {packet.alpha, packet.center, packet.momentum, potential.hbar, packet.renormalize};
  }

  std::vector<double> snapshot_times() const {
    std::vector<double> t;
    for (int k = 0; k <= time.snapshots; ++k) t.push_back(time.duration * k / time.snapshots);
    return t;
  }
};

// ---------------------------------------------------------------------------
// (De)serialization

namespace detail {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + key + ": " + e.what());
    }
  }

  Reader child(const char* key) {
    seen_.push_back(key);
    static const json empty = json::object();
    return Reader(j_.contains(key) ? j_.at(key) : empty, path_ + key + ".");
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) throw ConfigError("unknown key " + path_ + k);
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config " : path_; }
  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

inline bool finite(double v) { return std::isfinite(v); }

}  // namespace detail

inline void validate(const RunConfig& c) {
  using detail::finite;
  using detail::require;
  require(c.schema_version == kSchemaVersion, "unsupported schema_version " + std::to_string(c.schema_version));
  const auto& p = c.potential;
  require(p.kind == "double_well" || p.kind == "polynomial", "potential.kind must be double_well or polynomial");
  require(finite(p.mass) && p.mass > 0.0, "potential.mass must be positive");
  require(finite(p.hbar) && p.hbar > 0.0, "potential.hbar must be positive");
  require(finite(p.a) && finite(p.lambda) && finite(p.K), "double-well parameters must be finite");
  for (double v : p.coefficients) require(finite(v), "potential.coefficients must be finite");
  require(p.coefficients.size() <= static_cast<std::size_t>(kMaxPotentialDegree + 1), "potential degree above 16");
  require(finite(c.packet.alpha) && c.packet.alpha > 0.0, "packet.alpha must be positive");
  require(finite(c.packet.center) && finite(c.packet.momentum), "packet values must be finite");
  require(finite(c.grid.x_min) && finite(c.grid.x_max) && c.grid.x_max > c.grid.x_min, "grid needs x_min < x_max");
  require(c.grid.n_points >= 64, "grid.n_points must be at least 64");
  require(finite(c.time.duration) && c.time.duration > 0.0, "time.duration must be positive");
  require(c.time.snapshots >= 1, "time.snapshots must be at least 1");
  const auto& k = c.kernel;
  require(k.mode == "general" || k.mode == "double-well" || k.mode == "free" || k.mode == "harmonic-exact",
          "kernel.mode must be general, double-well, free or harmonic-exact");
  require(k.k_max >= 0 && k.k_max <= kMaxKernelOrder, "kernel.k_max must lie in [0, 12]");
  require(k.tol > 0.0, "kernel.tol must be positive");
  require(k.jet_order >= 0 && k.jet_order <= kMaxJetOrder, "kernel.jet_order must lie in [0, 64]");
  require(k.path_samples >= 2, "kernel.path_samples must be at least 2");
  require(k.bvp_tol > 0.0, "kernel.bvp_tol must be positive");
  require(k.support_cut >= 0.0 && k.support_cut < 1.0, "kernel.support_cut must lie in [0, 1)");
  require(c.evolve.method == "kernel" || c.evolve.method == "crank_nicolson" || c.evolve.method == "spectral",
          "evolve.method must be kernel, crank_nicolson or spectral");
  require(finite(c.oracle.dt) && c.oracle.dt > 0.0, "oracle.dt must be positive");
  require(c.madelung.node_floor > 0.0 && c.madelung.node_floor < 1.0, "madelung.node_floor must lie in (0, 1)");
  const auto& t = c.trajectories;
  require(t.seeds >= 0, "trajectories.seeds must be non-negative");
  require(t.seed_mode == "density" || t.seed_mode == "uniform", "trajectories.seed_mode must be density or uniform");
  require(t.field_snapshots >= 2, "trajectories.field_snapshots must be at least 2");
  if (t.field_grid.n_points != 0) {
    require(finite(t.field_grid.x_min) && finite(t.field_grid.x_max) && t.field_grid.x_max > t.field_grid.x_min,
            "trajectories.field_grid needs x_min < x_max");
    require(t.field_grid.n_points >= 64, "trajectories.field_grid.n_points must be 0 or at least 64");
  }
  require(!c.output_dir.empty(), "output.dir must not be empty");
}

inline RunConfig config_from_json(const json& j) {
  RunConfig c;
  detail::Reader r(j, "");
  r.get("schema_version", c.schema_version);
  {
    auto s = r.child("potential");
    s.get("kind", c.potential.kind);
    s.get("mass", c.potential.mass);
    s.get("hbar", c.potential.hbar);
    s.get("a", c.potential.a);
    s.get("lambda", c.potential.lambda);
    s.get("K", c.potential.K);
    s.get("coefficients", c.potential.coefficients);
    s.finish();
  }
  {
    auto s = r.child("packet");
    s.get("alpha", c.packet.alpha);
    s.get("center", c.packet.center);
    s.get("momentum", c.packet.momentum);
    s.get("renormalize", c.packet.renormalize);
    s.finish();
  }
  {
    auto s = r.child("grid");
    s.get("x_min", c.grid.x_min);
    s.get("x_max", c.grid.x_max);
    s.get("n_points", c.grid.n_points);
    s.finish();
  }
  {
    auto s = r.child("time");
    s.get("duration", c.time.duration);
    s.get("snapshots", c.time.snapshots);
    s.finish();
  }
  {
    auto s = r.child("kernel");
    s.get("mode", c.kernel.mode);
    s.get("k_max", c.kernel.k_max);
    s.get("tol", c.kernel.tol);
    s.get("jet_order", c.kernel.jet_order);
    s.get("path_samples", c.kernel.path_samples);
    s.get("bvp_tol", c.kernel.bvp_tol);
    s.get("support_cut", c.kernel.support_cut);
    s.finish();
  }
  {
    auto s = r.child("evolve");
    s.get("method", c.evolve.method);
    s.finish();
  }
  {
    auto s = r.child("oracle");
    s.get("dt", c.oracle.dt);
    s.finish();
  }
  {
    auto s = r.child("madelung");
    s.get("node_floor", c.madelung.node_floor);
    s.get("right_to_left", c.madelung.right_to_left);
    s.finish();
  }
  {
    auto s = r.child("trajectories");
    s.get("seeds", c.trajectories.seeds);
    s.get("seed_mode", c.trajectories.seed_mode);
    s.get("seed_min", c.trajectories.seed_min);
    s.get("seed_max", c.trajectories.seed_max);
    s.get("rng_seed", c.trajectories.rng_seed);
    s.get("barrier", c.trajectories.barrier);
    s.get("field_snapshots", c.trajectories.field_snapshots);
    {
      auto g = s.child("field_grid");
      g.get("x_min", c.trajectories.field_grid.x_min);
      g.get("x_max", c.trajectories.field_grid.x_max);
      g.get("n_points", c.trajectories.field_grid.n_points);
      g.finish();
    }
    s.finish();
  }
  {
    auto s = r.child("output");
    s.get("dir", c.output_dir);
    s.finish();
  }
  r.finish();
  validate(c);
  return c;
}

inline json config_to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["potential"] = {{"kind", c.potential.kind}, {"mass", c.potential.mass}, {"hbar", c.potential.hbar},
                    {"a", c.potential.a},       {"lambda", c.potential.lambda}, {"K", c.potential.K},
                    {"coefficients", c.potential.coefficients}};
  j["packet"] = {{"alpha", c.packet.alpha},
                 {"center", c.packet.center},
                 {"momentum", c.packet.momentum},
                 {"renormalize", c.packet.renormalize}};
  j["grid"] = {{"x_min", c.grid.x_min}, {"x_max", c.grid.x_max}, {"n_points", c.grid.n_points}};
  j["time"] = {{"duration", c.time.duration}, {"snapshots", c.time.snapshots}};
  j["kernel"] = {{"mode", c.kernel.mode},           {"k_max", c.kernel.k_max},
                 {"tol", c.kernel.tol},             {"jet_order", c.kernel.jet_order},
                 {"path_samples", c.kernel.path_samples}, {"bvp_tol", c.kernel.bvp_tol},
                 {"support_cut", c.kernel.support_cut}};
  j["evolve"] = {{"method", c.evolve.method}};
  j["oracle"] = {{"dt", c.oracle.dt}};
  j["madelung"] = {{"node_floor", c.madelung.node_floor}, {"right_to_left", c.madelung.right_to_left}};
  j["trajectories"] = {{"seeds", c.trajectories.seeds},
                       {"seed_mode", c.trajectories.seed_mode},
                       {"seed_min", c.trajectories.seed_min},
                       {"seed_max", c.trajectories.seed_max},
                       {"rng_seed", c.trajectories.rng_seed},
                       {"barrier", c.trajectories.barrier},
                       {"field_snapshots", c.trajectories.field_snapshots},
                       {"field_grid",
                        {{"x_min", c.trajectories.field_grid.x_min},
                         {"x_max", c.trajectories.field_grid.x_max},
                         {"n_points", c.trajectories.field_grid.n_points}}}};
  j["output"] = {{"dir", c.output_dir}};
  return j;
}

/// KEY=VALUE with a dotted key; VALUE is read as JSON when it parses, else as a string.
inline void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like KEY=VALUE: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &j;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override path " + key + " crosses a non-object");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError("override path " + key + " crosses a non-object");
  (*node)[parts.back()] = value;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  json j = path.empty() ? config_to_json(RunConfig{}) : read_json_file(path);
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

/// 64-bit FNV-1a of the canonical (sorted-key, compact) serialization,
/// leaving out the output directory so that reruns elsewhere hash alike.
inline std::uint64_t config_hash(const RunConfig& c) {
  json j = config_to_json(c);
  j.erase("output");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash_hex(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(c)));
  return buf;
}

}  // namespace pifluid
