#ifndef DYNPRIV_SCENARIO_HPP
#define DYNPRIV_SCENARIO_HPP

// JSON scenario configs: parsing, validation, canonical hashing and the
// built-in scenario set. Randomized elements draw from independent streams
// derived from the scenario seed.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynpriv/analysis.hpp"
#include "dynpriv/dynamics.hpp"
#include "dynpriv/errors.hpp"
#include "dynpriv/graph.hpp"
#include "dynpriv/masks.hpp"
#include "dynpriv/random.hpp"
#include "dynpriv/solver.hpp"

namespace dynpriv {

using json = nlohmann::json;

namespace stream {
inline constexpr std::uint64_t graph = 1, x0 = 2, mask = 3, theta = 4, lipschitz = 5, s0 = 6;
}

/// FNV-1a 64 over the canonical dump (object keys sorted, no whitespace).
inline std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Tolerances {
  double conv = 1e-3;
  double conservation = 1e-8;
  double output_mean_range = 1e-3;
  double vmm_increase = 1e-6;
  double gap_final = 1e-6;
};

struct Scenario {
  std::string name;
  std::optional<std::uint64_t> seed;
  json config;  // after overrides; hashed
  std::string hash;

  Digraph graph;
  std::optional<SystemSpec> system;
  MaskBank bank;
  MaskKind mask_kind = MaskKind::Identity;
  std::optional<double> lambda;  // requested privacy level, auto masks only
  Vector x0;
  Vector s0;
  IntegratorConfig integrator;
  std::vector<std::string> checks;  // empty: every applicable verdict
  Tolerances tol;
  std::string output;

  // pinned synchronization only
  double q = std::numeric_limits<double>::quiet_NaN();
  Vector xi;
  double pinning_margin = std::numeric_limits<double>::quiet_NaN();

  const SystemSpec& spec() const { return *system; }
  MaskedSystem masked() const { return MaskedSystem(*system, bank); }
  std::uint64_t seed_or_zero() const { return seed.value_or(0); }
};

namespace detail {

inline std::uint64_t need_seed(const Scenario& sc, const char* what) {
  if (!sc.seed) throw ConfigError(std::string("'seed' is required: ") + what + " is randomized");
  return *sc.seed;
}

inline Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + ": expected a non-empty array of rows");
  Matrix m(j.size(), j[0].size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != m.cols()) throw ConfigError(std::string(what) + ": ragged rows");
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

inline Digraph graph_from_json(const json& j, Scenario& sc) {
  if (j.contains("edges")) {
    const int n = j.at("n").get<int>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() < 2 || e.size() > 3)
        throw ConfigError("graph.edges: each edge is [src, dst] or [src, dst, weight]");
      edges.push_back({e[0].get<int>(), e[1].get<int>(), e.size() == 3 ? e[2].get<double>() : 1.0});
    }
    return build_graph(n, std::move(edges));
  }
  const std::string gen = j.at("generator").get<std::string>();
  const int n = j.at("n").get<int>();
  if (gen == "cycle") return cycle_graph(n, j.value("weight", 1.0), j.value("bidirectional", false));
  if (gen == "complete") return complete_graph(n, j.value("weight", 1.0));
  if (gen == "erdos_renyi") {
    ErdosRenyiOptions opt;
    opt.n = n;
    opt.p = j.at("p").get<double>();
    opt.symmetric = j.value("symmetric", true);
    opt.seed = derive_seed(need_seed(sc, "graph"), stream::graph);
    if (j.contains("weight")) {
      const auto& w = j.at("weight");
      if (w.is_array()) {
        opt.weight_lo = w.at(0).get<double>();
        opt.weight_hi = w.at(1).get<double>();
      } else {
        opt.weight_lo = opt.weight_hi = w.get<double>();
      }
    }
    return erdos_renyi_graph(opt);
  }
  throw ConfigError("graph.generator: unknown generator '" + gen + "'");
}

/// A list, {"uniform": {"low", "high"}} or {"gaussian": {"mean", "std"}}.
inline Vector vector_from_json(const json& j, std::size_t dim, Scenario& sc, std::uint64_t s, const char* what) {
  if (j.is_array()) {
    Vector v = j.get<Vector>();
    if (v.size() != dim)
      throw ConfigError(std::string(what) + ": expected " + std::to_string(dim) + " entries, got " +
                        std::to_string(v.size()));
    return v;
  }
  Rng rng = make_rng(derive_seed(need_seed(sc, what), s));
  Vector v(dim);
  if (j.contains("uniform")) {
    const double lo = j["uniform"].at("low").get<double>(), hi = j["uniform"].at("high").get<double>();
    if (!(hi >= lo)) throw ConfigError(std::string(what) + ": uniform needs low <= high");
    for (double& x : v) x = uniform(rng, lo, hi);
  } else if (j.contains("gaussian")) {
    const double mu = j["gaussian"].value("mean", 0.0), sd = j["gaussian"].at("std").get<double>();
    if (!(sd >= 0.0)) throw ConfigError(std::string(what) + ": gaussian needs std >= 0");
    for (double& x : v) x = gaussian(rng, mu, sd);
  } else {
    throw ConfigError(std::string(what) + ": expected a list, {uniform} or {gaussian}");
  }
  return v;
}

inline Drift drift_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "lorenz") return Lorenz{j.value("sigma", 10.0), j.value("rho", 28.0), j.value("beta", 8.0 / 3.0)};
  if (kind == "lipschitz_demo") {
    Matrix a = matrix_from_json(j.at("a_s"), "drift.a_s");
    Matrix b = j.contains("b") ? matrix_from_json(j.at("b"), "drift.b") : Matrix::identity(a.rows());
    if (!a.square()) throw ConfigError("drift.a_s must be square");
    return LipschitzDemo{std::move(a), std::move(b)};
  }
  throw ConfigError("drift.kind: unknown drift '" + kind + "'");
}

inline Vector default_gain_candidates() {
  Vector c;
  for (double p = 0.25; p <= 1e4; p *= 1.25) c.push_back(p);
  return c;
}

}  // namespace detail

/// Builds a scenario from JSON. `seed_override` replaces the config seed
/// before hashing. Throws ConfigError (or InvalidArgument from the model
/// constructors) on any inconsistency.
inline Scenario load_scenario(json config, std::optional<std::uint64_t> seed_override = std::nullopt) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  if (seed_override) config["seed"] = *seed_override;
  Scenario sc;
  try {
    sc.name = config.at("name").get<std::string>();
    if (config.contains("seed")) sc.seed = config["seed"].get<std::uint64_t>();
    sc.config = config;
    sc.hash = config_hash(config);
    sc.output = config.value("output", "out/" + sc.name);

    const json& sys = config.at("system");
    const std::string kind = sys.at("kind").get<std::string>();
    sc.graph = detail::graph_from_json(config.at("graph"), sc);
    const auto n = static_cast<std::size_t>(sc.graph.size());

    std::size_t nu = 1;
    std::optional<Drift> drift;
    if (kind == "pinned_sync") {
      drift = detail::drift_from_json(sys.at("drift"));
      nu = drift_dimension(*drift);
    }
    const std::size_t dim = n * nu;
    sc.x0 = detail::vector_from_json(config.at("x0"), dim, sc, stream::x0, "x0");

    // masks
    const json& mj = config.value("mask", json{{"kind", "identity"}});
    if (mj.contains("channels")) {
      const auto& ch = mj["channels"];
      if (ch.size() != dim) throw ConfigError("mask.channels: expected " + std::to_string(dim) + " channels");
      std::vector<ChannelMask> masks;
      for (const auto& c : ch) {
        MaskParams p;
        p.phi = c.value("phi", 0.0);
        p.sigma = c.value("sigma", 1.0);
        p.gamma = c.value("gamma", 0.0);
        p.delta = c.value("delta", 1.0);
        p.c = c.value("c", 1.0);
        masks.push_back(ChannelMask::make(mask_kind_from_string(c.at("kind").get<std::string>()), p));
      }
      sc.mask_kind = masks.front().kind();
      sc.bank = MaskBank(std::move(masks));
    } else {
      sc.mask_kind = mask_kind_from_string(mj.at("kind").get<std::string>());
      if (sc.mask_kind == MaskKind::Identity) {
        sc.bank = MaskBank::identity(dim);
      } else {
        sc.lambda = mj.at("lambda").get<double>();
        DecayRange decay;
        if (mj.contains("decay")) decay = {mj["decay"].at(0).get<double>(), mj["decay"].at(1).get<double>()};
        sc.bank = make_private_bank(sc.mask_kind, *sc.lambda, sc.x0,
                                    derive_seed(detail::need_seed(sc, "mask"), stream::mask), decay);
      }
    }

    if (kind == "saturated_net") {
      Matrix a = sc.graph.adjacency();
      const double rho = spectral_radius_nonnegative(a);
      const double kappa = sys.contains("kappa") ? sys["kappa"].get<double>() : sys.at("kappa_scale").get<double>() / rho;
      sc.system = make_saturated_net(std::move(a), kappa, sys.value("require_stable", true));
    } else if (kind == "friedkin_johnsen") {
      const Vector theta = detail::vector_from_json(sys.at("theta"), n, sc, stream::theta, "system.theta");
      sc.system = make_friedkin_johnsen(laplacian(sc.graph), theta, sc.x0, sys.value("constant_initial_output", false));
    } else if (kind == "average_consensus") {
      sc.system = make_average_consensus(laplacian(sc.graph));
    } else if (kind == "pinned_sync") {
      const LaplacianMatrix l = laplacian(sc.graph);
      const Matrix r = sys.contains("R") ? detail::matrix_from_json(sys["R"], "system.R") : Matrix::identity(nu);
      const auto pinned = sys.at("pinned").get<std::size_t>();
      if (pinned == 0 || pinned > n) throw ConfigError("system.pinned must lie in [1, n]");
      sc.xi = left_null_vector(l);
      const json& box = sys.value("q_box", json::array({-5.0, 5.0}));
      sc.q = sys.contains("q") ? sys["q"].get<double>()
                               : estimate_lipschitz_q(*drift, r, Box::cube(nu, box.at(0).get<double>(), box.at(1).get<double>()),
                                                      sys.value("q_samples", 20000),
                                                      derive_seed(detail::need_seed(sc, "q estimate"), stream::lipschitz));
      double gain = 0.0;
      const json& pg = sys.value("pin_gain", json("auto"));
      if (pg.is_string()) {
        if (pg.get<std::string>() != "auto") throw ConfigError("system.pin_gain: number or \"auto\"");
        const Vector cand = detail::default_gain_candidates();
        const PinningScan scan = scan_pinning_gain(l, r, sc.xi, sc.q, pinned, cand);
        gain = scan.gain;
      } else {
        gain = pg.get<double>();
      }
      Vector pins(n, 0.0);
      for (std::size_t i = 0; i < pinned; ++i) pins[i] = gain;
      sc.pinning_margin = check_pinning_condition(l, r, pins, sc.xi, sc.q);
      sc.system = make_pinned_sync(l, r, std::move(pins), *drift);
      sc.s0 = detail::vector_from_json(sys.at("s0"), nu, sc, stream::s0, "system.s0");
      sc.tol.conv = 1e-2;
    } else {
      throw ConfigError("system.kind: unknown system '" + kind + "'");
    }

    const json& ij = config.value("integrator", json::object());
    const std::string method = ij.value("method", "rk4");
    if (method != "rk4" && method != "euler") throw ConfigError("integrator.method: rk4 or euler");
    sc.integrator.method = method == "rk4" ? Method::RK4 : Method::Euler;
    sc.integrator.dt = ij.value("dt", 1e-3);
    sc.integrator.t_final = ij.value("t_final", 50.0);
    sc.integrator.record_stride = ij.value("record_stride", 1);
    sc.integrator.t_start = ij.value("t_start", 0.0);
    sc.integrator.validate();

    if (config.contains("checks")) sc.checks = config["checks"].get<std::vector<std::string>>();
    const json& tj = config.value("tolerances", json::object());
    sc.tol.conv = tj.value("conv", sc.tol.conv);
    sc.tol.conservation = tj.value("conservation", sc.tol.conservation);
    sc.tol.output_mean_range = tj.value("output_mean_range", sc.tol.output_mean_range);
    sc.tol.vmm_increase = tj.value("vmm_increase", sc.tol.vmm_increase);
    sc.tol.gap_final = tj.value("gap_final", sc.tol.gap_final);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return sc;
}

// ------------------------------------------------------- built-in scenarios

namespace detail {

inline json uniform_box(double lo, double hi) { return {{"uniform", {{"low", lo}, {"high", hi}}}}; }

inline json er_graph(int n, double p) {
  return {{"generator", "erdos_renyi"}, {"n", n}, {"p", p}, {"symmetric", true}, {"weight", 1.0}};
}

inline json integrator(double t_final, int stride, double dt = 1e-3) {
  return {{"method", "rk4"}, {"dt", dt}, {"t_final", t_final}, {"record_stride", stride}};
}

inline json lipschitz_demo() {
  return {{"kind", "lipschitz_demo"},
          {"a_s", {{-0.5, 2.0, 0.0}, {-2.0, -0.5, 0.0}, {0.0, 0.0, -0.5}}},
          {"b", {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}}};
}

inline json satnet(std::string name, int n, double p, std::uint64_t seed) {
  return {{"name", name}, {"seed", seed},
          {"system", {{"kind", "saturated_net"}, {"kappa_scale", 0.5}}},
          {"graph", er_graph(n, p)},
          {"mask", {{"kind", "affine"}, {"lambda", 1.0}}},
          {"x0", uniform_box(-5.0, 5.0)},
          {"integrator", integrator(50.0, 100)},
          {"checks", {"attractor", "tail_decreasing", "privacy", "mask_gap_initial", "mask_gap_vanishes"}}};
}

inline json fj(std::string name, int n, double p, std::uint64_t seed) {
  return {{"name", name}, {"seed", seed},
          {"system", {{"kind", "friedkin_johnsen"}, {"theta", uniform_box(0.2, 1.0)}}},
          {"graph", er_graph(n, p)},
          {"mask", {{"kind", "vanishing_affine"}, {"lambda", 1.0}}},
          {"x0", uniform_box(-5.0, 5.0)},
          {"integrator", integrator(50.0, 100)},
          {"checks", {"attractor", "tail_decreasing", "privacy", "mask_gap_initial", "mask_gap_vanishes"}}};
}

inline json consensus(std::string name, json graph, std::uint64_t seed) {
  return {{"name", name}, {"seed", seed},
          {"system", {{"kind", "average_consensus"}}},
          {"graph", std::move(graph)},
          {"mask", {{"kind", "vanishing_affine"}, {"lambda", 1.0}}},
          {"x0", uniform_box(-5.0, 5.0)},
          {"integrator", integrator(50.0, 10)},
          {"checks", {"attractor", "tail_decreasing", "privacy", "mask_gap_initial", "mask_gap_vanishes",
                      "conservation", "output_mean_varies", "vmm_nonmonotone"}}};
}

inline json pinning(std::string name, int n, double p, json drift, double lambda, json q_box, double t_final,
                    std::uint64_t seed) {
  return {{"name", name}, {"seed", seed},
          {"system", {{"kind", "pinned_sync"}, {"drift", std::move(drift)}, {"pinned", n / 2},
                      {"pin_gain", "auto"}, {"q_box", std::move(q_box)}, {"q_samples", 20000},
                      {"s0", {1.0, 1.0, 1.0}}}},
          {"graph", er_graph(n, p)},
          {"mask", {{"kind", "vanishing_affine"}, {"lambda", lambda}}},
          {"x0", uniform_box(-5.0, 5.0)},
          {"integrator", integrator(t_final, 100)},
          {"checks", {"attractor", "privacy", "mask_gap_initial", "mask_gap_vanishes", "pinning_condition",
                      "bounded"}}};
}

}  // namespace detail

/// Scenarios run by `suite`: the four paper-scale examples plus desk-scale
/// variants. Also exported verbatim to scenarios/*.json.
inline std::vector<json> builtin_scenarios() {
  using namespace detail;
  json ex4 = pinning("example4_pinning", 50, 0.2, {{"kind", "lorenz"}}, 10.0, {-30.0, 50.0}, 50.0, 4);
  ex4["system"]["pinned"] = 50;
  return {
      satnet("example1_satnet", 100, 0.1, 1),
      fj("example2_fj", 100, 0.1, 2),
      consensus("example3_consensus", er_graph(100, 0.1), 3),
      ex4,
      satnet("satnet_n10", 10, 0.4, 11),
      fj("fj_n10", 10, 0.4, 12),
      consensus("consensus_n10", er_graph(10, 0.4), 13),
      consensus("consensus_n3", {{"generator", "cycle"}, {"n", 3}}, 14),
      pinning("pinning_n10", 10, 0.3, lipschitz_demo(), 1.0, {-5.0, 5.0}, 100.0, 15),
  };
}

inline std::optional<json> find_builtin(const std::string& name) {
  for (auto& j : builtin_scenarios())
    if (j.at("name") == name) return j;
  return std::nullopt;
}

}  // namespace dynpriv

#endif  // DYNPRIV_SCENARIO_HPP
