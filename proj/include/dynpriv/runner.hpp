#ifndef DYNPRIV_RUNNER_HPP
#define DYNPRIV_RUNNER_HPP

// Scenario pipelines behind the CLI: assumption checks, simulation with
// diagnostics, and the eavesdropping attack report.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "dynpriv/adversary.hpp"
#include "dynpriv/analysis.hpp"
#include "dynpriv/masks.hpp"
#include "dynpriv/scenario.hpp"
#include "dynpriv/solver.hpp"

namespace dynpriv {

// ------------------------------------------------------------------ check

struct CheckResult {
  AssumptionReport graph;
  std::optional<AxiomReport> axioms;
  std::optional<double> rho;
  std::vector<std::string> violations;  // fail `check --strict`
  std::vector<std::string> warnings;

  bool ok() const { return violations.empty(); }

  json to_json() const {
    json j;
    j["irreducible"] = graph.irreducible;
    j["weight_balanced"] = graph.weight_balanced;
    j["assumption1"] = graph.assumption1_holds();
    json cov = json::array();
    for (const auto& [i, k] : graph.covering_violations) cov.push_back({i, k});
    j["covering_violations"] = cov;
    if (rho) j["rho"] = *rho;
    if (axioms) {
      auto ax = [](const AxiomCheck& c) { return json{{"pass", c.pass}, {"witness", c.witness}}; };
      j["mask_axioms"] = {{"P1", ax(axioms->p1)}, {"P2", ax(axioms->p2)}, {"P3", ax(axioms->p3)},
                          {"P4", ax(axioms->p4)}, {"P5_monotone", ax(axioms->p5_monotone)},
                          {"P5_limit", ax(axioms->p5_limit)}};
      json fp = json::array();
      for (const auto& p : axioms->fixed_points) fp.push_back(p ? json(*p) : json(nullptr));
      j["mask_axioms"]["fixed_points"] = fp;
    }
    j["violations"] = violations;
    j["warnings"] = warnings;
    return j;
  }
};

inline std::string format_pairs(const std::vector<std::pair<int, int>>& pairs, std::size_t limit = 20) {
  std::string s;
  for (std::size_t k = 0; k < pairs.size() && k < limit; ++k) {
    if (k) s += ", ";
    s += "(" + std::to_string(pairs[k].first) + "," + std::to_string(pairs[k].second) + ")";
  }
  if (pairs.size() > limit) s += ", ... (" + std::to_string(pairs.size()) + " total)";
  return s;
}

/// Validates graph assumptions and mask axioms without integrating.
inline CheckResult check_scenario(const Scenario& sc) {
  CheckResult r;
  r.graph = check_no_covering(sc.graph);
  const SystemSpec& spec = sc.spec();
  const bool consensus = std::holds_alternative<AverageConsensus>(spec);
  const bool needs_vanishing = !std::holds_alternative<SaturatedNet>(spec);

  if (!r.graph.irreducible) r.violations.push_back("graph is not strongly connected");
  if (consensus && !r.graph.weight_balanced) r.violations.push_back("Laplacian is not weight-balanced");
  if (!r.graph.assumption1_holds())
    r.violations.push_back("covering neighborhoods (observer j, target i): " +
                           format_pairs(covering_pairs(sc.graph)));
  if (std::holds_alternative<PinnedSync>(spec) && !(sc.pinning_margin < 0.0))
    r.violations.push_back("pinning condition fails: margin " + format_double(sc.pinning_margin) + " >= 0");

  if (sc.bank.all_identity()) {
    r.warnings.push_back("identity mask: outputs are unmasked");
    return r;
  }
  r.rho = privacy_metric(sc.bank, sc.x0).rho;
  if (sc.lambda && !(*r.rho > *sc.lambda))
    r.violations.push_back("privacy metric " + format_double(*r.rho) + " does not exceed lambda " +
                           format_double(*sc.lambda));
  r.axioms = check_mask_axioms(sc.bank, default_axiom_grid(sc.bank));
  const AxiomReport& ax = *r.axioms;
  for (const auto& [name, c] : {std::pair<const char*, const AxiomCheck*>{"P1", &ax.p1}, {"P2", &ax.p2},
                                {"P3", &ax.p3}, {"P4", &ax.p4}})
    if (!c->pass) r.violations.push_back(std::string("mask axiom ") + name + " fails: " + c->witness);
  if (!ax.p5_limit.pass) {
    std::string msg = "mask gap does not vanish: " + ax.p5_limit.witness;
    (needs_vanishing ? r.violations : r.warnings).push_back(msg);
  }
  if (!ax.p5_monotone.pass) r.warnings.push_back("mask gap not monotone in t: " + ax.p5_monotone.witness);
  for (std::size_t i = 0; i < ax.fixed_points.size(); ++i)
    if (ax.fixed_points[i]) {
      r.warnings.push_back("channel " + std::to_string(i) + " has an exact t=0 fixed point at x=" +
                           format_double(*ax.fixed_points[i]));
      break;
    }
  return r;
}

// ------------------------------------------------------------- diagnostics

struct DiagnosticsReport {
  std::string scenario;
  std::string system;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
  std::map<std::string, bool> verdicts;
  std::vector<std::string> enforced;
  std::map<std::string, std::string> files;

  /// Enforced verdicts that failed or were not applicable to this system.
  std::vector<std::string> failures() const {
    std::vector<std::string> f;
    for (const auto& name : enforced) {
      const auto it = verdicts.find(name);
      if (it == verdicts.end()) f.push_back(name + " (not applicable)");
      else if (!it->second) f.push_back(name);
    }
    return f;
  }
  bool passed() const { return failures().empty(); }

  json to_json() const {
    json j;
    j["scenario"] = scenario;
    j["system"] = system;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    json m = json::object();
    for (const auto& [k, v] : metrics) m[k] = std::isfinite(v) ? json(v) : json(nullptr);
    j["metrics"] = m;
    j["verdicts"] = verdicts;
    j["enforced"] = enforced;
    j["passed"] = passed();
    j["failures"] = failures();
    j["files"] = files;
    return j;
  }
};

/// Fixed target for the scalar systems (the pinned target moves with s).
inline std::optional<Vector> attractor_target(const Scenario& sc) {
  const SystemSpec& spec = sc.spec();
  if (std::holds_alternative<SaturatedNet>(spec)) return Vector(sc.x0.size(), 0.0);
  if (const auto* fj = std::get_if<FriedkinJohnsen>(&spec)) return fj_equilibrium(fj->l, fj->theta, fj->x_o);
  if (std::holds_alternative<AverageConsensus>(spec)) return Vector(sc.x0.size(), consensus_value(sc.x0));
  return std::nullopt;
}

/// Per-sample error: ||x - x*||_inf, or max_{i,c} |x_ic - s_c| when pinned.
inline Vector error_series(const Scenario& sc, const Trajectory& tr) {
  if (tr.has_exosystem()) return sync_error_series(tr).inf;
  const Vector target = *attractor_target(sc);
  Vector e;
  for (const auto& x : tr.x) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - target[i]));
    e.push_back(m);
  }
  return e;
}

inline DiagnosticsReport diagnose(const Scenario& sc, const Trajectory& tr) {
  DiagnosticsReport r;
  r.scenario = sc.name;
  r.system = system_name(sc.spec());
  r.config_hash = sc.hash;
  r.seed = sc.seed_or_zero();
  auto& m = r.metrics;
  auto& v = r.verdicts;

  AttractorVerdict av;
  if (tr.has_exosystem()) {
    av = sync_verdict(tr, sc.tol.conv);
    const SyncErrorSeries e = sync_error_series(tr);
    m["sync_error_max_agent_final"] = e.max_agent.back();
    m["sync_error_full_final"] = e.full.back();
  } else {
    av = attractor_verdict(tr, *attractor_target(sc), sc.tol.conv);
  }
  m["final_error"] = av.final_error;
  m["half_error"] = av.half_error;
  m["tol_conv"] = sc.tol.conv;
  v["attractor"] = av.converged;
  v["tail_decreasing"] = av.tail_decreasing;

  double max_abs = 0.0;
  for (const auto& x : tr.x) max_abs = std::max(max_abs, norm_inf(x));
  m["max_abs_state"] = max_abs;
  v["bounded"] = std::isfinite(max_abs) && max_abs < sc.integrator.blowup_threshold;

  const auto gaps = mask_gap_series(tr);
  m["min_gap_initial"] = *std::min_element(gaps.front().begin(), gaps.front().end());
  m["max_gap_final"] = norm_inf(gaps.back());
  if (!sc.bank.all_identity()) {
    const double rho = privacy_metric(sc.bank, sc.x0).rho;
    m["rho"] = rho;
    if (sc.lambda) {
      m["lambda"] = *sc.lambda;
      v["privacy"] = rho > *sc.lambda;
      v["mask_gap_initial"] = m["min_gap_initial"] >= *sc.lambda;
    }
    v["mask_gap_vanishes"] = m["max_gap_final"] < sc.tol.gap_final;
  }

  if (std::holds_alternative<AverageConsensus>(sc.spec())) {
    const double eta = consensus_value(sc.x0);
    const ConservationSeries c = conservation_series(tr);
    double cons = 0.0;
    for (double mx : c.mean_x) cons = std::max(cons, std::abs(mx - eta));
    m["eta"] = eta;
    m["conservation_error"] = cons;
    m["output_mean_range"] = series_range(c.mean_y);
    v["conservation"] = cons <= sc.tol.conservation;
    v["output_mean_varies"] = m["output_mean_range"] > sc.tol.output_mean_range;
    const Vector vmm = vmm_series(tr);
    double rise = 0.0, running_min = INFINITY;
    for (double x : vmm) {
      rise = std::max(rise, x - running_min);
      running_min = std::min(running_min, x);
    }
    m["vmm_max_rise"] = rise;
    v["vmm_nonmonotone"] = has_increase(vmm, sc.tol.vmm_increase);
  }
  if (std::holds_alternative<PinnedSync>(sc.spec())) {
    const auto& ps = std::get<PinnedSync>(sc.spec());
    m["q"] = sc.q;
    m["pinning_margin"] = sc.pinning_margin;
    m["pin_gain"] = *std::max_element(ps.pins.begin(), ps.pins.end());
    v["pinning_condition"] = sc.pinning_margin < 0.0;
  }

  if (sc.checks.empty()) {
    for (const auto& [name, ok] : v) r.enforced.push_back(name);
  } else {
    r.enforced = sc.checks;
  }
  return r;
}

struct SimulationResult {
  Trajectory trajectory;
  DiagnosticsReport report;
};

/// Integrates the masked scenario and evaluates every verdict. Throws
/// NumericalBlowUp on divergence.
inline SimulationResult simulate(const Scenario& sc) {
  const auto start = std::chrono::steady_clock::now();
  const MaskedSystem ms = sc.masked();
  std::optional<std::span<const double>> s0;
  if (!sc.s0.empty()) s0 = std::span<const double>(sc.s0);
  SimulationResult out{integrate(ms, sc.x0, s0, sc.integrator), {}};
  out.trajectory.scenario_id = sc.name;
  out.trajectory.seed = sc.seed_or_zero();
  out.trajectory.config_hash = sc.hash;
  out.report = diagnose(sc, out.trajectory);
  out.report.metrics["runtime_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Tidy per-sample series for plotting.
inline void write_series_csv(std::ostream& os, const Scenario& sc, const Trajectory& tr) {
  const Vector err = error_series(sc, tr);
  const auto gaps = mask_gap_series(tr);
  const ConservationSeries c = conservation_series(tr);
  const bool scalar = tr.agent_dim == 1;
  const Vector vmm = scalar ? vmm_series(tr) : Vector{};
  os << "t,error,max_gap,mean_x,mean_y" << (scalar ? ",vmm" : "") << '\n';
  for (std::size_t k = 0; k < tr.size(); ++k) {
    os << format_double(tr.times[k]) << ',' << format_double(err[k]) << ',' << format_double(norm_inf(gaps[k]))
       << ',' << format_double(c.mean_x[k]) << ',' << format_double(c.mean_y[k]);
    if (scalar) os << ',' << format_double(vmm[k]);
    os << '\n';
  }
}

// ------------------------------------------------------------------ attack

struct AttackRecord {
  Reconstruction reconstruction;
  bool covered = false;
  double true_value = 0.0;  // revealed only for evaluation
  double abs_error = 0.0;
};

struct AttackReport {
  std::string scenario;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<AttackRecord> records;

  json to_json() const {
    json obs = json::array();
    double worst_covered = 0.0, best_uncovered = INFINITY;
    for (const auto& r : records) {
      json subs = r.reconstruction.substituted;
      obs.push_back({{"observer", r.reconstruction.observer},
                     {"target", r.reconstruction.target},
                     {"covered", r.covered},
                     {"policy", to_string(r.reconstruction.policy)},
                     {"estimate", r.reconstruction.estimate},
                     {"true_value", r.true_value},
                     {"abs_error", r.abs_error},
                     {"substituted", subs}});
      if (r.covered) worst_covered = std::max(worst_covered, r.abs_error);
      else best_uncovered = std::min(best_uncovered, r.abs_error);
    }
    json j{{"scenario", scenario}, {"config_hash", config_hash}, {"seed", seed}, {"observations", obs}};
    j["summary"] = {{"max_error_covered", worst_covered},
                    {"min_error_uncovered", std::isfinite(best_uncovered) ? json(best_uncovered) : json(nullptr)}};
    return j;
  }
};

/// Default attack plan: every covering pair, plus one (observer, target)
/// pair per observer with the smallest observed in-neighbor as target.
inline std::vector<std::pair<int, int>> default_attack_pairs(const Digraph& g) {
  std::vector<std::pair<int, int>> pairs = covering_pairs(g);
  for (int j = 0; j < g.size(); ++j) {
    const auto& nb = g.in_neighbors(j);
    if (nb.empty()) continue;
    const std::pair<int, int> p{j, nb.front()};
    if (std::find(pairs.begin(), pairs.end(), p) == pairs.end()) pairs.push_back(p);
  }
  return pairs;
}

/// Runs reconstruct_initial for each (observer, target) pair and policy.
/// Requires an average-consensus scenario (the observer knows f_i = -L_i y).
inline AttackReport run_attack(const Scenario& sc, const Trajectory& tr,
                               const std::vector<std::pair<int, int>>& pairs,
                               std::span<const Substitution> policies) {
  const auto* ac = std::get_if<AverageConsensus>(&sc.spec());
  if (!ac) throw ConfigError("adversary: only average_consensus scenarios are supported");
  AttackReport rep{sc.name, sc.hash, sc.seed_or_zero(), {}};
  const auto cover = covering_pairs(sc.graph);
  for (const auto& [j, i] : pairs) {
    const EavesdropperView view(sc.graph, j, tr);
    const LocalField f = consensus_local_field(ac->l, i);
    const bool covered = std::find(cover.begin(), cover.end(), std::pair<int, int>{j, i}) != cover.end();
    for (Substitution p : policies) {
      AttackRecord r;
      r.reconstruction = reconstruct_initial(view, f, p);
      r.covered = covered;
      r.true_value = sc.x0[static_cast<std::size_t>(i)];
      r.abs_error = std::abs(r.reconstruction.estimate - r.true_value);
      rep.records.push_back(std::move(r));
      if (covered) break;  // nothing to substitute
    }
  }
  return rep;
}

}  // namespace dynpriv

#endif  // DYNPRIV_RUNNER_HPP
