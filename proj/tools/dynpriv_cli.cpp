// dynpriv: scenario runner for masked multi-agent systems.
//
//   dynpriv check     --config <file|builtin> [--strict]
//   dynpriv simulate  --config <file|builtin> --out <dir> [--strict] [--seed N] [--tol X]
//   dynpriv adversary --config <file|builtin> --out <dir> [--seed N]
//   dynpriv suite     --out <dir> [--tol X]
//   dynpriv scenarios --out <dir>
//
// Exit codes: 0 ok, 2 invalid config, 3 assumption violated under --strict,
// 4 numerical failure, 5 verdict failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dynpriv/runner.hpp"

namespace fs = std::filesystem;
using namespace dynpriv;

namespace {

enum Exit { kOk = 0, kConfig = 2, kAssumption = 3, kNumerical = 4, kVerdict = 5 };

struct Options {
  std::string config;
  std::string out;
  bool strict = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

json read_config(const std::string& path) {
  if (!fs::exists(path)) {
    if (auto b = find_builtin(path)) return *b;
    throw ConfigError("cannot open config '" + path + "'");
  }
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

Scenario load(const Options& o) {
  Scenario sc = load_scenario(read_config(o.config), o.seed);
  if (o.tol) sc.tol.conv = *o.tol;
  return sc;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream os(p);
  os << j.dump(2) << '\n';
}

fs::path prepare_dir(const std::string& dir) {
  const fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void print_check(const Scenario& sc, const CheckResult& r) {
  std::cout << sc.name << " [" << system_name(sc.spec()) << ", n=" << sc.graph.size() << "]\n";
  std::cout << "  irreducible=" << r.graph.irreducible << " weight_balanced=" << r.graph.weight_balanced
            << " assumption1=" << r.graph.assumption1_holds();
  if (r.rho) std::cout << " rho=" << format_double(*r.rho);
  std::cout << '\n';
  for (const auto& w : r.warnings) std::cout << "  warning: " << w << '\n';
  for (const auto& v : r.violations) std::cout << "  violation: " << v << '\n';
}

int cmd_check(const Options& o) {
  const Scenario sc = load(o);
  const CheckResult r = check_scenario(sc);
  print_check(sc, r);
  if (!r.ok() && o.strict) return kAssumption;
  return kOk;
}

/// check (gated by `strict`), simulate, write artifacts under `dir`.
int run_one(const Scenario& sc, const fs::path& dir, bool strict, json* summary, bool verbose = true) {
  const CheckResult ck = check_scenario(sc);
  if (summary) (*summary)["check"] = ck.to_json();
  if (!ck.ok() && strict) {
    if (verbose) print_check(sc, ck);
    return kAssumption;
  }
  fs::create_directories(dir);
  SimulationResult res;
  try {
    res = simulate(sc);
  } catch (const NumericalBlowUp& e) {
    std::cerr << sc.name << ": " << e.what() << " (last finite sample at t=" << e.last_time() << ")\n";
    if (summary) (*summary)["error"] = e.what();
    return kNumerical;
  }
  {
    std::ofstream os(dir / "trajectory.csv");
    write_trajectory_csv(os, res.trajectory);
  }
  {
    std::ofstream os(dir / "series.csv");
    write_series_csv(os, sc, res.trajectory);
  }
  res.report.files = {{"trajectory", "trajectory.csv"}, {"series", "series.csv"}};
  json report = res.report.to_json();
  report["check"] = ck.to_json();
  write_json(dir / "report.json", report);
  if (summary) (*summary)["report"] = res.report.to_json();

  if (!verbose) return res.report.passed() ? kOk : kVerdict;
  std::cout << sc.name << ": final_error=" << format_double(res.report.metrics.at("final_error"));
  if (res.report.metrics.count("rho")) std::cout << " rho=" << format_double(res.report.metrics.at("rho"));
  std::cout << (res.report.passed() ? " PASS" : " FAIL") << '\n';
  for (const auto& f : res.report.failures()) std::cout << "  failed verdict: " << f << '\n';
  return res.report.passed() ? kOk : kVerdict;
}

int cmd_simulate(const Options& o) {
  const Scenario sc = load(o);
  return run_one(sc, prepare_dir(o.out), o.strict, nullptr);
}

int cmd_adversary(const Options& o) {
  const Scenario sc = load(o);
  if (!std::holds_alternative<AverageConsensus>(sc.spec()))
    throw ConfigError("adversary: only average_consensus scenarios are supported");
  const fs::path dir = prepare_dir(o.out);
  std::vector<std::pair<int, int>> pairs = default_attack_pairs(sc.graph);
  if (sc.config.contains("adversary") && sc.config["adversary"].contains("pairs")) {
    pairs.clear();
    for (const auto& p : sc.config["adversary"]["pairs"]) pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  }
  Trajectory tr;
  try {
    tr = integrate(sc.masked(), sc.x0, std::nullopt, sc.integrator);
  } catch (const NumericalBlowUp& e) {
    std::cerr << sc.name << ": " << e.what() << '\n';
    return kNumerical;
  }
  const AttackReport rep = run_attack(sc, tr, pairs, kAllSubstitutions);
  const json j = rep.to_json();
  write_json(dir / "attack.json", j);
  std::cout << sc.name << ": " << rep.records.size() << " reconstructions, max covered error="
            << j["summary"]["max_error_covered"] << ", min uncovered error=" << j["summary"]["min_error_uncovered"]
            << '\n';
  return kOk;
}

int cmd_suite(const Options& o) {
  const fs::path dir = prepare_dir(o.out);
  json summary{{"scenarios", json::array()}};
  int worst = kOk;
  auto rank = [](int code) {
    return code == kConfig ? 4 : code == kNumerical ? 3 : code == kAssumption ? 2 : code == kVerdict ? 1 : 0;
  };
  std::printf("%-22s %-18s %-10s %-13s %s\n", "scenario", "system", "result", "final_error", "failed");
  for (const json& cfg : builtin_scenarios()) {
    json entry;
    int code;
    std::string system = "?";
    try {
      Scenario sc = load_scenario(cfg, o.seed);
      if (o.tol) sc.tol.conv = *o.tol;
      system = system_name(sc.spec());
      entry = {{"name", sc.name}, {"config_hash", sc.hash}, {"seed", sc.seed_or_zero()}};
      code = run_one(sc, dir / sc.name, true, &entry, false);
    } catch (const std::exception& e) {
      entry = {{"name", cfg.value("name", "?")}, {"error", e.what()}};
      code = kConfig;
    }
    entry["exit_code"] = code;
    std::string failed;
    if (entry.contains("report"))
      for (const auto& f : entry["report"]["failures"]) failed += f.get<std::string>() + " ";
    const double fe = entry.contains("report") ? entry["report"]["metrics"]["final_error"].get<double>() : NAN;
    std::printf("%-22s %-18s %-10s %-13.4g %s\n", entry["name"].get<std::string>().c_str(), system.c_str(),
                code == kOk ? "PASS" : "FAIL", fe, failed.c_str());
    summary["scenarios"].push_back(entry);
    if (rank(code) > rank(worst)) worst = code;
  }
  summary["passed"] = worst == kOk;
  write_json(dir / "suite_summary.json", summary);
  return worst;
}

int cmd_scenarios(const Options& o) {
  const fs::path dir = prepare_dir(o.out);
  for (const json& cfg : builtin_scenarios()) write_json(dir / (cfg["name"].get<std::string>() + ".json"), cfg);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamical privacy: masked multi-agent simulations, checks and eavesdropping attacks"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub, bool needs_config, bool needs_out) {
    if (needs_config) sub->add_option("--config", o.config, "Scenario JSON file or built-in name")->required();
    if (needs_out) sub->add_option("--out", o.out, "Output directory")->required();
    sub->add_flag("--strict", o.strict, "Fail (exit 3) when an assumption is violated");
    sub->add_option("--seed", o.seed, "Override the scenario seed");
    sub->add_option("--tol", o.tol, "Override the convergence tolerance");
  };
  auto* check = app.add_subcommand("check", "Validate graph assumptions and mask axioms");
  add_common(check, true, false);
  auto* simulate = app.add_subcommand("simulate", "Integrate a scenario and write trajectory.csv/report.json");
  add_common(simulate, true, true);
  auto* adversary = app.add_subcommand("adversary", "Run the eavesdropping attack and write attack.json");
  add_common(adversary, true, true);
  auto* suite = app.add_subcommand("suite", "Run all built-in scenarios and write suite_summary.json");
  add_common(suite, false, true);
  auto* scenarios = app.add_subcommand("scenarios", "Write the built-in scenario configs as JSON");
  scenarios->add_option("--out", o.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*check) return cmd_check(o);
    if (*simulate) return cmd_simulate(o);
    if (*adversary) return cmd_adversary(o);
    if (*suite) return cmd_suite(o);
    if (*scenarios) return cmd_scenarios(o);
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalBlowUp& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const SingularMatrix& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}
