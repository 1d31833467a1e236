// Copyright 2026 The Capmatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: solve, opt, ratio, audit, payments, experiment and
// generate. Reports are JSON on stdout, logs on stderr. Exit codes: 0 success
// or no violation, 1 violation found (audits), 2 usage or parse error,
// 3 oracle guard exceeded.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "capmatch/experiment.hpp"
#include "capmatch/instances.hpp"
#include "capmatch/io.hpp"
#include "capmatch/mechanisms.hpp"
#include "capmatch/oracle.hpp"
#include "capmatch/payments.hpp"

namespace {

using namespace capmatch;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitGuard = 3;

struct LoadedInstance {
  AnyInstance instance;
  std::string digest;
  std::string path;
};

LoadedInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot read file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();
  return {parse_instance(bytes), content_digest(bytes), path};
}

Json rational_json(const Rational& r) {
  Json node;
  node["exact"] = to_fraction_string(r);
  node["decimal"] = to_decimal_string(r);
  return node;
}

Json matching_json(const Matching& m) {
  Json node;
  Json pairs = Json::array();
  for (const Pair& p : m.pairs) {
    Json pair;
    pair["agent"] = p.agent;
    pair["position"] = p.position;
    pairs.push_back(std::move(pair));
  }
  node["pairs"] = std::move(pairs);
  node["welfare"] = rational_json(m.welfare);
  node["usedCapacity"] = to_fraction_string(m.used_capacity);
  return node;
}

std::string command_echo(int argc, char** argv) {
  std::string echo;
  for (int t = 0; t < argc; ++t) {
    if (t) echo += " ";
    echo += argv[t];
  }
  return echo;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

void emit(Json& report, std::chrono::steady_clock::time_point start) {
  report["wallTimeMs"] = elapsed_ms(start);
  std::cout << report.dump(2) << "\n";
}

const char* arm_name(Arm arm) { return arm == Arm::mech_greedy ? "mech-greedy" : "g-vmax"; }

Params collect_params(const std::map<std::string, std::string>& raw) {
  Params params;
  for (const auto& [name, text] : raw)
    if (!text.empty()) {
      try {
        params[name] = parse_rational(text);
      } catch (const std::invalid_argument& e) {
        throw ParseError("--" + name, e.what());
      }
    }
  return params;
}

struct CommonOptions {
  std::string instance_path;
  std::string mechanism;
  std::string family;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool trace = false;
  int agent = 0;
  std::map<std::string, std::string> raw_params{{"W", ""},     {"eps", ""},  {"eps0", ""},
                                                {"delta1", ""}, {"delta2", ""}, {"k", ""},
                                                {"V", ""},     {"l", ""}};
};

void add_param_flags(CLI::App* cmd, CommonOptions& options) {
  for (auto& [name, slot] : options.raw_params)
    cmd->add_option("--" + name, slot, "family parameter " + name + " (rational)");
}

int cmd_solve(const CommonOptions& options, const std::string& echo) {
  const auto start = std::chrono::steady_clock::now();
  LoadedInstance loaded = load_instance(options.instance_path);
  const Instance instance = to_general(loaded.instance);

  Json report;
  report["command"] = echo;
  report["instance"] = Json{{"path", loaded.path}, {"digest", loaded.digest}};
  report["kind"] = is_position_auction(loaded.instance) ? "position-auction" : "general";
  report["mechanism"] = options.mechanism;

  const std::string& name = options.mechanism;
  if (name == "mech2" || name == "mech4") {
    if (!options.seed_given)
      std::cerr << "note: randomized mechanism without --seed; using seed 0\n";
    SplitMix64 rng{options.seed_given ? options.seed : 0};
    RandomizedOutcome outcome =
        name == "mech2" ? mechanism2(instance, (rng.next() & 1) != 0)
                        : mechanism4(instance, draw_mech4_arm(rng.next()));
    report["seed"] = options.seed_given ? options.seed : 0;
    report["seedDefaulted"] = !options.seed_given;
    report["drawnArm"] = arm_name(outcome.drawn_arm);
    report["matching"] = matching_json(outcome.matching);
    report["expectedWelfare"] = rational_json(outcome.expected_welfare);
    emit(report, start);
    return kExitOk;
  }

  static const std::map<std::string, MechanismKind> kinds = {
      {"greedy-density", MechanismKind::greedy_density},
      {"greedy-value", MechanismKind::greedy_value},
      {"max-greedy", MechanismKind::max_greedy},
      {"gvmax", MechanismKind::g_vmax},
      {"mech1", MechanismKind::mech1},
      {"mech3", MechanismKind::mech3},
      {"mech3-relaxed", MechanismKind::mech3_relaxed},
  };
  const auto it = kinds.find(name);
  if (it == kinds.end()) throw ParseError("--mechanism", "unknown mechanism: " + name);

  if (it->second == MechanismKind::mech1 || it->second == MechanismKind::mech3 ||
      it->second == MechanismKind::mech3_relaxed) {
    Trace trace = it->second == MechanismKind::mech1
                      ? mechanism1(instance)
                      : mechanism3(instance, it->second == MechanismKind::mech3_relaxed);
    if (options.trace)
      for (const std::string& line : trace_log_lines(trace)) std::cerr << line << "\n";
    report["matching"] = matching_json(trace.final_matching);
    report["stopReason"] = trace.stop_reason == StopReason::capacity_stop ? "capacity-stop"
                                                                          : "list-exhausted";
    if (trace.last_examined)
      report["lastExamined"] = Json{{"agent", trace.last_examined->agent},
                                    {"position", trace.last_examined->position}};
  } else {
    report["matching"] = matching_json(run_mechanism(it->second, instance));
  }
  emit(report, start);
  return kExitOk;
}

int cmd_opt(const CommonOptions& options, const std::string& echo) {
  const auto start = std::chrono::steady_clock::now();
  LoadedInstance loaded = load_instance(options.instance_path);
  const Instance instance = to_general(loaded.instance);
  Json report;
  report["command"] = echo;
  report["instance"] = Json{{"path", loaded.path}, {"digest", loaded.digest}};
  report["mechanism"] = "opt";
  report["matching"] = matching_json(optimal_matching(instance));
  emit(report, start);
  return kExitOk;
}

RatioRule parse_ratio_rule(const std::string& name) {
  if (name == "mech1") return RatioRule::mech1;
  if (name == "mech3") return RatioRule::mech3;
  if (name == "max-greedy") return RatioRule::max_greedy;
  if (name == "mech2-expected") return RatioRule::mech2_expected;
  if (name == "mech4-expected") return RatioRule::mech4_expected;
  throw ParseError("rule", "unknown ratio rule: " + name);
}

std::string ratio_rule_name(RatioRule rule) {
  switch (rule) {
    case RatioRule::mech1: return "mech1";
    case RatioRule::mech3: return "mech3";
    case RatioRule::max_greedy: return "max-greedy";
    case RatioRule::mech2_expected: return "mech2-expected";
    case RatioRule::mech4_expected: return "mech4-expected";
  }
  return "?";
}

int cmd_ratio(const CommonOptions& options, const std::string& rule_name,
              const std::string& echo) {
  const auto start = std::chrono::steady_clock::now();
  const RatioRule rule = parse_ratio_rule(rule_name);

  Json report;
  report["command"] = echo;
  Instance instance;
  std::optional<Rational> optimum;
  if (!options.family.empty()) {
    const Params params = collect_params(options.raw_params);
    const AnyInstance any = paper_instance(options.family, params);
    instance = to_general(any);
    report["family"] = options.family;
    optimum = catalog_expected(options.family, params, "opt");
  } else if (!options.instance_path.empty()) {
    LoadedInstance loaded = load_instance(options.instance_path);
    instance = to_general(loaded.instance);
    report["instance"] = Json{{"path", loaded.path}, {"digest", loaded.digest}};
  } else {
    throw ParseError("ratio", "needs an instance file or --family");
  }
  if (!optimum) optimum = optimal_matching(instance).welfare;

  const Rational rule_value = rule_welfare(instance, rule);
  report["rule"] = ratio_rule_name(rule);
  report["opt"] = rational_json(*optimum);
  report["ruleWelfare"] = rational_json(rule_value);
  if (rule_value != 0) {
    report["ratio"] = rational_json(*optimum / rule_value);
  } else if (*optimum == 0) {
    report["ratio"] = rational_json(Rational(1));
  } else {
    report["zeroRuleWelfare"] = true;
  }
  emit(report, start);
  return kExitOk;
}

AuditMechanism parse_audit_mechanism(const std::string& name) {
  if (name == "mech1") return AuditMechanism::mech1;
  if (name == "mech3") return AuditMechanism::mech3;
  if (name == "gvmax") return AuditMechanism::g_vmax;
  throw ParseError("--mechanism", "audits support mech1, mech3 and gvmax; got " + name);
}

int cmd_audit(const CommonOptions& options, const std::string& echo) {
  (void)echo;
  LoadedInstance loaded = load_instance(options.instance_path);
  if (!is_position_auction(loaded.instance))
    throw ParseError(options.instance_path, "audits need a position-auction instance");
  const auto& pos = std::get<PositionAuctionInstance>(loaded.instance);
  const AuditMechanism mech = parse_audit_mechanism(options.mechanism);

  std::vector<AgentId> agents;
  if (options.agent != 0) {
    agents.push_back(options.agent);
  } else {
    for (AgentId i = 1; i <= pos.num_agents(); ++i) agents.push_back(i);
  }

  bool violation_found = false;
  for (AgentId agent : agents) {
    const MonotonicityReport report = monotonicity_audit(pos, agent, mech);
    std::cout << "# agent " << agent << " mechanism " << options.mechanism << "\n"
              << monotonicity_csv(report);
    violation_found = violation_found || !report.ok();
  }
  return violation_found ? kExitViolation : kExitOk;
}

int cmd_payments(const CommonOptions& options, const std::string& echo) {
  (void)echo;
  LoadedInstance loaded = load_instance(options.instance_path);
  if (!is_position_auction(loaded.instance))
    throw ParseError(options.instance_path, "payments need a position-auction instance");
  const auto& pos = std::get<PositionAuctionInstance>(loaded.instance);

  const std::string& name = options.mechanism;
  if (name == "mech1")
    throw ParseError("--mechanism",
                     "payments are undefined for mech1 (non-monotone allocation rule)");
  if (name == "mech3" || name == "gvmax") {
    std::cout << payments_csv(pos, name == "mech3" ? PaymentMechanism::mech3
                                                   : PaymentMechanism::g_vmax);
    return kExitOk;
  }
  if (name == "mech4") {
    if (!options.seed_given)
      std::cerr << "note: randomized mechanism without --seed; using seed 0\n";
    SplitMix64 rng{options.seed_given ? options.seed : 0};
    const Arm arm = draw_mech4_arm(rng.next());
    std::cout << "# mech4 drawn arm: " << arm_name(arm) << "\n"
              << payments_csv(pos, arm == Arm::mech_greedy ? PaymentMechanism::mech3
                                                            : PaymentMechanism::g_vmax);
    return kExitOk;
  }
  throw ParseError("--mechanism", "payments support mech3, gvmax and mech4; got " + name);
}

Json ratio_stats_json(const RatioStats& stats) {
  Json node;
  node["count"] = stats.count;
  if (stats.min) node["min"] = rational_json(*stats.min);
  if (stats.median) node["median"] = rational_json(*stats.median);
  if (stats.max) node["max"] = rational_json(*stats.max);
  return node;
}

int cmd_experiment(const CommonOptions& options, int trials, int max_agents, int max_positions,
                   const std::string& echo) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config;
  if (options.family == "random-general") {
    config.family = ExperimentFamily::random_general;
  } else if (options.family == "random-position") {
    config.family = ExperimentFamily::random_position;
  } else {
    throw ParseError("--family", "experiments support random-general and random-position");
  }
  config.trials = trials;
  config.seed = options.seed_given ? options.seed : 0;
  config.max_agents = max_agents;
  config.max_positions = max_positions;

  const ExperimentSummary summary = run_experiment(config);
  Json report;
  report["command"] = echo;
  report["family"] = options.family;
  report["trials"] = summary.trials;
  report["seed"] = config.seed;
  Json checks;
  checks["infeasibleOutputs"] = summary.infeasible_outputs;
  checks["sixApproxViolations"] = summary.six_approx_violations;
  checks["twelveApproxViolations"] = summary.twelve_approx_violations;
  checks["optDominanceViolations"] = summary.opt_dominance_violations;
  checks["determinismViolations"] = summary.determinism_violations;
  checks["examinationBoundViolations"] = summary.examination_bound_violations;
  if (config.family == ExperimentFamily::random_position) {
    checks["monotonicityViolations"] = summary.monotonicity_violations;
    checks["structureViolations"] = summary.structure_violations;
    checks["oracleCrosscheckFailures"] = summary.oracle_crosscheck_failures;
  }
  report["checks"] = std::move(checks);
  report["totalViolations"] = summary.total_violations();
  report["maxExaminations"] = summary.max_examinations;
  report["mech2ExpectedRatio"] = ratio_stats_json(summary.mech2_expected_ratio);
  report["mech4ExpectedRatio"] = ratio_stats_json(summary.mech4_expected_ratio);
  emit(report, start);
  return summary.total_violations() == 0 ? kExitOk : kExitViolation;
}

int cmd_generate(const CommonOptions& options, int n, int k, const std::string& out_path,
                 const std::string& echo) {
  (void)echo;
  AnyInstance instance;
  if (options.family == "random-general" || options.family == "random-position") {
    RandomInstanceSpec spec;
    spec.kind = options.family == "random-general" ? RandomKind::general : RandomKind::position;
    spec.num_agents = n;
    spec.num_positions = k;
    if (spec.kind == RandomKind::position) spec.value_lo = Rational(1, 4);
    spec.capacity_factor = Rational(std::max(1, n / 2));
    instance = random_instance(options.seed_given ? options.seed : 0, spec);
  } else {
    instance = paper_instance(options.family, collect_params(options.raw_params));
  }
  const std::string text = serialize_instance(instance);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ParseError(out_path, "cannot write file");
    out << text;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capacity-constrained position auction mechanisms"};
  app.require_subcommand(1);
  const std::string echo = command_echo(argc, argv);

  CommonOptions options;
  int trials = 100;
  int max_agents = 6;
  int max_positions = 4;
  int gen_agents = 5;
  int gen_positions = 3;
  std::string rule_name;
  std::string out_path;

  CLI::App* solve = app.add_subcommand("solve", "run a mechanism on an instance file");
  solve->add_option("instance,--instance", options.instance_path, "instance file")->required();
  solve->add_option("mechanism,--mechanism", options.mechanism,
                    "greedy-density|greedy-value|max-greedy|gvmax|mech1|mech3|mech3-relaxed|"
                    "mech2|mech4")
      ->required();
  solve->add_option("--seed", options.seed, "seed for randomized mechanisms")
      ->each([&](const std::string&) { options.seed_given = true; });
  solve->add_flag("--trace", options.trace, "emit the examination log on stderr");

  CLI::App* opt = app.add_subcommand("opt", "exhaustive optimal matching (oracle-scale)");
  opt->add_option("instance,--instance", options.instance_path, "instance file")->required();

  CLI::App* ratio = app.add_subcommand("ratio", "OPT divided by a rule's expected welfare");
  ratio->add_option("--instance", options.instance_path, "instance file");
  ratio->add_option("--family", options.family, "catalog family name");
  ratio->add_option("rule", rule_name, "mech1|mech3|max-greedy|mech2-expected|mech4-expected")
      ->required();
  add_param_flags(ratio, options);

  CLI::App* audit = app.add_subcommand("audit", "monotonicity audit (exit 1 on violation)");
  audit->add_option("instance,--instance", options.instance_path, "instance file")->required();
  audit->add_option("mechanism,--mechanism", options.mechanism, "mech1|mech3|gvmax")->required();
  audit->add_option("--agent", options.agent, "audit a single agent (default: all)");

  CLI::App* payments = app.add_subcommand("payments", "Myerson payment report (CSV)");
  payments->add_option("instance,--instance", options.instance_path, "instance file")
      ->required();
  payments->add_option("mechanism,--mechanism", options.mechanism, "mech3|gvmax|mech4")
      ->required();
  payments->add_option("--seed", options.seed, "seed for the mech4 arm draw")
      ->each([&](const std::string&) { options.seed_given = true; });

  CLI::App* experiment = app.add_subcommand("experiment", "random-instance property sweep");
  experiment->add_option("--family", options.family, "random-general|random-position")
      ->required();
  experiment->add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);
  experiment->add_option("--seed", options.seed, "base seed (per-trial seed is seed+index)")
      ->each([&](const std::string&) { options.seed_given = true; });
  experiment->add_option("--max-agents", max_agents, "agents per trial upper bound");
  experiment->add_option("--max-positions", max_positions, "positions per trial upper bound");

  CLI::App* generate = app.add_subcommand("generate", "write a catalog or random instance");
  generate->add_option("--family", options.family, "catalog name or random-general|random-position")
      ->required();
  generate->add_option("--seed", options.seed, "seed for random families")
      ->each([&](const std::string&) { options.seed_given = true; });
  generate->add_option("--n", gen_agents, "agents (random families)");
  generate->add_option("--k", gen_positions, "positions (random families)");
  generate->add_option("--out", out_path, "output path (default: stdout)");
  add_param_flags(generate, options);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(options, echo);
    if (opt->parsed()) return cmd_opt(options, echo);
    if (ratio->parsed()) return cmd_ratio(options, rule_name, echo);
    if (audit->parsed()) return cmd_audit(options, echo);
    if (payments->parsed()) return cmd_payments(options, echo);
    if (experiment->parsed())
      return cmd_experiment(options, trials, max_agents, max_positions, echo);
    if (generate->parsed()) return cmd_generate(options, gen_agents, gen_positions, out_path, echo);
  } catch (const GuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitGuard;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InstanceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
