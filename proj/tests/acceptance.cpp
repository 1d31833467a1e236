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

// Acceptance suite: every headline result is reproduced exactly, at desk
// scale, with one pass/fail line per criterion. Exits nonzero when any
// criterion fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "capmatch/experiment.hpp"
#include "capmatch/instances.hpp"
#include "capmatch/io.hpp"
#include "capmatch/mechanisms.hpp"
#include "capmatch/oracle.hpp"
#include "capmatch/payments.hpp"

using namespace capmatch;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  Outcome& outcome;
  void operator()(bool condition, const std::string& label) {
    if (condition) return;
    outcome.pass = false;
    if (!outcome.detail.empty()) outcome.detail += "; ";
    outcome.detail += label;
  }
};

int failures = 0;

void run_criterion(int number, const std::string& title, double limit_seconds,
                   const std::function<void(Check&)>& body) {
  Outcome outcome;
  Check check{outcome};
  const auto start = std::chrono::steady_clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    outcome.pass = false;
    outcome.detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (seconds >= limit_seconds) {
    outcome.pass = false;
    if (!outcome.detail.empty()) outcome.detail += "; ";
    outcome.detail += "over time budget";
  }
  std::ostringstream line;
  line << "criterion " << number << " [" << title << "]: " << (outcome.pass ? "PASS" : "FAIL")
       << " (" << seconds << " s, budget " << limit_seconds << " s)";
  if (!outcome.detail.empty()) line << " — " << outcome.detail;
  std::cout << line.str() << "\n";
  if (!outcome.pass) ++failures;
}

std::string cli_path;

int run_cli(const std::string& args) {
  const std::string command = cli_path + " " + args + " >/dev/null 2>/dev/null";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write_temp_instance(const std::string& name, const AnyInstance& instance) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "capmatch-acceptance";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out << serialize_instance(instance);
  return path.string();
}

std::string frac(const Rational& r) { return to_fraction_string(r); }

}  // namespace

int main(int argc, char** argv) {
  cli_path = argc > 1 ? argv[1] : CAPMATCH_CLI_PATH;
  std::cout << "capmatch acceptance suite\n";

  // 1. The replacement greedy alone can be arbitrarily bad.
  run_criterion(1, "prop31 reproduction", 1.0, [](Check& check) {
    const auto instance = std::get<Instance>(
        paper_instance("prop31", {{"W", Rational(100)}, {"eps", Rational(1, 100)}}));
    const Rational mech1_welfare = mechanism1(instance).final_matching.welfare;
    const Rational opt = optimal_matching(instance).welfare;
    check(mech1_welfare == Rational(101, 100), "mech1 welfare != 101/100");
    check(opt == Rational(100), "opt != 100");
    check(opt / mech1_welfare == Rational(10000, 101), "ratio != 10000/101");
  });

  // 2. Lower bound 3 for the half-half mix.
  run_criterion(2, "thm34 lower bound", 1.0, [](Check& check) {
    const Params params = {
        {"eps", Rational(1, 1000)}, {"delta1", Rational(1, 10000)}, {"delta2", Rational(1, 10000)}};
    const auto instance = std::get<Instance>(paper_instance("thm34-lb", params));
    const Rational mech1_welfare = mechanism1(instance).final_matching.welfare;
    const Rational vmax_welfare = g_vmax(instance).welfare;
    const Rational opt = optimal_matching(instance).welfare;
    check(mech1_welfare == Rational(1501, 500), "mech1 welfare != 3+2eps");
    check(vmax_welfare == Rational(1501, 500), "gvmax welfare != 3+2eps");
    check(opt == Rational(9),
          "opt != 9 (exact optimum is " + frac(opt) + ": {1->1,3->2} plus three unit agents)");
    const Rational ratio = opt / ((mech1_welfare + vmax_welfare) / 2);
    check(ratio > Rational(299, 100) && ratio < 3,
          "mech2-expected ratio " + frac(ratio) + " outside (2.99, 3)");
  });

  // 3 & 4. Upper-bound inequalities on a thousand random general instances.
  {
    ExperimentConfig config;
    config.family = ExperimentFamily::random_general;
    config.trials = 1000;
    config.seed = 0;
    config.max_agents = 7;
    config.max_positions = 4;
    ExperimentSummary summary;
    run_criterion(3, "6-approximation property", 60.0, [&](Check& check) {
      summary = run_experiment(config);
      check(summary.six_approx_violations == 0,
            std::to_string(summary.six_approx_violations) +
                " violations of OPT <= 3*mech1 + 3*gvmax");
      check(summary.infeasible_outputs == 0, "infeasible mechanism outputs");
    });
    run_criterion(4, "12-approximation property", 60.0, [&](Check& check) {
      check(summary.trials == 1000, "experiment did not run");
      check(summary.twelve_approx_violations == 0,
            std::to_string(summary.twelve_approx_violations) +
                " violations of OPT <= 3*mech3 + 9*gvmax");
    });
  }

  // 5. Non-monotonicity of the unmodified rule, as a scriptable audit.
  run_criterion(5, "prop41 reproduction", 1.0, [](Check& check) {
    const auto pos = std::get<PositionAuctionInstance>(
        paper_instance("prop41", {{"eps", Rational(1, 100)}}));
    const Matching truthful = mechanism1(realized(pos)).final_matching;
    check(truthful.position_of(3) == PositionId{4}, "agent 3 not on position 4 at bid 3");
    const Matching deviated =
        mechanism1(realized_with_bid(pos, 3, Rational(401, 100))).final_matching;
    check(!deviated.position_of(3).has_value(), "agent 3 assigned at bid 4+eps");
    const std::string path = write_temp_instance("prop41.json", pos);
    check(run_cli("audit " + path + " mech1 --agent 3") == 1, "mech1 audit exit code != 1");
    check(run_cli("audit " + path + " mech3") == 0, "mech3 audit exit code != 0");
  });

  // 6. Monotonicity of the modified rule at full grid resolution.
  ExperimentSummary position_summary;
  run_criterion(6, "thm45 monotonicity", 120.0, [&](Check& check) {
    ExperimentConfig config;
    config.family = ExperimentFamily::random_position;
    config.trials = 500;
    config.seed = 0;
    config.max_agents = 6;
    config.max_positions = 4;
    config.run_audits = true;
    position_summary = run_experiment(config);
    check(position_summary.monotonicity_violations == 0,
          std::to_string(position_summary.monotonicity_violations) +
              " monotonicity violations (mech3 + gvmax grids)");
  });

  // 7. Lower bounds for the quarter mix.
  run_criterion(7, "prop46 lower bounds", 5.0, [](Check& check) {
    {
      const Params params = {{"k", Rational(200)}, {"V", Rational(10)}};
      const Instance instance = to_general(paper_instance("prop46-pos", params));
      const Rational opt = *catalog_expected("prop46-pos", params, "opt");
      const Rational expected = mechanism4(instance, Arm::g_vmax).expected_welfare;
      check(expected == *catalog_expected("prop46-pos", params, "mech4-expected"),
            "prop46-pos expectation mismatch");
      const Rational ratio = opt / expected;
      check(ratio > Rational(39, 10) && ratio < 4,
            "prop46-pos ratio " + frac(ratio) + " outside (3.9, 4)");
    }
    {
      const Params params = {
          {"k", Rational(200)}, {"V", Rational(1)}, {"eps", Rational(1, 1000000)}};
      const Instance instance = to_general(paper_instance("prop46-gen", params));
      const Rational opt = *catalog_expected("prop46-gen", params, "opt");
      const Rational expected = mechanism4(instance, Arm::g_vmax).expected_welfare;
      check(expected == *catalog_expected("prop46-gen", params, "mech4-expected"),
            "prop46-gen expectation mismatch");
      const Rational ratio = opt / expected;
      check(ratio > Rational(79, 10) && ratio < 8,
            "prop46-gen ratio " + frac(ratio) + " outside (7.9, 8): 8k/((1+eps)(k+6)) needs k" +
                " >= 476 to clear 7.9");
    }
  });

  // 8. Theta(k) failure of the greedy composition.
  run_criterion(8, "propA1 greedy gap", 1.0, [](Check& check) {
    const Params params = {{"l", Rational(10)}, {"eps", Rational(1, 1000)}};
    const Instance instance = to_general(paper_instance("appendixA", params));
    const Rational opt = *catalog_expected("appendixA", params, "opt");
    check(opt == Rational(155), "opt formula != 155");
    const Rational greedy = max_greedy(instance).welfare;
    check(greedy == Rational(20) * Rational(1001, 1000),
          "max_greedy welfare " + frac(greedy) + " != 20*(1+1/1000)");
    const Rational ratio = opt / greedy;
    check(ratio >= Rational(3 * 20, 8) - 1, "ratio below 3k/8 - 1");
  });

  // 9. The stopping rule is what preserves monotonicity.
  run_criterion(9, "appendixB stopping rule", 1.0, [](Check& check) {
    const auto pos = std::get<PositionAuctionInstance>(paper_instance("appendixB"));
    const Matching at12 = mechanism3(realized(pos)).final_matching;
    check(at12.position_of(1) == PositionId{2}, "agent 1 not on position 2 at bid 12");
    const Matching at14 = mechanism3(realized_with_bid(pos, 1, Rational(14))).final_matching;
    check(at14.position_of(1) == PositionId{2}, "agent 1 not on position 2 at bid 14");
    const Matching relaxed =
        mechanism3(realized_with_bid(pos, 1, Rational(14)), true).final_matching;
    check(!relaxed.position_of(1).has_value(), "relaxed variant keeps agent 1 assigned");
    check(relaxed.position_of(2) == PositionId{2}, "agent 2 did not take position 2");
  });

  // 10. Rearrangement inequality on random dominance-satisfying pairs.
  run_criterion(10, "lemma32 rearrangement", 10.0, [](Check& check) {
    SplitMix64 rng{2026};
    for (int trial = 0; trial < 10000; ++trial) {
      std::vector<WeightedItem> b;
      const int nb = 1 + static_cast<int>(rng.below(4));
      Rational max_density_b = 0, size_b = 0;
      for (int t = 0; t < nb; ++t) {
        const Rational size(1 + static_cast<long>(rng.below(12)),
                            1 + static_cast<long>(rng.below(4)));
        const Rational value(1 + static_cast<long>(rng.below(24)),
                             1 + static_cast<long>(rng.below(4)));
        b.push_back({value, size});
        max_density_b = std::max(max_density_b, Rational(value / size));
        size_b += size;
      }
      std::vector<WeightedItem> a;
      const int na = 1 + static_cast<int>(rng.below(4));
      Rational size_a = 0;
      for (int t = 0; t < na; ++t) {
        Rational size(1 + static_cast<long>(rng.below(12)),
                      1 + static_cast<long>(rng.below(4)));
        if (t + 1 == na && size_a + size < size_b)
          size = size_b - size_a + Rational(1, 4);
        const Rational bump(1 + static_cast<long>(rng.below(16)),
                            1 + static_cast<long>(rng.below(4)));
        a.push_back({(max_density_b + bump) * size, size});
        size_a += size;
      }
      const RearrangementResult result = rearrangement_check(a, b);
      if (!result.applicable || !result.holds) {
        check(false, "failed at trial " + std::to_string(trial));
        return;
      }
    }
  });

  // 11. Output structure of the modified rule.
  run_criterion(11, "lemma44 structure", 60.0, [&](Check& check) {
    for (const char* name : {"prop41", "prop46-pos", "appendixA", "appendixB"}) {
      const auto pos = std::get<PositionAuctionInstance>(paper_instance(name));
      const auto result = structure_check(pos, mechanism3(realized(pos)));
      check(result.ok(), std::string(name) + " structure violation");
    }
    check(position_summary.trials == 500, "position experiment did not run");
    check(position_summary.structure_violations == 0,
          std::to_string(position_summary.structure_violations) +
              " random-instance structure violations");
  });

  // 12. Truthfulness of both monotone rules under Myerson payments.
  run_criterion(12, "truthfulness", 30.0, [](Check& check) {
    for (const char* name : {"prop41", "prop46-pos", "appendixA", "appendixB"}) {
      const auto pos = std::get<PositionAuctionInstance>(paper_instance(name));
      for (AgentId agent = 1; agent <= pos.num_agents(); ++agent)
        for (const PaymentMechanism mech :
             {PaymentMechanism::mech3, PaymentMechanism::g_vmax}) {
          const TruthfulnessResult result = truthfulness_audit(pos, agent, mech);
          check(result.ok, std::string(name) + " agent " + std::to_string(agent) +
                               " profitable deviation");
        }
    }
    const auto second_price = PositionAuctionInstance{
        Rational(1), {Rational(5), Rational(3)}, {Rational(1), Rational(1)}, {Rational(1)}};
    const TruthfulnessResult corrupted =
        truthfulness_audit(second_price, 1, PaymentMechanism::g_vmax, Rational(1));
    check(!corrupted.ok, "corrupted payment control not caught");
  });

  // 13. The brute-force oracle agrees with the position-auction shortcut.
  run_criterion(13, "oracle cross-check", 60.0, [](Check& check) {
    ExperimentConfig config;
    config.family = ExperimentFamily::random_position;
    config.trials = 200;
    config.seed = 0;
    config.max_agents = 6;
    config.max_positions = 4;
    config.run_audits = false;
    const ExperimentSummary summary = run_experiment(config);
    check(summary.oracle_crosscheck_failures == 0,
          std::to_string(summary.oracle_crosscheck_failures) + " cross-check failures");
  });

  std::cout << (failures == 0 ? "all criteria passed"
                              : std::to_string(failures) + " criterion(s) failed")
            << "\n";
  return failures == 0 ? 0 : 1;
}
