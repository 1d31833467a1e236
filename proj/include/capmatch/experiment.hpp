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

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "capmatch/core.hpp"
#include "capmatch/instances.hpp"
#include "capmatch/mechanisms.hpp"
#include "capmatch/oracle.hpp"

namespace capmatch {

struct RatioStats {
  int count = 0;
  std::optional<Rational> min, median, max;
};

inline RatioStats summarize_ratios(std::vector<Rational> ratios) {
  RatioStats stats;
  stats.count = static_cast<int>(ratios.size());
  if (ratios.empty()) return stats;
  std::sort(ratios.begin(), ratios.end());
  stats.min = ratios.front();
  stats.max = ratios.back();
  const std::size_t mid = ratios.size() / 2;
  stats.median = ratios.size() % 2 == 1 ? ratios[mid]
                                        : Rational((ratios[mid - 1] + ratios[mid]) / 2);
  return stats;
}

enum class ExperimentFamily { random_general, random_position };

struct ExperimentConfig {
  ExperimentFamily family = ExperimentFamily::random_general;
  int trials = 100;
  std::uint64_t seed = 0;
  int max_agents = 6;
  int max_positions = 4;
  bool run_audits = true;  // position family: per-agent monotonicity audits
};

struct ExperimentSummary {
  int trials = 0;
  // checked on every trial; all must stay zero
  int infeasible_outputs = 0;
  int six_approx_violations = 0;     // OPT <= 3*mech1 + 3*gvmax
  int twelve_approx_violations = 0;  // OPT <= 3*mech3 + 9*gvmax
  int opt_dominance_violations = 0;  // OPT >= every mechanism welfare
  int determinism_violations = 0;    // identical rerun, identical trace
  int examination_bound_violations = 0;
  int monotonicity_violations = 0;     // position family
  int structure_violations = 0;        // position family
  int oracle_crosscheck_failures = 0;  // position family
  std::size_t max_examinations = 0;
  RatioStats mech2_expected_ratio;
  RatioStats mech4_expected_ratio;

  int total_violations() const {
    return infeasible_outputs + six_approx_violations + twelve_approx_violations +
           opt_dominance_violations + determinism_violations + examination_bound_violations +
           monotonicity_violations + structure_violations + oracle_crosscheck_failures;
  }
};

namespace detail {

inline AnyInstance draw_trial_instance(ExperimentFamily family, std::uint64_t trial_seed,
                                       int max_agents, int max_positions) {
  SplitMix64 rng{trial_seed};
  RandomInstanceSpec spec;
  spec.num_agents = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_agents)));
  spec.num_positions =
      1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_positions)));
  spec.size_lo = Rational(1, 4);
  spec.size_hi = 4;
  if (family == ExperimentFamily::random_general) {
    spec.kind = RandomKind::general;
    spec.value_lo = 0;
    spec.value_hi = 8;
  } else {
    spec.kind = RandomKind::position;
    spec.value_lo = Rational(1, 4);
    spec.value_hi = 8;
  }
  spec.capacity_factor =
      Rational(1 + static_cast<long>(rng.below(4ull * static_cast<std::uint64_t>(spec.num_agents))), 4);
  return random_instance(rng.next(), spec);
}

}  // namespace detail

/// Deterministic experiment sweep: every trial runs the mechanisms, the exact
/// oracle and the paper's testable inequalities. Per-trial seeds are
/// pre-assigned (seed + index) so results are independent of evaluation
/// order.
inline ExperimentSummary run_experiment(const ExperimentConfig& config) {
  if (config.trials < 1) throw InstanceError("trials must be >= 1");
  if (config.max_agents < 1 || config.max_agents > kOracleMaxAgents ||
      config.max_positions < 1 || config.max_positions > kOracleMaxPositions)
    throw InstanceError("experiment sizes must fit the oracle guard");

  ExperimentSummary summary;
  summary.trials = config.trials;
  std::vector<Rational> mech2_ratios, mech4_ratios;

  for (int index = 0; index < config.trials; ++index) {
    const std::uint64_t trial_seed = config.seed + static_cast<std::uint64_t>(index);
    const AnyInstance any = detail::draw_trial_instance(
        config.family, trial_seed, config.max_agents, config.max_positions);
    const Instance instance = to_general(any);

    const Trace trace1 = mechanism1(instance);
    const Trace trace3 = mechanism3(instance);
    const Matching vmax = g_vmax(instance);
    const Matching optimum = optimal_matching(instance);

    for (const Matching* m :
         {&trace1.final_matching, &trace3.final_matching, &vmax, &optimum})
      if (!validate(instance, *m).empty()) ++summary.infeasible_outputs;

    if (optimum.welfare > 3 * trace1.final_matching.welfare + 3 * vmax.welfare)
      ++summary.six_approx_violations;
    if (optimum.welfare > 3 * trace3.final_matching.welfare + 9 * vmax.welfare)
      ++summary.twelve_approx_violations;
    for (const Matching* m : {&trace1.final_matching, &trace3.final_matching, &vmax})
      if (m->welfare > optimum.welfare) ++summary.opt_dominance_violations;

    const std::size_t n = static_cast<std::size_t>(instance.num_agents());
    const std::size_t k = static_cast<std::size_t>(instance.num_positions());
    const std::size_t bound = n * k + n * k * k;
    for (const Trace* t : {&trace1, &trace3}) {
      summary.max_examinations = std::max(summary.max_examinations, t->steps.size());
      if (t->steps.size() > bound) ++summary.examination_bound_violations;
    }
    if (mechanism1(instance).final_matching != trace1.final_matching ||
        mechanism3(instance).final_matching != trace3.final_matching)
      ++summary.determinism_violations;

    const Rational mech2_expected = (trace1.final_matching.welfare + vmax.welfare) / 2;
    const Rational mech4_expected =
        trace3.final_matching.welfare / 4 + vmax.welfare * Rational(3, 4);
    if (mech2_expected != 0) mech2_ratios.push_back(optimum.welfare / mech2_expected);
    if (mech4_expected != 0) mech4_ratios.push_back(optimum.welfare / mech4_expected);

    if (config.family == ExperimentFamily::random_position) {
      const auto& pos = std::get<PositionAuctionInstance>(any);
      if (!structure_check(pos, trace3).ok()) ++summary.structure_violations;
      if (position_auction_optimal(pos).welfare != optimum.welfare)
        ++summary.oracle_crosscheck_failures;
      if (config.run_audits)
        for (AgentId agent = 1; agent <= pos.num_agents(); ++agent) {
          if (!monotonicity_audit(pos, agent, AuditMechanism::mech3).ok())
            ++summary.monotonicity_violations;
          if (!monotonicity_audit(pos, agent, AuditMechanism::g_vmax).ok())
            ++summary.monotonicity_violations;
        }
    }
  }

  summary.mech2_expected_ratio = summarize_ratios(std::move(mech2_ratios));
  summary.mech4_expected_ratio = summarize_ratios(std::move(mech4_ratios));
  return summary;
}

}  // namespace capmatch
