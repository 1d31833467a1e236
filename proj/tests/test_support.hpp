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

#include <map>
#include <string>
#include <vector>

#include "capmatch/core.hpp"
#include "capmatch/instances.hpp"
#include "capmatch/mechanisms.hpp"

namespace capmatch::test {

inline Rational rat(const char* text) { return parse_rational(text); }

inline Instance general(const Rational& capacity, std::vector<Rational> sizes,
                        std::vector<std::vector<Rational>> values) {
  Instance instance{capacity, std::move(sizes), std::move(values)};
  validate_instance(instance);
  return instance;
}

inline PositionAuctionInstance position(const Rational& capacity, std::vector<Rational> values,
                                        std::vector<Rational> sizes,
                                        std::vector<Rational> ctrs) {
  PositionAuctionInstance pos{capacity, std::move(values), std::move(sizes), std::move(ctrs)};
  validate_instance(pos);
  return pos;
}

inline std::vector<Pair> pairs_of(const Matching& m) { return m.pairs; }

/// The value occupying any fixed position must never decrease over a run.
inline bool position_values_never_decrease(const Instance& instance, const Trace& trace) {
  std::map<PositionId, Rational> current;
  for (const TraceStep& step : trace.steps) {
    if (step.action != StepAction::assigned && step.action != StepAction::replaced) continue;
    const Rational& incoming = instance.value(step.entry.agent, step.entry.position);
    auto it = current.find(step.entry.position);
    if (it != current.end() && incoming < it->second) return false;
    current[step.entry.position] = incoming;
  }
  return true;
}

/// Re-entry consequence of the modified replacement rule on position-auction
/// traces: when an agent is displaced from position j after the run has
/// already examined entries beyond her (j+1) entry, the very next examined
/// entry is hers for position j+1 and it enters the solution.
inline int reentry_violations(const Instance& instance, const Trace& trace) {
  int violations = 0;
  std::optional<DensityEntry> deepest_examined;
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const TraceStep& step = trace.steps[t];
    if (!deepest_examined || entry_precedes(*deepest_examined, step.entry))
      deepest_examined = step.entry;
    if (step.action != StepAction::replaced) continue;

    const AgentId displaced = step.displaced;
    const PositionId next_position = step.entry.position + 1;
    if (next_position > instance.num_positions()) continue;
    const Rational& v = instance.value(displaced, next_position);
    if (v <= 0) continue;
    const DensityEntry reentry{displaced, next_position, Rational(v / instance.size(displaced))};
    if (!entry_precedes(reentry, *deepest_examined)) continue;  // not yet passed over

    if (t + 1 >= trace.steps.size()) {
      ++violations;
      continue;
    }
    const TraceStep& next = trace.steps[t + 1];
    if (next.entry.agent != displaced || next.entry.position != next_position ||
        (next.action != StepAction::assigned && next.action != StepAction::replaced))
      ++violations;
  }
  return violations;
}

inline std::size_t examination_bound(const Instance& instance) {
  const std::size_t n = static_cast<std::size_t>(instance.num_agents());
  const std::size_t k = static_cast<std::size_t>(instance.num_positions());
  return n * k + n * k * k;
}

/// Small deterministic instance stream for property tests.
inline AnyInstance draw_instance(RandomKind kind, std::uint64_t seed, int max_agents = 6,
                                 int max_positions = 4) {
  SplitMix64 rng{seed};
  RandomInstanceSpec spec;
  spec.kind = kind;
  spec.num_agents = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_agents)));
  spec.num_positions =
      1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_positions)));
  spec.size_lo = Rational(1, 4);
  spec.size_hi = 4;
  spec.value_lo = kind == RandomKind::position ? Rational(1, 4) : Rational(0);
  spec.value_hi = 8;
  spec.capacity_factor = Rational(
      1 + static_cast<long>(rng.below(4ull * static_cast<std::uint64_t>(spec.num_agents))), 4);
  return random_instance(rng.next(), spec);
}

}  // namespace capmatch::test
