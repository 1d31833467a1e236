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
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "capmatch/core.hpp"

namespace capmatch {

enum class StepAction { assigned, replaced, skipped, stopped };
enum class StopReason { capacity_stop, list_exhausted };

struct TraceStep {
  DensityEntry entry;
  StepAction action = StepAction::skipped;
  AgentId displaced = 0;      // set when action == replaced
  Rational available_after;   // w after the step
};

/// Ordered log of one replacement-greedy run. Replaying the steps against the
/// instance reproduces final_matching; the running assignment is feasible at
/// every step; nothing follows a capacity stop.
struct Trace {
  std::vector<TraceStep> steps;
  Matching final_matching;
  std::optional<DensityEntry> last_examined;
  StopReason stop_reason = StopReason::list_exhausted;
};

namespace detail {

enum class ReplacementVariant { mechanism_one, mechanism_three };

// Shared engine for the two replacement-greedy mechanisms. Maintains the pool
// of unexamined entries ordered by entry_precedes and always pops its maximum,
// so reinserted high-density entries are examined next.
inline Trace run_replacement_greedy(const Instance& instance, ReplacementVariant variant,
                                    bool relaxed_stop) {
  const int n = instance.num_agents();
  std::vector<std::vector<DensityEntry>> agent_entries(static_cast<std::size_t>(n) + 1);
  std::set<DensityEntry, EntryPrecedes> pool;
  for (const DensityEntry& e : density_order(instance)) {
    agent_entries[static_cast<std::size_t>(e.agent)].push_back(e);
    pool.insert(e);
  }

  std::map<PositionId, AgentId> occupant;
  std::vector<std::set<PositionId>> ever_assigned(static_cast<std::size_t>(n) + 1);
  Rational w = instance.capacity;

  Trace trace;
  const auto remove_agent_entries = [&](AgentId i) {
    for (const DensityEntry& e : agent_entries[static_cast<std::size_t>(i)]) pool.erase(e);
  };
  const auto reinsert_displaced = [&](AgentId i) {
    for (const DensityEntry& e : agent_entries[static_cast<std::size_t>(i)])
      if (!ever_assigned[static_cast<std::size_t>(i)].contains(e.position)) pool.insert(e);
  };
  const auto assign = [&](const DensityEntry& e) {
    occupant[e.position] = e.agent;
    ever_assigned[static_cast<std::size_t>(e.agent)].insert(e.position);
    remove_agent_entries(e.agent);
  };

  while (!pool.empty()) {
    const DensityEntry entry = *pool.begin();
    pool.erase(pool.begin());
    trace.last_examined = entry;

    const AgentId i = entry.agent;
    const PositionId j = entry.position;
    const auto it = occupant.find(j);

    if (it == occupant.end()) {
      if (w - instance.size(i) < 0) {
        if (relaxed_stop) {
          trace.steps.push_back({entry, StepAction::skipped, 0, w});
          continue;
        }
        trace.steps.push_back({entry, StepAction::stopped, 0, w});
        trace.stop_reason = StopReason::capacity_stop;
        break;
      }
      w -= instance.size(i);
      assign(entry);
      trace.steps.push_back({entry, StepAction::assigned, 0, w});
      continue;
    }

    const AgentId incumbent = it->second;
    // The capacity test precedes the value comparison, exactly as the
    // mechanism orders its clauses.
    const Rational slack = variant == ReplacementVariant::mechanism_one
                               ? Rational(w + instance.size(incumbent) - instance.size(i))
                               : Rational(w - instance.size(i));
    if (slack < 0) {
      if (relaxed_stop) {
        trace.steps.push_back({entry, StepAction::skipped, 0, w});
        continue;
      }
      trace.steps.push_back({entry, StepAction::stopped, 0, w});
      trace.stop_reason = StopReason::capacity_stop;
      break;
    }

    const Rational& incoming_value = instance.value(i, j);
    const Rational& incumbent_value = instance.value(incumbent, j);
    bool replace = false;
    if (variant == ReplacementVariant::mechanism_one) {
      replace = incoming_value > incumbent_value && instance.size(i) >= instance.size(incumbent);
    } else {
      if (incoming_value > incumbent_value) {
        replace = true;
      } else if (incoming_value == incumbent_value) {
        if (instance.size(i) < instance.size(incumbent)) {
          replace = true;
        } else if (instance.size(i) == instance.size(incumbent)) {
          DensityEntry incumbent_entry{incumbent, j,
                                       Rational(incumbent_value / instance.size(incumbent))};
          replace = entry_precedes(entry, incumbent_entry);
        }
      }
    }

    if (!replace) {
      trace.steps.push_back({entry, StepAction::skipped, 0, w});
      continue;
    }
    w += instance.size(incumbent) - instance.size(i);
    assign(entry);
    reinsert_displaced(incumbent);
    trace.steps.push_back({entry, StepAction::replaced, incumbent, w});
  }

  std::vector<Pair> pairs;
  for (const auto& [position, agent] : occupant) pairs.push_back({agent, position});
  trace.final_matching = make_matching(instance, std::move(pairs));
  return trace;
}

// One pass over a fixed ordering, no replacements, no stopping: assign when
// agent and position are free and the pair fits.
template <typename Ordering>
Matching run_simple_greedy(const Instance& instance, const Ordering& ordered_pairs) {
  std::set<AgentId> used_agents;
  std::set<PositionId> used_positions;
  Rational used = 0;
  std::vector<Pair> pairs;
  for (const auto& e : ordered_pairs) {
    if (used_agents.contains(e.agent) || used_positions.contains(e.position)) continue;
    if (used + instance.size(e.agent) > instance.capacity) continue;
    used += instance.size(e.agent);
    used_agents.insert(e.agent);
    used_positions.insert(e.position);
    pairs.push_back({e.agent, e.position});
  }
  return make_matching(instance, std::move(pairs));
}

}  // namespace detail

/// Greedy by density (Appendix-A baseline): highest density first.
inline Matching greedy_by_density(const Instance& instance) {
  return detail::run_simple_greedy(instance, density_order(instance));
}

/// Greedy by value (Appendix-A baseline): highest value first, ties by agent
/// then position index. Zero-value pairs are excluded as in density_order.
inline Matching greedy_by_value(const Instance& instance) {
  struct ValueEntry {
    AgentId agent;
    PositionId position;
    Rational value;
  };
  std::vector<ValueEntry> entries;
  for (AgentId i = 1; i <= instance.num_agents(); ++i)
    for (PositionId j = 1; j <= instance.num_positions(); ++j)
      if (instance.value(i, j) > 0) entries.push_back({i, j, instance.value(i, j)});
  std::sort(entries.begin(), entries.end(), [](const ValueEntry& a, const ValueEntry& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.agent != b.agent) return a.agent < b.agent;
    return a.position < b.position;
  });
  return detail::run_simple_greedy(instance, entries);
}

/// Welfare-max of the two greedy baselines; the density arm wins exact ties.
inline Matching max_greedy(const Instance& instance) {
  Matching by_density = greedy_by_density(instance);
  Matching by_value = greedy_by_value(instance);
  return by_density.welfare >= by_value.welfare ? by_density : by_value;
}

/// G(v_max): the single highest-value pair that fits the capacity on its own.
/// Ties by agent then position index; empty when no agent fits.
inline Matching g_vmax(const Instance& instance) {
  std::optional<Pair> best;
  Rational best_value = 0;
  for (AgentId i = 1; i <= instance.num_agents(); ++i) {
    if (instance.size(i) > instance.capacity) continue;
    for (PositionId j = 1; j <= instance.num_positions(); ++j) {
      const Rational& v = instance.value(i, j);
      if (v <= 0) continue;
      if (!best || v > best_value) {
        best = Pair{i, j};
        best_value = v;
      }
    }
  }
  std::vector<Pair> pairs;
  if (best) pairs.push_back(*best);
  return make_matching(instance, std::move(pairs));
}

/// Replacement greedy: density order with tentative assignments. At an
/// occupied position the incoming agent must fit counting the displaced
/// agent's released space; replacement requires strictly higher value and at
/// least the incumbent's size.
inline Trace mechanism1(const Instance& instance) {
  return detail::run_replacement_greedy(instance, detail::ReplacementVariant::mechanism_one,
                                        false);
}

/// Monotone variant: at an occupied position the incoming agent must fit
/// without counting the incumbent's space, and equal values replace when the
/// incoming agent is smaller, or of equal size and earlier in the density
/// order. With relaxed_stop a non-fitting entry is skipped instead of ending
/// the run.
inline Trace mechanism3(const Instance& instance, bool relaxed_stop = false) {
  return detail::run_replacement_greedy(instance, detail::ReplacementVariant::mechanism_three,
                                        relaxed_stop);
}

enum class Arm { mech_greedy, g_vmax };

struct RandomizedOutcome {
  Arm drawn_arm = Arm::mech_greedy;
  Matching matching;
  Rational expected_welfare;  // analytic mix, independent of the drawn arm
};

/// Randomizes 1/2-1/2 between mechanism1 and G(v_max). coin=false draws the
/// replacement-greedy arm.
inline RandomizedOutcome mechanism2(const Instance& instance, bool coin) {
  Matching greedy_arm = mechanism1(instance).final_matching;
  Matching vmax_arm = g_vmax(instance);
  RandomizedOutcome outcome;
  outcome.expected_welfare = (greedy_arm.welfare + vmax_arm.welfare) / 2;
  outcome.drawn_arm = coin ? Arm::g_vmax : Arm::mech_greedy;
  outcome.matching = coin ? std::move(vmax_arm) : std::move(greedy_arm);
  return outcome;
}

/// Maps a uniform 64-bit word to mechanism 4's asymmetric coin: the
/// replacement-greedy arm is drawn with probability 1/4.
inline Arm draw_mech4_arm(std::uint64_t word) {
  return (word & 3) == 0 ? Arm::mech_greedy : Arm::g_vmax;
}

/// Randomizes 1/4-3/4 between mechanism3 and G(v_max).
inline RandomizedOutcome mechanism4(const Instance& instance, Arm drawn_arm) {
  Matching greedy_arm = mechanism3(instance).final_matching;
  Matching vmax_arm = g_vmax(instance);
  RandomizedOutcome outcome;
  outcome.expected_welfare =
      greedy_arm.welfare / 4 + vmax_arm.welfare * Rational(3, 4);
  outcome.drawn_arm = drawn_arm;
  outcome.matching = drawn_arm == Arm::mech_greedy ? std::move(greedy_arm) : std::move(vmax_arm);
  return outcome;
}

enum class MechanismKind {
  greedy_density,
  greedy_value,
  max_greedy,
  g_vmax,
  mech1,
  mech3,
  mech3_relaxed,
};

inline Matching run_mechanism(MechanismKind kind, const Instance& instance) {
  switch (kind) {
    case MechanismKind::greedy_density: return greedy_by_density(instance);
    case MechanismKind::greedy_value: return greedy_by_value(instance);
    case MechanismKind::max_greedy: return max_greedy(instance);
    case MechanismKind::g_vmax: return g_vmax(instance);
    case MechanismKind::mech1: return mechanism1(instance).final_matching;
    case MechanismKind::mech3: return mechanism3(instance).final_matching;
    case MechanismKind::mech3_relaxed: return mechanism3(instance, true).final_matching;
  }
  throw Error("unknown mechanism");
}

/// Re-applies the logged steps and checks feasibility after each one. Throws
/// InstanceError when the log is incoherent; returns the resulting matching.
inline Matching replay_trace(const Instance& instance, const Trace& trace) {
  std::map<PositionId, AgentId> occupant;
  std::map<AgentId, PositionId> position_of;
  Rational used = 0;
  bool stopped = false;
  for (const TraceStep& step : trace.steps) {
    if (stopped) throw InstanceError("trace has events after a capacity stop");
    const AgentId i = step.entry.agent;
    const PositionId j = step.entry.position;
    if (i < 1 || i > instance.num_agents() || j < 1 || j > instance.num_positions())
      throw InstanceError("trace step out of range");
    switch (step.action) {
      case StepAction::assigned:
        if (occupant.contains(j)) throw InstanceError("assignment to an occupied position");
        if (position_of.contains(i)) throw InstanceError("assignment of an assigned agent");
        occupant[j] = i;
        position_of[i] = j;
        used += instance.size(i);
        break;
      case StepAction::replaced: {
        auto it = occupant.find(j);
        if (it == occupant.end() || it->second != step.displaced)
          throw InstanceError("replacement does not match the occupant");
        if (position_of.contains(i)) throw InstanceError("replacement by an assigned agent");
        position_of.erase(step.displaced);
        occupant[j] = i;
        position_of[i] = j;
        used += instance.size(i) - instance.size(step.displaced);
        break;
      }
      case StepAction::skipped: break;
      case StepAction::stopped: stopped = true; break;
    }
    if (used > instance.capacity) throw InstanceError("trace step exceeds capacity");
  }
  std::vector<Pair> pairs;
  for (const auto& [position, agent] : occupant) pairs.push_back({agent, position});
  return make_matching(instance, std::move(pairs));
}

inline std::string to_string(StepAction action, AgentId displaced = 0) {
  switch (action) {
    case StepAction::assigned: return "assigned";
    case StepAction::replaced: return "replaced:" + std::to_string(displaced);
    case StepAction::skipped: return "skipped";
    case StepAction::stopped: return "stopped";
  }
  return "?";
}

/// Line-oriented trace log, one event per line:
///   step=<n> pair=(i,j) d=<p/q> action=<...> w=<p/q>
inline std::vector<std::string> trace_log_lines(const Trace& trace) {
  std::vector<std::string> lines;
  int n = 0;
  for (const TraceStep& step : trace.steps) {
    std::ostringstream line;
    line << "step=" << ++n << " pair=(" << step.entry.agent << "," << step.entry.position
         << ") d=" << to_fraction_string(step.entry.density)
         << " action=" << to_string(step.action, step.displaced)
         << " w=" << to_fraction_string(step.available_after);
    lines.push_back(line.str());
  }
  return lines;
}

struct StructureCheckResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Verifies the structure of a mechanism3 run on a position auction:
///  (i)  occupied positions form a prefix of the CTR order,
///  (ii) realized values are non-increasing along occupied positions,
///  (iii) each occupied position holds the max-value agent among those whose
///        entry precedes the last processed one and who are not placed
///        earlier (ties by entry precedence).
inline StructureCheckResult structure_check(const PositionAuctionInstance& pos,
                                            const Trace& trace) {
  const Instance instance = realized(pos);
  if (replay_trace(instance, trace) != trace.final_matching)
    throw InstanceError("trace does not replay against the instance");

  StructureCheckResult result;
  const Matching& matching = trace.final_matching;

  std::map<PositionId, AgentId> occupant;
  for (const Pair& p : matching.pairs) occupant[p.position] = p.agent;
  const int l = static_cast<int>(occupant.size());

  for (PositionId j = 1; j <= l; ++j)
    if (!occupant.contains(j)) {
      result.violations.push_back("occupied positions are not a prefix: position " +
                                  std::to_string(j) + " is empty");
      return result;
    }

  for (PositionId j = 1; j + 1 <= l; ++j) {
    const Rational left = instance.value(occupant[j], j);
    const Rational right = instance.value(occupant[j + 1], j + 1);
    if (left < right)
      result.violations.push_back("realized value increases from position " +
                                  std::to_string(j) + " to " + std::to_string(j + 1));
  }

  // Threshold: the last entry whose examination did not end the run.
  std::optional<DensityEntry> threshold;
  for (const TraceStep& step : trace.steps)
    if (step.action != StepAction::stopped) threshold = step.entry;
  if (!threshold) return result;

  std::set<AgentId> placed_earlier;
  for (PositionId j = 1; j <= l; ++j) {
    std::optional<DensityEntry> best;
    for (AgentId i = 1; i <= pos.num_agents(); ++i) {
      if (placed_earlier.contains(i)) continue;
      const Rational& v = instance.value(i, j);
      if (v <= 0) continue;
      DensityEntry candidate{i, j, Rational(v / pos.size(i))};
      if (entry_precedes(*threshold, candidate)) continue;  // beyond the examined range
      if (!best || instance.value(best->agent, j) < v ||
          (instance.value(best->agent, j) == v && entry_precedes(candidate, *best)))
        best = candidate;
    }
    if (!best || best->agent != occupant[j])
      result.violations.push_back(
          "position " + std::to_string(j) + " holds agent " + std::to_string(occupant[j]) +
          ", expected agent " + (best ? std::to_string(best->agent) : std::string("none")));
    placed_earlier.insert(occupant[j]);
  }
  return result;
}

}  // namespace capmatch
