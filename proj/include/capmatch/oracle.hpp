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
#include <bit>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "capmatch/core.hpp"
#include "capmatch/mechanisms.hpp"

namespace capmatch {

inline constexpr int kOracleMaxAgents = 12;
inline constexpr int kOracleMaxPositions = 8;

namespace detail {

// Canonical order on pair sets: (agent, position)-sorted lists compared
// lexicographically, shorter prefix first.
inline bool pairs_lex_less(const std::vector<Pair>& a, const std::vector<Pair>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct OptSearch {
  const Instance& instance;
  std::vector<std::vector<AgentId>> candidates;  // per position, positive-value agents
  std::vector<Rational> optimistic;              // per position, sum of max values from here on
  std::vector<bool> used;
  std::vector<Pair> current;
  Rational current_welfare = 0;
  Rational current_size = 0;
  Rational best_welfare = 0;
  std::vector<Pair> best_pairs;

  explicit OptSearch(const Instance& inst) : instance(inst) {
    const int n = inst.num_agents();
    const int k = inst.num_positions();
    candidates.resize(static_cast<std::size_t>(k) + 1);
    for (PositionId j = 1; j <= k; ++j)
      for (AgentId i = 1; i <= n; ++i)
        if (inst.value(i, j) > 0) candidates[static_cast<std::size_t>(j)].push_back(i);
    optimistic.assign(static_cast<std::size_t>(k) + 2, Rational(0));
    for (PositionId j = k; j >= 1; --j) {
      Rational best = 0;
      for (AgentId i : candidates[static_cast<std::size_t>(j)])
        best = std::max(best, inst.value(i, j));
      optimistic[static_cast<std::size_t>(j)] =
          optimistic[static_cast<std::size_t>(j) + 1] + best;
    }
    used.assign(static_cast<std::size_t>(n) + 1, false);
  }

  void consider_current() {
    std::vector<Pair> sorted = current;
    std::sort(sorted.begin(), sorted.end());
    if (current_welfare > best_welfare ||
        (current_welfare == best_welfare && pairs_lex_less(sorted, best_pairs)))
      best_welfare = current_welfare, best_pairs = std::move(sorted);
  }

  void dfs(PositionId j) {
    if (j > instance.num_positions()) {
      consider_current();
      return;
    }
    if (current_welfare + optimistic[static_cast<std::size_t>(j)] < best_welfare) return;
    for (AgentId i : candidates[static_cast<std::size_t>(j)]) {
      if (used[static_cast<std::size_t>(i)]) continue;
      if (current_size + instance.size(i) > instance.capacity) continue;
      used[static_cast<std::size_t>(i)] = true;
      current.push_back({i, j});
      current_welfare += instance.value(i, j);
      current_size += instance.size(i);
      dfs(j + 1);
      current_size -= instance.size(i);
      current_welfare -= instance.value(i, j);
      current.pop_back();
      used[static_cast<std::size_t>(i)] = false;
    }
    dfs(j + 1);  // leave position j empty
  }
};

}  // namespace detail

/// Exhaustive welfare-maximizing matching. Exponential; guarded to desk
/// scale. Among maxima, returns the lexicographically smallest set of
/// positive-value pairs.
inline Matching optimal_matching(const Instance& instance) {
  if (instance.num_agents() > kOracleMaxAgents || instance.num_positions() > kOracleMaxPositions)
    throw GuardError("oracle guard exceeded: limits are " + std::to_string(kOracleMaxAgents) +
                     " agents and " + std::to_string(kOracleMaxPositions) + " positions");
  detail::OptSearch search(instance);
  search.dfs(1);
  return make_matching(instance, std::move(search.best_pairs));
}

/// Specialized optimum for position auctions: the best agent subset under the
/// capacity, members sorted by value onto the top CTRs. Used to cross-check
/// optimal_matching on realized instances.
inline Matching position_auction_optimal(const PositionAuctionInstance& pos) {
  const int n = pos.num_agents();
  const int k = pos.num_positions();
  if (n > 20) throw GuardError("position oracle guard exceeded: limit is 20 agents");
  const Instance instance = realized(pos);

  Rational best_welfare = 0;
  std::vector<Pair> best_pairs;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) > k) continue;
    Rational total_size = 0;
    std::vector<AgentId> members;
    for (AgentId i = 1; i <= n; ++i)
      if (mask & (1u << (i - 1))) {
        total_size += pos.size(i);
        members.push_back(i);
      }
    if (total_size > pos.capacity) continue;
    std::sort(members.begin(), members.end(), [&](AgentId a, AgentId b) {
      if (pos.value(a) != pos.value(b)) return pos.value(a) > pos.value(b);
      return a < b;
    });
    Rational total = 0;
    std::vector<Pair> pairs;
    for (std::size_t r = 0; r < members.size(); ++r) {
      total += pos.value(members[r]) * pos.ctr(static_cast<PositionId>(r + 1));
      pairs.push_back({members[r], static_cast<PositionId>(r + 1)});
    }
    std::sort(pairs.begin(), pairs.end());
    if (total > best_welfare ||
        (total == best_welfare && detail::pairs_lex_less(pairs, best_pairs)))
      best_welfare = total, best_pairs = std::move(pairs);
  }
  return make_matching(instance, std::move(best_pairs));
}

struct WeightedItem {
  Rational value;
  Rational size;
};

struct RearrangementResult {
  bool applicable = false;
  bool holds = false;  // meaningful only when applicable
};

/// Checks the rearrangement inequality on two item sets: if every density in
/// A exceeds every density in B and A's total size dominates B's, then A's
/// total value dominates B's.
inline RearrangementResult rearrangement_check(const std::vector<WeightedItem>& a,
                                               const std::vector<WeightedItem>& b) {
  if (a.empty() || b.empty()) throw InstanceError("rearrangement check needs nonempty sets");
  for (const auto& items : {a, b})
    for (const WeightedItem& item : items)
      if (item.value <= 0 || item.size <= 0)
        throw InstanceError("rearrangement check needs positive values and sizes");

  Rational min_density_a = a.front().value / a.front().size;
  Rational size_a = 0, value_a = 0;
  for (const WeightedItem& item : a) {
    min_density_a = std::min(min_density_a, Rational(item.value / item.size));
    size_a += item.size;
    value_a += item.value;
  }
  Rational max_density_b = b.front().value / b.front().size;
  Rational size_b = 0, value_b = 0;
  for (const WeightedItem& item : b) {
    max_density_b = std::max(max_density_b, Rational(item.value / item.size));
    size_b += item.size;
    value_b += item.value;
  }

  RearrangementResult result;
  result.applicable = min_density_a > max_density_b && size_a >= size_b;
  if (result.applicable) result.holds = value_a >= value_b;
  return result;
}

enum class AuditMechanism { mech1, mech3, g_vmax };

inline MechanismKind to_mechanism_kind(AuditMechanism mech) {
  switch (mech) {
    case AuditMechanism::mech1: return MechanismKind::mech1;
    case AuditMechanism::mech3: return MechanismKind::mech3;
    case AuditMechanism::g_vmax: return MechanismKind::g_vmax;
  }
  throw Error("unknown audit mechanism");
}

/// All bids at which a value tie or a density-order tie involving the agent
/// can occur, plus zero and the agent's recorded value. Between consecutive
/// candidates every comparison the mechanisms make is constant.
inline std::vector<Rational> candidate_bids(const PositionAuctionInstance& pos, AgentId agent) {
  if (agent < 1 || agent > pos.num_agents())
    throw InstanceError("unknown agent: " + std::to_string(agent));
  std::set<Rational> bids;
  bids.insert(Rational(0));
  bids.insert(pos.value(agent));
  for (AgentId other = 1; other <= pos.num_agents(); ++other) {
    if (other == agent) continue;
    bids.insert(pos.value(other));
    for (PositionId j = 1; j <= pos.num_positions(); ++j) {
      if (pos.ctr(j) == 0) continue;
      for (PositionId j2 = 1; j2 <= pos.num_positions(); ++j2)
        bids.insert(pos.value(other) * pos.ctr(j2) * pos.size(agent) /
                    (pos.ctr(j) * pos.size(other)));
    }
  }
  return {bids.begin(), bids.end()};
}

/// The CTR the mechanism assigns to the agent when she bids `bid` and everyone
/// else is truthful. Zero encodes unassigned.
inline Rational assigned_ctr(const PositionAuctionInstance& pos, AgentId agent,
                             const Rational& bid, AuditMechanism mech) {
  const Instance shifted = realized_with_bid(pos, agent, bid);
  const Matching matching = run_mechanism(to_mechanism_kind(mech), shifted);
  if (auto j = matching.position_of(agent)) return pos.ctr(*j);
  return Rational(0);
}

struct MonotonicityProbe {
  Rational bid;
  Rational assigned_ctr;
};

struct MonotonicityReport {
  AgentId agent = 0;
  std::vector<MonotonicityProbe> probes;  // sorted by bid ascending
  std::vector<std::pair<Rational, Rational>> violations;  // (lowBid, highBid), ctr decreased
  bool ok() const { return violations.empty(); }
};

/// Probes every candidate bid, every midpoint between consecutive candidates
/// and one point past the maximum, recording the assigned CTR and every
/// decrease. The comparisons are constant between candidates, so the grid
/// audit is exhaustive.
inline MonotonicityReport monotonicity_audit(const PositionAuctionInstance& pos, AgentId agent,
                                             AuditMechanism mech) {
  const std::vector<Rational> candidates = candidate_bids(pos, agent);
  std::vector<Rational> probe_bids;
  for (std::size_t t = 0; t < candidates.size(); ++t) {
    probe_bids.push_back(candidates[t]);
    if (t + 1 < candidates.size())
      probe_bids.push_back((candidates[t] + candidates[t + 1]) / 2);
  }
  probe_bids.push_back(candidates.back() + 1);

  MonotonicityReport report;
  report.agent = agent;
  for (const Rational& bid : probe_bids)
    report.probes.push_back({bid, assigned_ctr(pos, agent, bid, mech)});
  for (std::size_t t = 0; t + 1 < report.probes.size(); ++t)
    if (report.probes[t].assigned_ctr > report.probes[t + 1].assigned_ctr)
      report.violations.push_back({report.probes[t].bid, report.probes[t + 1].bid});
  return report;
}

/// CSV serialization: bid,assigned_ctr rows plus a `# violations:` trailer.
inline std::string monotonicity_csv(const MonotonicityReport& report) {
  std::string out = "bid,assigned_ctr\n";
  for (const MonotonicityProbe& probe : report.probes)
    out += to_fraction_string(probe.bid) + "," + to_fraction_string(probe.assigned_ctr) + "\n";
  out += "# violations: " + std::to_string(report.violations.size()) + "\n";
  for (const auto& [low, high] : report.violations)
    out += "# " + to_fraction_string(low) + "," + to_fraction_string(high) + "\n";
  return out;
}

enum class RatioRule { mech1, mech3, max_greedy, mech2_expected, mech4_expected };

struct RatioResult {
  Rational optimum;
  Rational rule_welfare;
  std::optional<Rational> ratio;  // empty when rule welfare is zero and OPT > 0
};

inline Rational rule_welfare(const Instance& instance, RatioRule rule) {
  switch (rule) {
    case RatioRule::mech1: return mechanism1(instance).final_matching.welfare;
    case RatioRule::mech3: return mechanism3(instance).final_matching.welfare;
    case RatioRule::max_greedy: return max_greedy(instance).welfare;
    case RatioRule::mech2_expected: return mechanism2(instance, false).expected_welfare;
    case RatioRule::mech4_expected:
      return mechanism4(instance, Arm::mech_greedy).expected_welfare;
  }
  throw Error("unknown ratio rule");
}

/// OPT welfare divided by the rule's (expected) welfare.
inline RatioResult approximation_ratio(const Instance& instance, RatioRule rule) {
  RatioResult result;
  result.optimum = optimal_matching(instance).welfare;
  result.rule_welfare = rule_welfare(instance, rule);
  if (result.rule_welfare != 0)
    result.ratio = result.optimum / result.rule_welfare;
  else if (result.optimum == 0)
    result.ratio = Rational(1);
  return result;
}

}  // namespace capmatch
