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
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "capmatch/rational.hpp"

namespace capmatch {

// Agent and position ids are 1-based everywhere, matching the instance files
// and reports. Internal vectors are indexed through the accessors below.
using AgentId = int;
using PositionId = int;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid instances, matchings or arguments.
struct InstanceError : Error {
  using Error::Error;
};

/// Oracle size guard exceeded.
struct GuardError : Error {
  using Error::Error;
};

/// Instance document violates the schema. `path` points at the bad field.
struct ParseError : Error {
  std::string path;
  ParseError(const std::string& where, const std::string& what)
      : Error(where + ": " + what), path(where) {}
};

/// Capacity-constrained matching input: per-agent sizes, per-(agent,position)
/// values and a global capacity. Values may be zero ("not interested").
struct Instance {
  Rational capacity;
  std::vector<Rational> sizes;                // one per agent, > 0
  std::vector<std::vector<Rational>> values;  // nAgents x nPositions, >= 0

  int num_agents() const { return static_cast<int>(sizes.size()); }
  int num_positions() const {
    return values.empty() ? 0 : static_cast<int>(values.front().size());
  }
  const Rational& size(AgentId i) const { return sizes.at(static_cast<std::size_t>(i - 1)); }
  const Rational& value(AgentId i, PositionId j) const {
    return values.at(static_cast<std::size_t>(i - 1)).at(static_cast<std::size_t>(j - 1));
  }
  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Single-parameter position auction input: private values, public sizes and
/// strictly decreasing CTRs. The realized value of (i, j) is value(i)*ctr(j).
struct PositionAuctionInstance {
  Rational capacity;
  std::vector<Rational> values;  // one per agent, > 0
  std::vector<Rational> sizes;   // one per agent, > 0
  std::vector<Rational> ctrs;    // strictly decreasing, >= 0

  int num_agents() const { return static_cast<int>(values.size()); }
  int num_positions() const { return static_cast<int>(ctrs.size()); }
  const Rational& value(AgentId i) const { return values.at(static_cast<std::size_t>(i - 1)); }
  const Rational& size(AgentId i) const { return sizes.at(static_cast<std::size_t>(i - 1)); }
  const Rational& ctr(PositionId j) const { return ctrs.at(static_cast<std::size_t>(j - 1)); }
  friend bool operator==(const PositionAuctionInstance&, const PositionAuctionInstance&) =
      default;
};

inline void validate_instance(const Instance& instance) {
  if (instance.capacity <= 0) throw InstanceError("capacity must be positive");
  if (instance.values.size() != instance.sizes.size())
    throw InstanceError("values must have one row per agent");
  const std::size_t k = instance.values.empty() ? 0 : instance.values.front().size();
  for (std::size_t i = 0; i < instance.sizes.size(); ++i) {
    if (instance.sizes[i] <= 0)
      throw InstanceError("agent " + std::to_string(i + 1) + ": size must be positive");
    if (instance.values[i].size() != k)
      throw InstanceError("agent " + std::to_string(i + 1) + ": ragged values row");
    for (const Rational& v : instance.values[i])
      if (v < 0)
        throw InstanceError("agent " + std::to_string(i + 1) + ": negative value");
  }
}

inline void validate_instance(const PositionAuctionInstance& instance) {
  if (instance.capacity <= 0) throw InstanceError("capacity must be positive");
  if (instance.sizes.size() != instance.values.size())
    throw InstanceError("values and sizes must have equal length");
  for (std::size_t i = 0; i < instance.values.size(); ++i) {
    if (instance.values[i] <= 0)
      throw InstanceError("agent " + std::to_string(i + 1) + ": value must be positive");
    if (instance.sizes[i] <= 0)
      throw InstanceError("agent " + std::to_string(i + 1) + ": size must be positive");
  }
  for (std::size_t j = 0; j < instance.ctrs.size(); ++j) {
    if (instance.ctrs[j] < 0)
      throw InstanceError("ctr " + std::to_string(j + 1) + ": must be nonnegative");
    if (j + 1 < instance.ctrs.size() && !(instance.ctrs[j] > instance.ctrs[j + 1]))
      throw InstanceError("ctrs must be strictly decreasing at position " +
                          std::to_string(j + 2));
  }
}

struct Pair {
  AgentId agent = 0;
  PositionId position = 0;
  friend bool operator==(const Pair&, const Pair&) = default;
  friend auto operator<=>(const Pair&, const Pair&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Pair& p) {
  return os << "(" << p.agent << "->" << p.position << ")";
}

/// Partial injective assignment with its exact welfare and used capacity.
struct Matching {
  std::vector<Pair> pairs;  // sorted by (agent, position)
  Rational welfare = 0;
  Rational used_capacity = 0;

  std::optional<PositionId> position_of(AgentId agent) const {
    for (const Pair& p : pairs)
      if (p.agent == agent) return p.position;
    return std::nullopt;
  }
  friend bool operator==(const Matching&, const Matching&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Matching& m) {
  os << "{";
  for (std::size_t t = 0; t < m.pairs.size(); ++t) os << (t ? " " : "") << m.pairs[t];
  return os << " | welfare " << to_fraction_string(m.welfare) << "}";
}

struct DensityEntry {
  AgentId agent = 0;
  PositionId position = 0;
  Rational density;
  friend bool operator==(const DensityEntry&, const DensityEntry&) = default;
};

/// Strict total order used by every mechanism: density descending, ties by
/// smaller agent index, then smaller position index.
inline bool entry_precedes(const DensityEntry& a, const DensityEntry& b) {
  if (a.density != b.density) return a.density > b.density;
  if (a.agent != b.agent) return a.agent < b.agent;
  return a.position < b.position;
}

struct EntryPrecedes {
  bool operator()(const DensityEntry& a, const DensityEntry& b) const {
    return entry_precedes(a, b);
  }
};

/// All positive-value pairs sorted by entry_precedes. Zero-value pairs are
/// excluded: they consume capacity without adding welfare.
inline std::vector<DensityEntry> density_order(const Instance& instance) {
  std::vector<DensityEntry> entries;
  for (AgentId i = 1; i <= instance.num_agents(); ++i)
    for (PositionId j = 1; j <= instance.num_positions(); ++j)
      if (instance.value(i, j) > 0)
        entries.push_back({i, j, Rational(instance.value(i, j) / instance.size(i))});
  std::sort(entries.begin(), entries.end(), EntryPrecedes{});
  return entries;
}

/// Exact welfare of a pair list. Rejects duplicate agents or positions and
/// out-of-range indices.
inline Rational welfare(const Instance& instance, const std::vector<Pair>& pairs) {
  std::set<AgentId> agents;
  std::set<PositionId> positions;
  Rational total = 0;
  for (const Pair& p : pairs) {
    if (p.agent < 1 || p.agent > instance.num_agents())
      throw InstanceError("agent index out of range: " + std::to_string(p.agent));
    if (p.position < 1 || p.position > instance.num_positions())
      throw InstanceError("position index out of range: " + std::to_string(p.position));
    if (!agents.insert(p.agent).second)
      throw InstanceError("duplicate agent: " + std::to_string(p.agent));
    if (!positions.insert(p.position).second)
      throw InstanceError("duplicate position: " + std::to_string(p.position));
    total += instance.value(p.agent, p.position);
  }
  return total;
}

/// Builds a Matching from pairs, computing welfare and used capacity.
inline Matching make_matching(const Instance& instance, std::vector<Pair> pairs) {
  std::sort(pairs.begin(), pairs.end());
  Matching m;
  m.welfare = welfare(instance, pairs);
  for (const Pair& p : pairs) m.used_capacity += instance.size(p.agent);
  m.pairs = std::move(pairs);
  return m;
}

enum class ViolationKind {
  duplicate_agent,
  duplicate_position,
  capacity_exceeded,
  agent_out_of_range,
  position_out_of_range,
};

struct Violation {
  ViolationKind kind;
  std::string detail;
};

/// Reports every violated matching invariant; empty result means feasible.
inline std::vector<Violation> validate(const Instance& instance, const Matching& matching) {
  std::vector<Violation> violations;
  std::set<AgentId> agents;
  std::set<PositionId> positions;
  Rational used = 0;
  for (const Pair& p : matching.pairs) {
    if (p.agent < 1 || p.agent > instance.num_agents()) {
      violations.push_back({ViolationKind::agent_out_of_range,
                            "agent " + std::to_string(p.agent)});
      continue;
    }
    if (p.position < 1 || p.position > instance.num_positions()) {
      violations.push_back({ViolationKind::position_out_of_range,
                            "position " + std::to_string(p.position)});
      continue;
    }
    if (!agents.insert(p.agent).second)
      violations.push_back({ViolationKind::duplicate_agent,
                            "agent " + std::to_string(p.agent)});
    if (!positions.insert(p.position).second)
      violations.push_back({ViolationKind::duplicate_position,
                            "position " + std::to_string(p.position)});
    used += instance.size(p.agent);
  }
  if (used > instance.capacity)
    violations.push_back({ViolationKind::capacity_exceeded,
                          "used " + to_fraction_string(used) + " of " +
                              to_fraction_string(instance.capacity)});
  return violations;
}

/// Expands a position auction into the general form: values[i][j] = v_i * a_j.
inline Instance realized(const PositionAuctionInstance& pos) {
  Instance instance;
  instance.capacity = pos.capacity;
  instance.sizes = pos.sizes;
  instance.values.reserve(pos.values.size());
  for (const Rational& v : pos.values) {
    std::vector<Rational> row;
    row.reserve(pos.ctrs.size());
    for (const Rational& a : pos.ctrs) row.push_back(Rational(v * a));
    instance.values.push_back(std::move(row));
  }
  return instance;
}

/// realized() with one agent's value replaced by a bid. The bid may be zero,
/// which drops the agent from every density ordering.
inline Instance realized_with_bid(const PositionAuctionInstance& pos, AgentId agent,
                                  const Rational& bid) {
  if (agent < 1 || agent > pos.num_agents())
    throw InstanceError("unknown agent: " + std::to_string(agent));
  if (bid < 0) throw InstanceError("bid must be nonnegative");
  Instance instance = realized(pos);
  for (PositionId j = 1; j <= pos.num_positions(); ++j)
    instance.values[static_cast<std::size_t>(agent - 1)][static_cast<std::size_t>(j - 1)] =
        bid * pos.ctr(j);
  return instance;
}

}  // namespace capmatch
