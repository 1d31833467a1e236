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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "capmatch/core.hpp"

namespace capmatch {

using AnyInstance = std::variant<Instance, PositionAuctionInstance>;
using Params = std::map<std::string, Rational>;

inline bool is_position_auction(const AnyInstance& any) {
  return std::holds_alternative<PositionAuctionInstance>(any);
}

inline Instance to_general(const AnyInstance& any) {
  if (const auto* general = std::get_if<Instance>(&any)) return *general;
  return realized(std::get<PositionAuctionInstance>(any));
}

namespace detail {

inline Rational param(const Params& params, const std::string& name, const Rational& fallback) {
  auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

inline int int_param(const Params& params, const std::string& name, int fallback) {
  auto it = params.find(name);
  if (it == params.end()) return fallback;
  if (rational_den(it->second) != 1 || it->second < 1 || it->second > 1000000)
    throw InstanceError(name + " must be a positive integer");
  return static_cast<int>(rational_num(it->second).convert_to<long>());
}

inline void reject_unknown_params(const Params& params,
                                  const std::vector<std::string>& allowed) {
  for (const auto& [name, value] : params) {
    bool known = false;
    for (const std::string& a : allowed) known = known || a == name;
    if (!known) throw InstanceError("unknown parameter: " + name);
  }
}

inline void require(bool condition, const std::string& constraint) {
  if (!condition) throw InstanceError("parameter constraint violated: " + constraint);
}

}  // namespace detail

/// Sum of the prop46-pos CTR vector a_j = 1 - (j-1)*eps0.
inline Rational prop46_pos_ctr_sum(int k, const Rational& eps0) {
  return Rational(k) - eps0 * k * (k - 1) / 2;
}

/// Builds one of the paper's constructed instances. Parameters outside the
/// ranges the constructions rely on are rejected with the violated constraint
/// named.
inline AnyInstance paper_instance(const std::string& name, const Params& params = {}) {
  using detail::int_param;
  using detail::param;
  using detail::reject_unknown_params;
  using detail::require;

  if (name == "prop31") {
    reject_unknown_params(params, {"W", "eps"});
    const Rational W = param(params, "W", 100);
    const Rational eps = param(params, "eps", Rational(1, 100));
    require(eps > 0, "prop31 requires eps > 0");
    require(W > 1 + eps, "prop31 requires W > 1 + eps");
    Instance instance;
    instance.capacity = W;
    instance.sizes = {Rational(1), W};
    instance.values = {{1 + eps, Rational(0)}, {Rational(0), W}};
    validate_instance(instance);
    return instance;
  }

  if (name == "thm34-lb") {
    reject_unknown_params(params, {"eps", "delta1", "delta2"});
    const Rational eps = param(params, "eps", Rational(1, 1000));
    const Rational d1 = param(params, "delta1", Rational(1, 10000));
    const Rational d2 = param(params, "delta2", Rational(1, 10000));
    require(eps > 0, "thm34-lb requires eps > 0");
    require(d1 > 0 && d1 < eps / (3 + eps), "thm34-lb requires 0 < delta1 < eps/(3+eps)");
    require(d2 > 0 && d2 < 3 * eps / (3 + eps),
            "thm34-lb requires 0 < delta2 < 3*eps/(3+eps)");
    Instance instance;
    instance.capacity = 6;
    instance.sizes = {d1, 3 + d2, Rational(3), Rational(1), Rational(1),
                      Rational(1), Rational(1), Rational(1), 1 - d1};
    const auto row = [&](std::initializer_list<Rational> values) {
      return std::vector<Rational>(values);
    };
    const Rational z = 0;
    instance.values = {
        row({Rational(3), z, z, z, z, z, z}),
        row({3 + 2 * eps, z, z, z, z, z, z}),
        row({z, 3 + eps, z, z, z, z, z}),
    };
    for (int i = 4; i <= 9; ++i)
      instance.values.push_back(std::vector<Rational>(7, Rational(1)));
    validate_instance(instance);
    // Orderings the trace hinges on: agent 1 first, then agent 2's
    // replacement, then the capacity stop at (3,2) before any unit agent.
    require(Rational(3) / d1 > (3 + 2 * eps) / (3 + d2), "thm34-lb requires d11 > d21");
    require((3 + 2 * eps) / (3 + d2) > (3 + eps) / 3, "thm34-lb requires d21 > d32");
    require((3 + eps) / 3 > 1 / (1 - d1), "thm34-lb requires d32 > d9j");
    return instance;
  }

  if (name == "prop41") {
    reject_unknown_params(params, {"eps"});
    const Rational eps = param(params, "eps", Rational(1, 100));
    require(eps > 0 && eps < Rational(1, 12), "prop41 requires 0 < eps < 1/12");
    PositionAuctionInstance pos;
    pos.capacity = 6;
    pos.values = {Rational(5), 4 + 2 * eps, Rational(3), Rational(4), Rational(11, 2)};
    pos.sizes = {Rational(1), Rational(1), Rational(1), Rational(2), Rational(4)};
    pos.ctrs = {Rational(1), 1 - eps, 1 - 2 * eps, Rational(1, 2)};
    validate_instance(pos);
    return pos;
  }

  if (name == "prop46-pos") {
    reject_unknown_params(params, {"k", "V", "eps0"});
    const int k = int_param(params, "k", 4);
    const Rational V = param(params, "V", 10);
    const Rational eps0 = param(params, "eps0", Rational(1, 1000000));
    require(k >= 2, "prop46-pos requires k >= 2");
    require(V > 0, "prop46-pos requires V > 0");
    require(eps0 > 0 && eps0 < Rational(1, k - 1),
            "prop46-pos requires 0 < eps0 < 1/(k-1)");
    require(V * (k - 1) > 1, "prop46-pos requires V*(k-1) > 1 (heavy density below small)");
    PositionAuctionInstance pos;
    pos.capacity = k;
    for (int i = 0; i < k; ++i) {
      pos.values.push_back(V);
      pos.sizes.push_back(1);
    }
    pos.values.push_back(V + 1);
    pos.sizes.push_back(k);
    for (int j = 1; j <= k; ++j) pos.ctrs.push_back(1 - eps0 * (j - 1));
    validate_instance(pos);
    require(V * prop46_pos_ctr_sum(k, eps0) > (V + 1),
            "prop46-pos requires the small agents to dominate the heavy agent");
    return pos;
  }

  if (name == "prop46-gen") {
    reject_unknown_params(params, {"k", "V", "eps"});
    const int k = int_param(params, "k", 10);
    const Rational V = param(params, "V", 1);
    const Rational eps = param(params, "eps", Rational(1, 1000));
    require(k >= 2 && k % 2 == 0, "prop46-gen requires an even k >= 2");
    require(V > 0, "prop46-gen requires V > 0");
    require(eps > 0 && eps < V, "prop46-gen requires 0 < eps < V");
    Instance instance;
    instance.capacity = k;
    instance.sizes.assign(static_cast<std::size_t>(k), Rational(1, 2));
    instance.values.assign(static_cast<std::size_t>(k),
                           std::vector<Rational>(static_cast<std::size_t>(k), Rational(0)));
    for (int i = 1; i <= k; ++i) {
      instance.values[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(i - 1)] = V;
      if (i % 2 == 1 && i + 1 <= k)
        instance.values[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(i)] = V + eps;
    }
    validate_instance(instance);
    return instance;
  }

  if (name == "appendixA") {
    reject_unknown_params(params, {"l", "eps"});
    const int l = int_param(params, "l", 2);
    const Rational eps = param(params, "eps", Rational(1, 100));
    const int k = 2 * l;
    require(l >= 2, "appendixA requires l >= 2");
    require(eps > 0 && eps <= Rational(1, k), "appendixA requires 0 < eps <= 1/(2l)");
    PositionAuctionInstance pos;
    pos.capacity = l;
    for (int i = 0; i < l; ++i) {  // S1
      pos.values.push_back(1);
      pos.sizes.push_back(1);
    }
    for (int i = 0; i < l; ++i) {  // S2
      pos.values.push_back(2 * eps);
      pos.sizes.push_back(eps);
    }
    pos.values.push_back(1 + eps);  // S0
    pos.sizes.push_back(l);
    for (int j = 1; j <= l; ++j) pos.ctrs.push_back(k - j + 1);
    for (int j = l + 1; j <= k; ++j) pos.ctrs.push_back(eps * (k - j + 1));
    validate_instance(pos);
    // The value-greedy arm must dominate the density-greedy arm.
    const Rational gd = eps * l * (3 * l + 1) + eps * (Rational(l) * (l + 1) / 2 - 1);
    require(Rational(2 * l) * (1 + eps) >= gd,
            "appendixA requires the value arm to dominate the density arm");
    return pos;
  }

  if (name == "figure1") {
    reject_unknown_params(params, {});
    const Rational eps(1, 100);
    Instance instance;
    instance.capacity = 2;
    instance.sizes = {Rational(2), eps, Rational(1), eps, Rational(1)};
    const Rational z = 0;
    instance.values = {
        {Rational(2), z, z, z},
        {2 * eps, z, z, z},
        {2 * (1 - eps), 1 - eps, z, z},
        {z, eps, z, z},
        {2 * (1 - 2 * eps), 1 - 2 * eps, z, z},
    };
    validate_instance(instance);
    return instance;
  }

  if (name == "appendixB") {
    reject_unknown_params(params, {});
    PositionAuctionInstance pos;
    pos.capacity = 10;
    pos.values = {Rational(12), Rational(15), Rational(16), Rational(18)};
    pos.sizes = {Rational(2), Rational(3), Rational(4), Rational(6)};
    pos.ctrs = {Rational(1), Rational(9, 20)};
    validate_instance(pos);
    return pos;
  }

  throw InstanceError("unknown catalog instance: " + name);
}

inline std::vector<std::string> catalog_names() {
  return {"prop31", "thm34-lb", "prop41", "prop46-pos", "prop46-gen",
          "appendixA", "figure1", "appendixB"};
}

/// Closed-form welfare a catalog entry guarantees for a rule, exact in the
/// instance parameters. Doubles as the regression oracle and as the optimum
/// for families too large for the brute-force oracle.
inline std::optional<Rational> catalog_expected(const std::string& name, const Params& params,
                                                const std::string& rule) {
  using detail::int_param;
  using detail::param;

  if (name == "prop31") {
    const Rational W = param(params, "W", 100);
    const Rational eps = param(params, "eps", Rational(1, 100));
    if (rule == "opt" || rule == "gvmax" || rule == "greedy-value" || rule == "max-greedy")
      return W;
    if (rule == "mech1" || rule == "mech3" || rule == "greedy-density") return 1 + eps;
    if (rule == "mech2-expected") return (1 + eps + W) / 2;
    if (rule == "mech4-expected") return (1 + eps) / 4 + W * Rational(3, 4);
    return std::nullopt;
  }

  if (name == "thm34-lb") {
    const Rational eps = param(params, "eps", Rational(1, 1000));
    if (rule == "mech1" || rule == "mech3" || rule == "gvmax" || rule == "mech2-expected" ||
        rule == "mech4-expected")
      return 3 + 2 * eps;
    // The instance admits {1->1, 3->2} plus three unit agents, so the exact
    // optimum is 9+eps rather than the headline 9.
    if (rule == "opt" || rule == "greedy-density" || rule == "max-greedy") return 9 + eps;
    return std::nullopt;
  }

  if (name == "prop41") {
    const Rational eps = param(params, "eps", Rational(1, 100));
    const Rational m = 5 + (4 + 2 * eps) * (1 - eps) + 4 * (1 - 2 * eps) + Rational(3, 2);
    if (rule == "mech1" || rule == "mech3" || rule == "opt") return m;
    if (rule == "gvmax") return Rational(11, 2);
    if (rule == "mech2-expected") return (m + Rational(11, 2)) / 2;
    if (rule == "mech4-expected") return m / 4 + Rational(33, 8);
    return std::nullopt;
  }

  if (name == "prop46-pos") {
    const int k = int_param(params, "k", 4);
    const Rational V = param(params, "V", 10);
    const Rational eps0 = param(params, "eps0", Rational(1, 1000000));
    const Rational S = prop46_pos_ctr_sum(k, eps0);
    if (rule == "opt" || rule == "mech1" || rule == "mech3" || rule == "greedy-density" ||
        rule == "max-greedy")
      return V * S;
    if (rule == "gvmax" || rule == "greedy-value") return V + 1;
    if (rule == "mech2-expected") return (V * S + V + 1) / 2;
    if (rule == "mech4-expected") return V * S / 4 + (V + 1) * Rational(3, 4);
    return std::nullopt;
  }

  if (name == "prop46-gen") {
    const int k = int_param(params, "k", 10);
    const Rational V = param(params, "V", 1);
    const Rational eps = param(params, "eps", Rational(1, 1000));
    const Rational half = Rational(k, 2) * (V + eps);
    if (rule == "opt") return Rational(k) * V;
    if (rule == "mech1" || rule == "mech3" || rule == "greedy-density" ||
        rule == "greedy-value" || rule == "max-greedy")
      return half;
    if (rule == "gvmax") return V + eps;
    if (rule == "mech2-expected") return (half + V + eps) / 2;
    if (rule == "mech4-expected") return half / 4 + (V + eps) * Rational(3, 4);
    return std::nullopt;
  }

  if (name == "appendixA") {
    const int l = int_param(params, "l", 2);
    const Rational eps = param(params, "eps", Rational(1, 100));
    if (rule == "opt") return Rational(l) * (3 * l + 1) / 2;
    if (rule == "greedy-value" || rule == "max-greedy" || rule == "gvmax")
      return Rational(2 * l) * (1 + eps);
    if (rule == "greedy-density")
      return eps * l * (3 * l + 1) + eps * (Rational(l) * (l + 1) / 2 - 1);
    return std::nullopt;
  }

  if (name == "figure1") {
    if (rule == "opt") return Rational(74, 25);
    if (rule == "greedy-density") return Rational(3, 100);
    if (rule == "greedy-value" || rule == "max-greedy" || rule == "gvmax" || rule == "mech1")
      return Rational(2);
    if (rule == "mech3") return Rational(99, 50);
    return std::nullopt;
  }

  if (name == "appendixB") {
    if (rule == "opt" || rule == "mech1" || rule == "greedy-value" || rule == "max-greedy")
      return Rational(126, 5);
    if (rule == "mech3") return Rational(117, 5);
    if (rule == "gvmax") return Rational(18);
    if (rule == "greedy-density") return Rational(75, 4);
    if (rule == "mech2-expected") return Rational(108, 5);
    if (rule == "mech4-expected") return Rational(387, 20);
    return std::nullopt;
  }

  return std::nullopt;
}

/// splitmix-style 64-bit generator; the only randomness source in the
/// library, so identical seeds give identical artifacts byte for byte.
struct SplitMix64 {
  std::uint64_t state = 0;
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  /// Uniform draw from [0, bound).
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }
};

enum class RandomKind { general, position };

struct RandomInstanceSpec {
  RandomKind kind = RandomKind::general;
  int num_agents = 4;
  int num_positions = 3;
  Rational value_lo = 0;
  Rational value_hi = 8;
  Rational size_lo = Rational(1, 4);
  Rational size_hi = 4;
  Rational capacity_factor = 1;  // in (0, num_agents]
};

namespace detail {

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline BigInt ceil_div(const BigInt& a, const BigInt& b) {
  return -floor_div(-a, b);
}

// Rational in [lo, hi] with a bounded denominator.
inline Rational draw_rational(SplitMix64& rng, const Rational& lo, const Rational& hi) {
  if (lo > hi) throw InstanceError("invalid range: lo > hi");
  BigInt den = 1 + static_cast<long>(rng.below(12));
  for (;;) {
    const BigInt num_lo = ceil_div(rational_num(lo) * den, rational_den(lo));
    const BigInt num_hi = floor_div(rational_num(hi) * den, rational_den(hi));
    if (num_hi >= num_lo) {
      const std::uint64_t span = (num_hi - num_lo + 1).convert_to<std::uint64_t>();
      return Rational(num_lo + static_cast<long>(rng.below(span)), den);
    }
    den *= 2;  // range narrower than 1/den; refine
  }
}

}  // namespace detail

/// Deterministic random instance; position kind draws strictly decreasing
/// CTRs and positive values. Capacity is capacity_factor times the mean size.
inline AnyInstance random_instance(std::uint64_t seed, const RandomInstanceSpec& spec) {
  if (spec.num_agents < 0 || spec.num_positions < 0)
    throw InstanceError("invalid dimensions");
  if (spec.size_lo <= 0 || spec.size_lo > spec.size_hi)
    throw InstanceError("invalid size range");
  if (spec.value_lo < 0 || spec.value_lo > spec.value_hi)
    throw InstanceError("invalid value range");
  if (spec.capacity_factor <= 0 || spec.capacity_factor > spec.num_agents)
    throw InstanceError("capacity_factor must lie in (0, num_agents]");
  if (spec.kind == RandomKind::position && spec.value_lo <= 0)
    throw InstanceError("position kind requires a positive value range");

  SplitMix64 rng{seed};
  const int n = spec.num_agents;
  const int k = spec.num_positions;

  std::vector<Rational> sizes;
  Rational size_sum = 0;
  for (int i = 0; i < n; ++i) {
    sizes.push_back(detail::draw_rational(rng, spec.size_lo, spec.size_hi));
    size_sum += sizes.back();
  }
  const Rational capacity = spec.capacity_factor * size_sum / std::max(n, 1);

  if (spec.kind == RandomKind::general) {
    Instance instance;
    instance.capacity = capacity;
    instance.sizes = std::move(sizes);
    for (int i = 0; i < n; ++i) {
      std::vector<Rational> row;
      for (int j = 0; j < k; ++j)
        row.push_back(detail::draw_rational(rng, spec.value_lo, spec.value_hi));
      instance.values.push_back(std::move(row));
    }
    validate_instance(instance);
    return instance;
  }

  PositionAuctionInstance pos;
  pos.capacity = capacity;
  pos.sizes = std::move(sizes);
  for (int i = 0; i < n; ++i)
    pos.values.push_back(detail::draw_rational(rng, spec.value_lo, spec.value_hi));
  // distinct CTR numerators over a common grid, sorted decreasing
  const std::uint64_t grid = 16 * static_cast<std::uint64_t>(std::max(k, 1));
  std::set<std::uint64_t> numerators;
  while (static_cast<int>(numerators.size()) < k) numerators.insert(1 + rng.below(grid));
  for (auto it = numerators.rbegin(); it != numerators.rend(); ++it)
    pos.ctrs.push_back(Rational(static_cast<long>(*it), static_cast<long>(grid)));
  validate_instance(pos);
  return pos;
}

}  // namespace capmatch
