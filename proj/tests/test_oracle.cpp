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

#include <catch2/catch_amalgamated.hpp>

#include "capmatch/instances.hpp"
#include "capmatch/oracle.hpp"
#include "test_support.hpp"

using namespace capmatch;
using namespace capmatch::test;

TEST_CASE("optimal_matching on the catalog") {
  SECTION("thm34-lb: the exact optimum beats the headline matching by eps") {
    const auto lb = std::get<Instance>(paper_instance("thm34-lb"));
    const Matching opt = optimal_matching(lb);
    // {1->1, 3->2} plus three unit agents fills the capacity exactly.
    CHECK(opt.pairs == std::vector<Pair>{{1, 1}, {3, 2}, {4, 3}, {5, 4}, {9, 5}});
    CHECK(opt.welfare == Rational(9001, 1000));  // 9 + eps
    CHECK(opt.used_capacity == Rational(6));
  }
  SECTION("prop31") {
    const Matching opt = optimal_matching(std::get<Instance>(paper_instance("prop31")));
    CHECK(opt.pairs == std::vector<Pair>{{2, 2}});
    CHECK(opt.welfare == Rational(100));
  }
  SECTION("appendixA at l=2: l(3l+1)/2 = 7") {
    const Matching opt = optimal_matching(to_general(paper_instance("appendixA")));
    CHECK(opt.welfare == Rational(7));
  }
  SECTION("size guard") {
    Instance big;
    big.capacity = 1;
    big.sizes.assign(13, Rational(1));
    big.values.assign(13, std::vector<Rational>(2, Rational(1)));
    CHECK_THROWS_AS(optimal_matching(big), GuardError);
  }
  SECTION("welfare ties resolve to the lexicographically smallest pair set") {
    const Instance instance = general(
        2, {Rational(1), Rational(1)}, {{Rational(1), Rational(0)}, {Rational(1), Rational(0)}});
    CHECK(optimal_matching(instance).pairs == std::vector<Pair>{{1, 1}});
  }
}

TEST_CASE("rearrangement_check") {
  SECTION("simple dominance holds") {
    const auto result = rearrangement_check({{Rational(4), Rational(1)}},
                                            {{Rational(2), Rational(1)}});
    CHECK(result.applicable);
    CHECK(result.holds);
  }
  SECTION("size dominance failure makes the check inapplicable") {
    const auto result = rearrangement_check(
        {{Rational(3), Rational(1)}, {Rational(3), Rational(1)}},
        {{Rational(5), Rational(3)}});
    CHECK(!result.applicable);
  }
  SECTION("nonpositive entries are rejected") {
    CHECK_THROWS_AS(
        rearrangement_check({{Rational(0), Rational(1)}}, {{Rational(1), Rational(1)}}),
        InstanceError);
    CHECK_THROWS_AS(
        rearrangement_check({{Rational(1), Rational(-1)}}, {{Rational(1), Rational(1)}}),
        InstanceError);
    CHECK_THROWS_AS(rearrangement_check({}, {{Rational(1), Rational(1)}}), InstanceError);
  }
  SECTION("ten thousand random dominance-satisfying pairs all hold") {
    SplitMix64 rng{7};
    int applicable = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      // draw B, then build A above B's densities with dominating total size
      std::vector<WeightedItem> b;
      const int nb = 1 + static_cast<int>(rng.below(4));
      Rational max_density_b = 0, size_b = 0;
      for (int t = 0; t < nb; ++t) {
        const Rational size(1 + static_cast<long>(rng.below(12)), 1 + static_cast<long>(rng.below(4)));
        const Rational value(1 + static_cast<long>(rng.below(24)), 1 + static_cast<long>(rng.below(4)));
        b.push_back({value, size});
        max_density_b = std::max(max_density_b, Rational(value / size));
        size_b += size;
      }
      std::vector<WeightedItem> a;
      const int na = 1 + static_cast<int>(rng.below(4));
      Rational size_a = 0;
      for (int t = 0; t < na; ++t) {
        Rational size(1 + static_cast<long>(rng.below(12)), 1 + static_cast<long>(rng.below(4)));
        if (t + 1 == na && size_a + size < size_b)
          size = size_b - size_a + Rational(1 + static_cast<long>(rng.below(8)), 4);
        const Rational bump(1 + static_cast<long>(rng.below(16)), 1 + static_cast<long>(rng.below(4)));
        a.push_back({(max_density_b + bump) * size, size});
        size_a += size;
      }
      const auto result = rearrangement_check(a, b);
      REQUIRE(result.applicable);
      REQUIRE(result.holds);
      ++applicable;
    }
    CHECK(applicable == 10000);
  }
}

TEST_CASE("monotonicity_audit") {
  const auto prop41 = std::get<PositionAuctionInstance>(paper_instance("prop41"));

  SECTION("mechanism 1 is caught on prop41, agent 3") {
    const MonotonicityReport report =
        monotonicity_audit(prop41, 3, AuditMechanism::mech1);
    REQUIRE(!report.ok());
    // truthful bid 3 sits on the grid and earns CTR 1/2
    bool truthful_probe = false, losing_probe = false;
    for (const MonotonicityProbe& probe : report.probes) {
      if (probe.bid == Rational(3)) {
        truthful_probe = true;
        CHECK(probe.assigned_ctr == Rational(1, 2));
      }
      if (probe.bid == Rational(401, 100)) {  // 4 + eps, midpoint of (4, 4+2eps)
        losing_probe = true;
        CHECK(probe.assigned_ctr == 0);
      }
    }
    CHECK(truthful_probe);
    CHECK(losing_probe);
  }

  SECTION("mechanism 3 passes on prop41 for every agent") {
    for (AgentId agent = 1; agent <= prop41.num_agents(); ++agent)
      CHECK(monotonicity_audit(prop41, agent, AuditMechanism::mech3).ok());
  }

  SECTION("G(v_max) is threshold monotone on random instances") {
    for (std::uint64_t seed = 300; seed < 310; ++seed) {
      const auto any = draw_instance(RandomKind::position, seed, 5, 3);
      const auto& pos = std::get<PositionAuctionInstance>(any);
      for (AgentId agent = 1; agent <= pos.num_agents(); ++agent)
        CHECK(monotonicity_audit(pos, agent, AuditMechanism::g_vmax).ok());
    }
  }

  SECTION("probes are sorted and the report knows its agent") {
    const MonotonicityReport report = monotonicity_audit(prop41, 2, AuditMechanism::mech3);
    CHECK(report.agent == 2);
    for (std::size_t t = 0; t + 1 < report.probes.size(); ++t)
      CHECK(report.probes[t].bid < report.probes[t + 1].bid);
  }

  SECTION("unknown agent") {
    CHECK_THROWS_AS(monotonicity_audit(prop41, 9, AuditMechanism::mech3), InstanceError);
  }
}

TEST_CASE("approximation_ratio") {
  SECTION("thm34-lb, mech2-expected: the exact ratio approaches 3") {
    const auto lb = std::get<Instance>(paper_instance("thm34-lb"));
    const RatioResult result = approximation_ratio(lb, RatioRule::mech2_expected);
    REQUIRE(result.ratio.has_value());
    CHECK(*result.ratio == Rational(9001, 3002));
    CHECK(*result.ratio > Rational(299, 100));
    CHECK(*result.ratio < 3);
  }
  SECTION("prop41: mechanism 1 happens to be optimal, ratio 1") {
    const Instance instance = to_general(paper_instance("prop41"));
    const RatioResult result = approximation_ratio(instance, RatioRule::mech1);
    REQUIRE(result.ratio.has_value());
    CHECK(*result.ratio == 1);
  }
  SECTION("zero rule welfare with positive optimum is flagged") {
    // agent 1 is too dense and too large; mechanism 1 stops before agent 2
    const Instance instance = general(
        1, {Rational(5), Rational(1)}, {{Rational(10)}, {Rational(1)}});
    const RatioResult result = approximation_ratio(instance, RatioRule::mech1);
    CHECK(result.rule_welfare == 0);
    CHECK(result.optimum == 1);
    CHECK(!result.ratio.has_value());
  }
}

TEST_CASE("position auction optimum cross-check") {
  for (std::uint64_t seed = 400; seed < 450; ++seed) {
    const auto any = draw_instance(RandomKind::position, seed);
    const auto& pos = std::get<PositionAuctionInstance>(any);
    const Matching specialized = position_auction_optimal(pos);
    const Matching brute = optimal_matching(realized(pos));
    CHECK(specialized.welfare == brute.welfare);
    CHECK(validate(realized(pos), specialized).empty());
  }
}

TEST_CASE("the optimum dominates every mechanism on random instances") {
  for (std::uint64_t seed = 500; seed < 540; ++seed) {
    const Instance instance = to_general(draw_instance(RandomKind::general, seed));
    const Rational opt = optimal_matching(instance).welfare;
    CHECK(opt >= mechanism1(instance).final_matching.welfare);
    CHECK(opt >= mechanism3(instance).final_matching.welfare);
    CHECK(opt >= mechanism3(instance, true).final_matching.welfare);
    CHECK(opt >= greedy_by_density(instance).welfare);
    CHECK(opt >= greedy_by_value(instance).welfare);
    CHECK(opt >= g_vmax(instance).welfare);
  }
}
