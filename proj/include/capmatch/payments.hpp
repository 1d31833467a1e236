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

#include <optional>
#include <string>
#include <vector>

#include "capmatch/core.hpp"
#include "capmatch/mechanisms.hpp"
#include "capmatch/oracle.hpp"

namespace capmatch {

/// Payments are defined for the monotone rules only.
enum class PaymentMechanism { mech3, g_vmax };

inline AuditMechanism to_audit_mechanism(PaymentMechanism mech) {
  return mech == PaymentMechanism::mech3 ? AuditMechanism::mech3 : AuditMechanism::g_vmax;
}

/// Step function from one agent's bid to her assigned CTR. breakpoints are
/// exactly the jump points; ctr_per_interval[t] is the CTR on the open
/// interval between breakpoints t-1 and t (ctr_per_interval[0] applies below
/// the first breakpoint and is always 0). Non-decreasing for monotone rules.
struct AllocationCurve {
  AgentId agent = 0;
  std::vector<Rational> breakpoints;
  std::vector<Rational> ctr_per_interval;  // breakpoints.size() + 1 entries

  /// CTR of the open interval containing `bid` (bid must not be a breakpoint).
  const Rational& interval_ctr(const Rational& bid) const {
    std::size_t t = 0;
    while (t < breakpoints.size() && breakpoints[t] < bid) ++t;
    if (t < breakpoints.size() && breakpoints[t] == bid)
      throw InstanceError("bid sits on a breakpoint");
    return ctr_per_interval[t];
  }

  /// CTR of the interval immediately left of `bid`.
  const Rational& ctr_left_of(const Rational& bid) const {
    std::size_t t = 0;
    while (t < breakpoints.size() && breakpoints[t] < bid) ++t;
    return ctr_per_interval[t];
  }
};

/// Builds the agent's exact allocation curve by evaluating the mechanism on
/// each interval of the candidate grid and merging equal neighbours.
inline AllocationCurve allocation_curve(const PositionAuctionInstance& pos, AgentId agent,
                                        PaymentMechanism mech) {
  const AuditMechanism audit_mech = to_audit_mechanism(mech);
  const std::vector<Rational> candidates = candidate_bids(pos, agent);  // first is 0

  // ctr on (candidates[t], candidates[t+1]), last interval open-ended
  std::vector<Rational> interval_ctrs;
  for (std::size_t t = 0; t < candidates.size(); ++t) {
    const Rational sample = t + 1 < candidates.size()
                                ? Rational((candidates[t] + candidates[t + 1]) / 2)
                                : Rational(candidates[t] + 1);
    interval_ctrs.push_back(assigned_ctr(pos, agent, sample, audit_mech));
  }

  AllocationCurve curve;
  curve.agent = agent;
  curve.ctr_per_interval.push_back(Rational(0));  // below any valid bid
  for (std::size_t t = 0; t < candidates.size(); ++t) {
    if (interval_ctrs[t] == curve.ctr_per_interval.back()) continue;
    curve.breakpoints.push_back(candidates[t]);
    curve.ctr_per_interval.push_back(interval_ctrs[t]);
  }
  for (std::size_t t = 0; t + 1 < curve.ctr_per_interval.size(); ++t)
    if (curve.ctr_per_interval[t] > curve.ctr_per_interval[t + 1])
      throw Error("allocation curve not monotone for agent " + std::to_string(agent) +
                  " (mechanism bug)");
  return curve;
}

/// Myerson threshold payment for bidding `bid`, given the mechanism's curve
/// and the CTR actually assigned at that bid: the sum over jumps z < bid of
/// z * (ctr_after - ctr_before), plus the partial jump at the bid itself.
inline Rational payment_at_bid(const AllocationCurve& curve, const Rational& bid,
                               const Rational& ctr_at_bid) {
  if (ctr_at_bid == 0) return Rational(0);  // losers pay nothing
  Rational payment = 0;
  for (std::size_t t = 0; t < curve.breakpoints.size() && curve.breakpoints[t] < bid; ++t)
    payment += curve.breakpoints[t] *
               (curve.ctr_per_interval[t + 1] - curve.ctr_per_interval[t]);
  payment += bid * (ctr_at_bid - curve.ctr_left_of(bid));
  return payment;
}

/// Truthful Myerson payment: p_i = b_i*x_i(b_i) - integral of the allocation
/// curve below b_i, evaluated exactly via the jump sum. Unassigned agents
/// pay 0.
inline Rational myerson_payment(const PositionAuctionInstance& pos, AgentId agent,
                                PaymentMechanism mech) {
  const Rational bid = pos.value(agent);
  const Rational ctr = assigned_ctr(pos, agent, bid, to_audit_mechanism(mech));
  if (ctr == 0) return Rational(0);
  return payment_at_bid(allocation_curve(pos, agent, mech), bid, ctr);
}

/// Per-arm payment for mechanism 4: universal truthfulness charges under the
/// realized deterministic mechanism.
inline Rational mechanism4_payment(const PositionAuctionInstance& pos, AgentId agent, Arm arm) {
  return myerson_payment(pos, agent,
                         arm == Arm::mech_greedy ? PaymentMechanism::mech3
                                                 : PaymentMechanism::g_vmax);
}

struct Deviation {
  Rational bid;
  Rational utility;
  Rational truthful_utility;
};

struct TruthfulnessResult {
  bool ok = true;
  std::optional<Deviation> profitable_deviation;
};

/// Sweeps the candidate grid and checks that no bid beats truthful reporting.
/// `deviation_payment_delta` is a test hook: it is subtracted from every
/// non-truthful payment to build negative controls.
inline TruthfulnessResult truthfulness_audit(const PositionAuctionInstance& pos, AgentId agent,
                                             PaymentMechanism mech,
                                             const Rational& deviation_payment_delta = 0) {
  const AuditMechanism audit_mech = to_audit_mechanism(mech);
  const AllocationCurve curve = allocation_curve(pos, agent, mech);
  const Rational truthful_bid = pos.value(agent);
  const Rational truthful_ctr = assigned_ctr(pos, agent, truthful_bid, audit_mech);
  const Rational truthful_utility =
      truthful_ctr * truthful_bid - payment_at_bid(curve, truthful_bid, truthful_ctr);

  const std::vector<Rational> candidates = candidate_bids(pos, agent);
  std::vector<Rational> probe_bids;
  for (std::size_t t = 0; t < candidates.size(); ++t) {
    probe_bids.push_back(candidates[t]);
    if (t + 1 < candidates.size())
      probe_bids.push_back((candidates[t] + candidates[t + 1]) / 2);
  }
  probe_bids.push_back(candidates.back() + 1);

  TruthfulnessResult result;
  for (const Rational& bid : probe_bids) {
    if (bid == truthful_bid) continue;
    const Rational ctr = assigned_ctr(pos, agent, bid, audit_mech);
    Rational payment = payment_at_bid(curve, bid, ctr);
    if (ctr != 0) payment -= deviation_payment_delta;
    const Rational utility = ctr * truthful_bid - payment;
    if (utility > truthful_utility) {
      result.ok = false;
      result.profitable_deviation = Deviation{bid, utility, truthful_utility};
      return result;
    }
  }
  return result;
}

struct PaymentRow {
  AgentId agent = 0;
  PositionId position = 0;  // 0 when unassigned
  Rational ctr;
  Rational value;
  Rational payment;
  Rational utility;
};

inline std::vector<PaymentRow> payment_rows(const PositionAuctionInstance& pos,
                                            PaymentMechanism mech) {
  const Matching matching = run_mechanism(to_mechanism_kind(to_audit_mechanism(mech)),
                                          realized(pos));
  std::vector<PaymentRow> rows;
  for (AgentId i = 1; i <= pos.num_agents(); ++i) {
    PaymentRow row;
    row.agent = i;
    row.value = pos.value(i);
    if (auto j = matching.position_of(i)) {
      row.position = *j;
      row.ctr = pos.ctr(*j);
      row.payment = myerson_payment(pos, i, mech);
      row.utility = row.ctr * row.value - row.payment;
    } else {
      row.ctr = 0;
      row.payment = 0;
      row.utility = 0;
    }
    rows.push_back(row);
  }
  return rows;
}

/// CSV report: agent,position,ctr,value,payment,utility.
inline std::string payments_csv(const PositionAuctionInstance& pos, PaymentMechanism mech) {
  std::string out = "agent,position,ctr,value,payment,utility\n";
  for (const PaymentRow& row : payment_rows(pos, mech)) {
    out += std::to_string(row.agent) + "," + std::to_string(row.position) + "," +
           to_fraction_string(row.ctr) + "," + to_fraction_string(row.value) + "," +
           to_fraction_string(row.payment) + "," + to_fraction_string(row.utility) + "\n";
  }
  return out;
}

}  // namespace capmatch
