#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chanlab/core.hpp"

namespace chanlab {

// Upper bound on the total channel funds worth considering: the tighter of
// "sum of all amounts" and "reject-everything cost minus the onchain fee",
// floored and clamped at zero.
struct DpBounds {
  std::int64_t max_funds = 0;  // S
};

DpBounds dp_bound(std::span<const Transaction> stream, const CostParams& params);

struct DpCaps {
  std::int64_t max_total_funds = 2000;
  std::int64_t max_transactions = 200;
};

enum class OfflineAction : std::uint8_t { Reject, Accept, RebalanceThenAccept };

struct OfflineDecision {
  OfflineAction action = OfflineAction::Reject;
  std::int64_t rebalance_amount = 0;  // only for RebalanceThenAccept

  bool operator==(const OfflineDecision&) const = default;
};

// Exact optimum for the full stream plus the optimum of every prefix.
// Replaying `decisions` from (funds_left, funds_right) reproduces total_cost
// and never drives a balance negative.
struct OfflineSolution {
  Money total_cost;
  std::int64_t funds_left = 0;
  std::int64_t funds_right = 0;
  bool opened = false;
  std::vector<OfflineDecision> decisions;
  std::vector<Money> prefix_costs;         // Cost_OFF(X_i), i = 1..t
  std::vector<std::int64_t> prefix_funds;  // A(X_i), i = 1..t
};

OfflineSolution dp_solve(std::span<const Transaction> stream, const CostParams& params,
                         const DpBounds& bounds, const DpCaps& caps = {});
OfflineSolution dp_solve(std::span<const Transaction> stream, const CostParams& params,
                         const DpCaps& caps = {});

Money off_cost(std::span<const Transaction> stream, const CostParams& params,
               const DpCaps& caps = {});

// Validation oracle: enumerates every decision sequence (reject / accept /
// rebalance to every feasible level) over every initial split, including the
// no-channel branch. Exact but only for desk-sized instances.
struct BruteCaps {
  std::int64_t max_transactions = 6;
  std::int64_t max_total_funds = 12;
};

Money brute_force_offline(std::span<const Transaction> stream, const CostParams& params,
                          const BruteCaps& caps = {});

}  // namespace chanlab
