#pragma once

#include <functional>
#include <span>
#include <vector>

#include "chanlab/core.hpp"
#include "chanlab/offline.hpp"

namespace chanlab {

// x is big when rejecting it is cheaper than funding it: x > R*x + f2.
bool is_big_transaction(const CostParams& params, std::int64_t amount);

// Funds the offline optimum locks for a unidirectional prefix without
// rejection: the plain prefix sum. Throws MixedDirections.
Money funds_unidirectional_no_reject(std::span<const Transaction> prefix);

// With rejection the optimum rejects all big transactions and opens a channel
// sized to the small ones only when that beats rejecting them too:
// returns S = sum of small amounts if f1 + S <= sum of small rejection costs
// (tie toward opening), else 0.
Money funds_unidirectional_reject(std::span<const Transaction> prefix,
                                  const CostParams& params);

// Funds component of the bidirectional prefix optimum (exact DP).
Money funds_bidirectional(std::span<const Transaction> prefix, const CostParams& params,
                          const DpCaps& caps = {});

using FundsOracle = std::function<Money(std::span<const Transaction>)>;

FundsOracle funds_oracle_no_reject();
FundsOracle funds_oracle_reject(CostParams params);
FundsOracle funds_oracle_bidirectional(CostParams params, DpCaps caps = {});

struct FundsTrace {
  std::vector<Money> per_prefix;  // A(X_1..i) for i = 1..t
  Money running_max;              // A_t
};

FundsTrace trace_funds(std::span<const Transaction> stream, const FundsOracle& oracle);

struct RechargeDecision {
  bool recharge = false;
  Money recharge_to;  // target total channel funds (gamma * F_tracker)

  bool operator==(const RechargeDecision&) const = default;
};

// (gamma, delta)-recharging: when the observed offline funds exceed the
// tracked threshold (times the laxity factor, 1 by default), the threshold
// moves to observed + delta and the channel recharges to gamma * threshold.
class RechargeTracker {
 public:
  RechargeTracker(Rat gamma, Money delta, Rat laxity = Rat(1));

  RechargeDecision step(const Money& observed_funds);

  const Money& threshold() const { return f_tracker_; }  // F_tracker
  const Rat& gamma() const { return gamma_; }
  const Money& delta() const { return delta_; }

 private:
  Rat gamma_;
  Money delta_;
  Rat laxity_;
  Money f_tracker_;
};

}  // namespace chanlab
