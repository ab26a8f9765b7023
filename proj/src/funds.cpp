#include "chanlab/funds.hpp"

namespace chanlab {

bool is_big_transaction(const CostParams& params, std::int64_t amount) {
  return Money(amount) > rejection_cost(params, Money(amount));
}

Money funds_unidirectional_no_reject(std::span<const Transaction> prefix) {
  single_direction(prefix);
  return Money(total_amount(prefix));
}

Money funds_unidirectional_reject(std::span<const Transaction> prefix,
                                  const CostParams& params) {
  single_direction(prefix);
  Money small_sum = 0;
  Money small_rejections = 0;
  for (const auto& tx : prefix) {
    if (is_big_transaction(params, tx.amount)) continue;
    small_sum += Money(tx.amount);
    small_rejections += rejection_cost(params, Money(tx.amount));
  }
  if (small_sum.is_zero()) return Money(0);
  return params.onchain_fee + small_sum <= small_rejections ? small_sum : Money(0);
}

Money funds_bidirectional(std::span<const Transaction> prefix, const CostParams& params,
                          const DpCaps& caps) {
  if (prefix.empty()) return Money(0);
  auto sol = dp_solve(prefix, params, caps);
  return Money(sol.prefix_funds.back());
}

FundsOracle funds_oracle_no_reject() {
  return [](std::span<const Transaction> prefix) {
    return funds_unidirectional_no_reject(prefix);
  };
}

FundsOracle funds_oracle_reject(CostParams params) {
  return [params](std::span<const Transaction> prefix) {
    return funds_unidirectional_reject(prefix, params);
  };
}

FundsOracle funds_oracle_bidirectional(CostParams params, DpCaps caps) {
  return [params, caps](std::span<const Transaction> prefix) {
    return funds_bidirectional(prefix, params, caps);
  };
}

FundsTrace trace_funds(std::span<const Transaction> stream, const FundsOracle& oracle) {
  FundsTrace trace;
  trace.per_prefix.reserve(stream.size());
  for (std::size_t i = 1; i <= stream.size(); ++i) {
    Money value = oracle(stream.subspan(0, i));
    trace.running_max = max(trace.running_max, value);
    trace.per_prefix.push_back(std::move(value));
  }
  return trace;
}

RechargeTracker::RechargeTracker(Rat gamma, Money delta, Rat laxity)
    : gamma_(std::move(gamma)), delta_(std::move(delta)), laxity_(std::move(laxity)) {
  if (!(gamma_ > Rat(0))) throw UnsupportedParams("tracker gamma must be > 0");
  if (!(delta_ > Money(0))) throw UnsupportedParams("tracker delta must be > 0");
  if (laxity_ < Rat(1)) throw UnsupportedParams("tracker laxity must be >= 1");
}

RechargeDecision RechargeTracker::step(const Money& observed_funds) {
  if (observed_funds.is_negative())
    throw Error("tracker observed negative funds");
  if (observed_funds <= laxity_ * f_tracker_) return {};
  f_tracker_ = observed_funds + delta_;
  return {true, gamma_ * f_tracker_};
}

}  // namespace chanlab
