#include "chanlab/policies.hpp"

#include <utility>

#include <json.hpp>

#include "chanlab/offline.hpp"

namespace chanlab {

const Rat kRejectAwareDeltaFactor(61803398874989LL, 100000000000000LL);

std::string_view to_string(DecisionKind kind) {
  switch (kind) {
    case DecisionKind::Accept: return "accept";
    case DecisionKind::Reject: return "reject";
    case DecisionKind::RebalanceThenAccept: return "rebalance_then_accept";
  }
  return "unknown";
}

std::string trace_event_to_json(const TraceEvent& event) {
  nlohmann::ordered_json j;
  j["t"] = event.index;
  j["amount"] = event.amount;
  j["direction"] = to_string(event.direction);
  j["decision"] = to_string(event.decision);
  if (!event.rebalanced.is_zero()) j["rebalanced"] = event.rebalanced.str();
  if (event.rebalance_shortfall) j["rebalance_shortfall"] = true;
  if (event.recharged) j["recharged_to"] = event.recharged_to.str();
  j["cost_delta"] = event.cost_delta.str();
  return j.dump();
}

namespace {

void note_rejection(CostLedger& ledger, const CostParams& params, std::int64_t amount) {
  ledger.rejection_total += rejection_cost(params, Money(amount));
  ledger.rejected_count += 1;
}

void note_recharge(CostLedger& ledger, const CostParams& params, const Money& purchase) {
  ledger.recharge_total += recharge_cost(params, purchase);
  ledger.recharge_count += 1;
}

void note_rebalance(CostLedger& ledger, const CostParams& params, const Money& amount) {
  ledger.rebalance_total += rebalance_cost(params, amount);
  ledger.rebalanced_amount += amount;
}

// Shared driver for the two unidirectional policies. The funds oracle is fed
// incrementally; decide() returns the decision given the current spendable
// balance and may assume the recharge for this prefix already happened.
template <typename ObserveTx, typename Decide>
RunResult run_unidirectional(std::span<const Transaction> stream, const CostParams& params,
                             RechargeTracker tracker, ObserveTx&& observed_funds,
                             Decide&& decide) {
  params.validate();
  single_direction(stream);
  RunResult out;
  Money capacity = 0;
  Money balance = 0;  // sending side
  std::int64_t index = 0;
  for (const auto& tx : stream) {
    ++index;
    TraceEvent ev;
    ev.index = index;
    ev.amount = tx.amount;
    ev.direction = tx.direction;
    const Money before = out.ledger.total();

    auto dec = tracker.step(observed_funds(tx));
    if (dec.recharge) {
      Money purchase = dec.recharge_to - capacity;
      capacity = dec.recharge_to;
      balance += purchase;
      note_recharge(out.ledger, params, purchase);
      ev.recharged = true;
      ev.recharged_to = capacity;
    }

    if (decide(tx, balance)) {
      if (balance < Money(tx.amount))
        throw InsufficientBalance("policy accepted beyond its balance");
      balance -= Money(tx.amount);
      out.ledger.accepted_count += 1;
      ev.decision = DecisionKind::Accept;
    } else {
      note_rejection(out.ledger, params, tx.amount);
      ev.decision = DecisionKind::Reject;
    }
    ev.cost_delta = out.ledger.total() - before;
    out.trace.push_back(std::move(ev));
  }
  return out;
}

}  // namespace

RunResult accept_all_policy(std::span<const Transaction> stream, const CostParams& params) {
  params.validate();
  Money prefix_sum = 0;
  return run_unidirectional(
      stream, params, RechargeTracker(Rat(1), params.onchain_fee),
      [&prefix_sum](const Transaction& tx) {
        prefix_sum += Money(tx.amount);
        return prefix_sum;
      },
      [](const Transaction&, const Money&) { return true; });
}

RunResult reject_aware_policy(std::span<const Transaction> stream, const CostParams& params) {
  params.validate();
  Money small_sum = 0;
  Money small_rejections = 0;
  return run_unidirectional(
      stream, params,
      RechargeTracker(Rat(1), kRejectAwareDeltaFactor * params.onchain_fee),
      [&, params](const Transaction& tx) {
        if (!is_big_transaction(params, tx.amount)) {
          small_sum += Money(tx.amount);
          small_rejections += rejection_cost(params, Money(tx.amount));
        }
        bool worth_opening =
            !small_sum.is_zero() && params.onchain_fee + small_sum <= small_rejections;
        return worth_opening ? small_sum : Money(0);
      },
      [&params](const Transaction& tx, const Money& balance) {
        return !is_big_transaction(params, tx.amount) && balance >= Money(tx.amount);
      });
}

int bucket_level_count(std::int64_t cycle_hops) {
  int k = 0;
  std::int64_t reach = 1;
  while (reach < cycle_hops) {
    reach *= 2;
    ++k;
  }
  return k < 1 ? 1 : k;
}

BucketClass classify_bucket(const Money& f_tracker, std::int64_t cycle_hops,
                            const Money& amount) {
  if (amount > f_tracker) return {BucketClass::TooBig, 0};
  if (amount * Rat(cycle_hops) <= f_tracker) return {BucketClass::Small, 0};
  const int k = bucket_level_count(cycle_hops);
  Money high = f_tracker;
  for (int i = 1; i <= k; ++i) {
    Money low = high / Rat(2);
    if (low < amount && amount <= high) return {BucketClass::Level, i};
    high = low;
  }
  return {BucketClass::TooBig, 0};  // unreachable for F > 0: levels cover (F/C, F]
}

Money BucketSet::total() const {
  Money sum = small_bucket + overflow;
  for (const auto& level : levels) sum += level;
  return sum;
}

BucketSet make_bucket_set(int level_count, const Money& f_tracker) {
  BucketSet set;
  set.small_bucket = Rat(2) * f_tracker;
  set.levels.assign(level_count, f_tracker);
  set.overflow = Money(0);
  return set;
}

BucketSet bucketed_handle_incoming(BucketSet receiver, const Money& amount,
                                   const Money& f_tracker) {
  Money rest = amount;
  Money need = Rat(2) * f_tracker - receiver.small_bucket;
  if (need > Money(0)) {
    Money take = min(need, rest);
    receiver.small_bucket += take;
    rest -= take;
  }
  for (auto it = receiver.levels.rbegin(); it != receiver.levels.rend(); ++it) {
    if (rest.is_zero()) break;
    need = f_tracker - *it;
    if (need > Money(0)) {
      Money take = min(need, rest);
      *it += take;
      rest -= take;
    }
  }
  receiver.overflow += rest;
  return receiver;
}

BucketSet bucketed_refill_from_overflow(BucketSet side, const Money& f_tracker) {
  Money need = Rat(2) * f_tracker - side.small_bucket;
  if (need > Money(0)) {
    Money take = min(need, side.overflow);
    side.small_bucket += take;
    side.overflow -= take;
  }
  for (auto it = side.levels.rbegin(); it != side.levels.rend(); ++it) {
    if (side.overflow.is_zero()) break;
    need = f_tracker - *it;
    if (need > Money(0)) {
      Money take = min(need, side.overflow);
      *it += take;
      side.overflow -= take;
    }
  }
  return side;
}

BucketedState make_bucketed_state(const CostParams& params) {
  const int k = bucket_level_count(params.cycle_hops);
  return BucketedState{make_bucket_set(k, Money(0)), make_bucket_set(k, Money(0)),
                       RechargeTracker(Rat(4 + 2 * k), params.onchain_fee),
                       params.cycle_hops};
}

PolicyDecision bucketed_on_decide(BucketedState& state, const Transaction& tx,
                                  const CostParams& /*params*/) {
  PolicyDecision out;
  const Money f_tracker = state.tracker.threshold();
  if (f_tracker.is_zero()) return out;

  const bool ltr = tx.direction == Direction::LeftToRight;
  BucketSet& sender = ltr ? state.left : state.right;
  BucketSet& receiver = ltr ? state.right : state.left;
  const Money x(tx.amount);

  const auto cls = classify_bucket(f_tracker, state.cycle_hops, x);
  switch (cls.kind) {
    case BucketClass::TooBig:
      return out;
    case BucketClass::Level: {
      Money& bucket = sender.levels[cls.level - 1];
      if (bucket < x) return out;
      bucket -= x;
      receiver = bucketed_handle_incoming(std::move(receiver), x, f_tracker);
      out.kind = DecisionKind::Accept;
      break;
    }
    case BucketClass::Small: {
      if (sender.small_bucket >= x) {
        sender.small_bucket -= x;
        receiver = bucketed_handle_incoming(std::move(receiver), x, f_tracker);
        out.kind = DecisionKind::Accept;
        break;
      }
      // Draw enough that 2F stays in B_s after paying x, sourced from the
      // other side's B_o then B_s; reject outright if even the whole source
      // cannot make the payment feasible.
      const Money target = x + Rat(2) * f_tracker - sender.small_bucket;
      const Money available = receiver.overflow + receiver.small_bucket;
      const Money drawn = min(target, available);
      if (sender.small_bucket + drawn < x) return out;
      Money from_overflow = min(drawn, receiver.overflow);
      receiver.overflow -= from_overflow;
      receiver.small_bucket -= drawn - from_overflow;
      sender.small_bucket += drawn;
      sender.small_bucket -= x;
      receiver = bucketed_handle_incoming(std::move(receiver), x, f_tracker);
      out.kind = DecisionKind::RebalanceThenAccept;
      out.rebalance_amount = drawn;
      out.shortfall = drawn < target;
      break;
    }
  }
  state.left = bucketed_refill_from_overflow(std::move(state.left), f_tracker);
  state.right = bucketed_refill_from_overflow(std::move(state.right), f_tracker);
  return out;
}

RunResult bucketed_policy(std::span<const Transaction> stream, const CostParams& params,
                          std::span<const std::int64_t> prefix_funds,
                          const BucketObserver& observer) {
  params.validate();
  if (!params.fee_rate.is_zero())
    throw UnsupportedParams("bucketed policy requires fee_rate = 0");
  if (prefix_funds.size() != stream.size())
    throw Error("prefix funds must match the stream length");

  RunResult out;
  BucketedState state = make_bucketed_state(params);
  const int k = bucket_level_count(params.cycle_hops);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto& tx = stream[i];
    TraceEvent ev;
    ev.index = static_cast<std::int64_t>(i) + 1;
    ev.amount = tx.amount;
    ev.direction = tx.direction;
    const Money before = out.ledger.total();

    auto dec = state.tracker.step(Money(prefix_funds[i]));
    if (dec.recharge) {
      Money purchase = dec.recharge_to - state.total_funds();
      if (!(purchase > Money(0))) throw Error("recharge produced a non-positive purchase");
      const Money f_tracker = state.tracker.threshold();
      state.left = make_bucket_set(k, f_tracker);
      state.right = make_bucket_set(k, f_tracker);
      note_recharge(out.ledger, params, purchase);
      ev.recharged = true;
      ev.recharged_to = dec.recharge_to;
    }

    auto pd = bucketed_on_decide(state, tx, params);
    ev.decision = pd.kind;
    switch (pd.kind) {
      case DecisionKind::Accept:
        out.ledger.accepted_count += 1;
        break;
      case DecisionKind::Reject:
        note_rejection(out.ledger, params, tx.amount);
        break;
      case DecisionKind::RebalanceThenAccept:
        note_rebalance(out.ledger, params, pd.rebalance_amount);
        out.ledger.accepted_count += 1;
        ev.rebalanced = pd.rebalance_amount;
        ev.rebalance_shortfall = pd.shortfall;
        break;
    }
    ev.cost_delta = out.ledger.total() - before;
    out.trace.push_back(std::move(ev));
    if (observer) observer(state);
  }
  return out;
}

RunResult bucketed_policy(std::span<const Transaction> stream, const CostParams& params) {
  auto sol = dp_solve(stream, params);
  return bucketed_policy(stream, params, sol.prefix_funds);
}

namespace {

// ON-I and its lazier variant share everything except the tracker laxity.
RunResult run_equal_split_policy(std::span<const Transaction> stream,
                                 const CostParams& params,
                                 std::span<const std::int64_t> prefix_funds,
                                 const Rat& laxity) {
  params.validate();
  if (!params.fee_rate.is_zero())
    throw UnsupportedParams("heuristic policies require fee_rate = 0");
  if (prefix_funds.size() != stream.size())
    throw Error("prefix funds must match the stream length");

  RunResult out;
  RechargeTracker tracker(Rat(bucket_level_count(params.cycle_hops)), params.onchain_fee,
                          laxity);
  Money left = 0;
  Money right = 0;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto& tx = stream[i];
    TraceEvent ev;
    ev.index = static_cast<std::int64_t>(i) + 1;
    ev.amount = tx.amount;
    ev.direction = tx.direction;
    const Money before = out.ledger.total();

    auto dec = tracker.step(Money(prefix_funds[i]));
    if (dec.recharge) {
      Money purchase = dec.recharge_to - (left + right);
      if (!(purchase > Money(0))) throw Error("recharge produced a non-positive purchase");
      Money half = dec.recharge_to / Rat(2);
      left = half;
      right = half;
      note_recharge(out.ledger, params, purchase);
      ev.recharged = true;
      ev.recharged_to = dec.recharge_to;
    }

    const Money f_tracker = tracker.threshold();
    const bool ltr = tx.direction == Direction::LeftToRight;
    Money& sender = ltr ? left : right;
    Money& receiver = ltr ? right : left;
    const Money x(tx.amount);

    if (x >= f_tracker) {
      note_rejection(out.ledger, params, tx.amount);
      ev.decision = DecisionKind::Reject;
    } else if (sender >= x) {
      sender -= x;
      receiver += x;
      out.ledger.accepted_count += 1;
      ev.decision = DecisionKind::Accept;
    } else if (x * Rat(params.cycle_hops) <= f_tracker) {
      Money draw = min(receiver, Rat(2) * f_tracker - sender);
      if (sender + draw >= x) {
        receiver -= draw;
        sender += draw;
        note_rebalance(out.ledger, params, draw);
        sender -= x;
        receiver += x;
        out.ledger.accepted_count += 1;
        ev.decision = DecisionKind::RebalanceThenAccept;
        ev.rebalanced = draw;
      } else {
        note_rejection(out.ledger, params, tx.amount);
        ev.decision = DecisionKind::Reject;
      }
    } else {
      note_rejection(out.ledger, params, tx.amount);
      ev.decision = DecisionKind::Reject;
    }
    ev.cost_delta = out.ledger.total() - before;
    out.trace.push_back(std::move(ev));
  }
  return out;
}

std::vector<std::int64_t> dp_prefix_funds(std::span<const Transaction> stream,
                                          const CostParams& params) {
  return dp_solve(stream, params).prefix_funds;
}

}  // namespace

RunResult on_i_policy(std::span<const Transaction> stream, const CostParams& params,
                      std::span<const std::int64_t> prefix_funds) {
  return run_equal_split_policy(stream, params, prefix_funds, Rat(1));
}

RunResult on_i_policy(std::span<const Transaction> stream, const CostParams& params) {
  auto funds = dp_prefix_funds(stream, params);
  return on_i_policy(stream, params, funds);
}

RunResult on_ii_policy(std::span<const Transaction> stream, const CostParams& params,
                       const HeuristicParams& heuristics,
                       std::span<const std::int64_t> prefix_funds) {
  if (heuristics.alpha < Rat(1))
    throw UnsupportedParams("heuristic alpha must be >= 1");
  return run_equal_split_policy(stream, params, prefix_funds, heuristics.alpha);
}

RunResult on_ii_policy(std::span<const Transaction> stream, const CostParams& params,
                       const HeuristicParams& heuristics) {
  auto funds = dp_prefix_funds(stream, params);
  return on_ii_policy(stream, params, heuristics, funds);
}

}  // namespace chanlab
