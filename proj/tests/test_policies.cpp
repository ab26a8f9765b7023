#include <doctest.h>

#include "chanlab/experiments.hpp"
#include "chanlab/generators.hpp"
#include "chanlab/offline.hpp"
#include "chanlab/policies.hpp"

using namespace chanlab;

namespace {

TransactionStream ltr(std::initializer_list<std::int64_t> amounts) {
  TransactionStream stream;
  for (auto a : amounts) stream.push_back({a, Direction::LeftToRight});
  return stream;
}

const CostParams kR0{Rat(0), Money(3), Money(2), 2};  // R=0, f1=3, f2=2, C=2

}  // namespace

TEST_SUITE_BEGIN("policies");

TEST_CASE("accept-all worked example") {
  CostParams params{Rat(0), Money(5), Money(2), 2};  // f1 = 5
  auto run = accept_all_policy(ltr({3, 4}), params);
  CHECK(run.ledger.total() == Money(13));
  CHECK(run.ledger.recharge_count == 1);
  CHECK(run.ledger.accepted_count == 2);
  REQUIRE(run.trace.size() == 2);
  CHECK(run.trace[0].recharged);
  CHECK(run.trace[0].recharged_to == Money(8));
  CHECK_FALSE(run.trace[1].recharged);

  CHECK(accept_all_policy({}, params).ledger.total() == Money(0));

  auto dozen = accept_all_policy(ltr({1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1}), params);
  CHECK(dozen.ledger.total() <= Rat(2) * (Money(12) + params.onchain_fee));
  CHECK(dozen.ledger.accepted_count == 12);

  TransactionStream mixed{{1, Direction::LeftToRight}, {1, Direction::RightToLeft}};
  CHECK_THROWS_AS(accept_all_policy(mixed, params), MixedDirections);
}

TEST_CASE("accept-all recharging matches the tracker lemma exactly") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    CostParams params{Rat(0), Money(1 + static_cast<std::int64_t>(seed % 3) * 4),
                      Money(2), 2};
    auto stream = sample_stream({3.0, 1.0, 1 + static_cast<std::int64_t>(seed % 60), seed});
    auto run = accept_all_policy(stream, params);
    Money volume(total_amount(stream));
    // recharge cost <= gamma*(A_t + delta) + f1 * ceil(A_t / delta)
    Money fee_part = Rat((volume / params.onchain_fee).ceil64()) * params.onchain_fee;
    CHECK(run.ledger.recharge_total <= volume + params.onchain_fee + fee_part);
    CHECK(Rat(run.ledger.recharge_count) <= (volume / params.onchain_fee).ceil64());
    CHECK(run.ledger.rejection_total.is_zero());
  }
}

TEST_CASE("reject-aware worked examples") {
  auto big = reject_aware_policy(ltr({9}), kR0);
  CHECK(big.ledger.total() == Money(2));
  CHECK(big.ledger.rejected_count == 1);
  CHECK(big.ledger.recharge_count == 0);

  auto lone = reject_aware_policy(ltr({1}), kR0);
  CHECK(lone.ledger.total() == Money(2));  // OFF would not open either

  auto run = reject_aware_policy(ltr({1, 1, 1, 1}), kR0);
  // tracker fires when the prefix becomes worth opening (A = 3 at t = 3)
  CHECK(run.ledger.recharge_count == 1);
  CHECK(run.trace[2].recharged);
  Money off2 = offline_reference_cost(PolicyKind::RejectAware, ltr({1, 1, 1, 1}), kR0);
  CHECK(off2 == Money(7));
  CHECK(run.ledger.total() <= Rat(2618033988749894LL, 1000000000000000LL) * off2);
}

TEST_CASE("reject-aware never rejects a small transaction after funding") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto stream = sample_stream({5.0, 1.0, 60, seed});
    auto run = reject_aware_policy(stream, kR0);
    bool funded = false;
    for (const auto& ev : run.trace) {
      if (ev.recharged) funded = true;
      bool small = !is_big_transaction(kR0, ev.amount);
      if (funded && small) CHECK(ev.decision == DecisionKind::Accept);
    }
  }
}

TEST_CASE("bucket level count") {
  CHECK(bucket_level_count(1) == 1);
  CHECK(bucket_level_count(2) == 1);
  CHECK(bucket_level_count(3) == 2);
  CHECK(bucket_level_count(4) == 2);
  CHECK(bucket_level_count(5) == 3);
  CHECK(bucket_level_count(8) == 3);
}

TEST_CASE("classify_bucket thresholds") {
  Money f(8);
  CHECK(classify_bucket(f, 4, Money(2)) == BucketClass{BucketClass::Small, 0});
  CHECK(classify_bucket(f, 4, Money(3)) == BucketClass{BucketClass::Level, 2});
  CHECK(classify_bucket(f, 4, Money(5)) == BucketClass{BucketClass::Level, 1});
  CHECK(classify_bucket(f, 4, Money(9)) == BucketClass{BucketClass::TooBig, 0});
  // boundaries: x = F/C is small, x = F sits in level 1
  CHECK(classify_bucket(f, 4, Money(8)) == BucketClass{BucketClass::Level, 1});
  CHECK(classify_bucket(f, 4, Money(4)) == BucketClass{BucketClass::Level, 2});
  CHECK(classify_bucket(f, 2, Money(4)) == BucketClass{BucketClass::Small, 0});
  // C = 3 leaves a range where small precedence wins inside level 2
  CHECK(classify_bucket(Money(12), 3, Money(4)) == BucketClass{BucketClass::Small, 0});
  CHECK(classify_bucket(Money(12), 3, Money(5)) == BucketClass{BucketClass::Level, 2});
}

TEST_CASE("handle_incoming waterfall") {
  BucketSet receiver;
  receiver.small_bucket = 10;
  receiver.levels = {Money(0), Money(8)};  // B_1 = 0, B_2 = 8
  receiver.overflow = 0;
  Money f(8);

  auto nine = bucketed_handle_incoming(receiver, Money(9), f);
  CHECK(nine.small_bucket == Money(16));
  CHECK(nine.levels[1] == Money(8));
  CHECK(nine.levels[0] == Money(3));
  CHECK(nine.overflow == Money(0));
  CHECK(nine.total() == receiver.total() + Money(9));

  auto twenty = bucketed_handle_incoming(receiver, Money(20), f);
  CHECK(twenty.small_bucket == Money(16));
  CHECK(twenty.levels[1] == Money(8));
  CHECK(twenty.levels[0] == Money(8));
  CHECK(twenty.overflow == Money(6));

  BucketSet full;
  full.small_bucket = 16;
  full.levels = {Money(8), Money(8)};
  full.overflow = 0;
  auto plus_one = bucketed_handle_incoming(full, Money(1), f);
  CHECK(plus_one.overflow == Money(1));
}

TEST_CASE("refill_from_overflow priorities") {
  Money f(8);
  BucketSet side;
  side.small_bucket = 14;
  side.levels = {Money(8)};
  side.overflow = 5;
  auto refilled = bucketed_refill_from_overflow(side, f);
  CHECK(refilled.small_bucket == Money(16));
  CHECK(refilled.levels[0] == Money(8));
  CHECK(refilled.overflow == Money(3));

  BucketSet full;
  full.small_bucket = 16;
  full.levels = {Money(8)};
  full.overflow = 7;
  CHECK(bucketed_refill_from_overflow(full, f).overflow == Money(7));

  BucketSet empty;
  empty.small_bucket = 0;
  empty.levels = {Money(0)};
  empty.overflow = 3;
  auto drained = bucketed_refill_from_overflow(empty, f);
  CHECK(drained.small_bucket == Money(3));
  CHECK(drained.levels[0] == Money(0));
  CHECK(drained.overflow == Money(0));
}

namespace {

// C=2 state with F_tracker = 8 and canonical buckets on both sides.
BucketedState example_state() {
  CostParams params{Rat(0), Money(3), Money(2), 2};
  BucketedState state = make_bucketed_state(params);
  state.tracker.step(Money(5));  // threshold becomes 5 + f1 = 8
  state.left = make_bucket_set(1, Money(8));
  state.right = make_bucket_set(1, Money(8));
  return state;
}

}  // namespace

TEST_CASE("bucketed decide: level accept then deplete") {
  auto state = example_state();
  auto first = bucketed_on_decide(state, {6, Direction::LeftToRight}, kR0);
  CHECK(first.kind == DecisionKind::Accept);
  CHECK(state.left.levels[0] == Money(2));
  CHECK(state.right.overflow == Money(6));  // right side was full

  auto second = bucketed_on_decide(state, {6, Direction::LeftToRight}, kR0);
  CHECK(second.kind == DecisionKind::Reject);
  CHECK(state.left.levels[0] == Money(2));
}

TEST_CASE("bucketed decide: small-path rebalance restores the 2F level") {
  auto state = example_state();
  state.left.small_bucket = 1;
  state.right.small_bucket = 13;
  state.right.overflow = 20;
  auto decision = bucketed_on_decide(state, {3, Direction::LeftToRight}, kR0);
  CHECK(decision.kind == DecisionKind::RebalanceThenAccept);
  CHECK(decision.rebalance_amount == Money(18));  // 3 + 16 - 1
  CHECK_FALSE(decision.shortfall);
  CHECK(state.left.small_bucket == Money(16));
  CHECK(state.right.overflow == Money(2));
  CHECK(state.right.small_bucket == Money(16));  // the accepted 3 lands in B_s
}

TEST_CASE("bucketed decide: shortfall draws everything, infeasible rejects") {
  auto state = example_state();
  state.left.small_bucket = 1;
  state.right.small_bucket = 2;
  state.right.overflow = 1;
  auto decision = bucketed_on_decide(state, {3, Direction::LeftToRight}, kR0);
  CHECK(decision.kind == DecisionKind::RebalanceThenAccept);
  CHECK(decision.rebalance_amount == Money(3));  // all the source had
  CHECK(decision.shortfall);

  auto state2 = example_state();
  state2.left.small_bucket = 1;
  state2.right.small_bucket = 1;
  state2.right.overflow = 0;
  auto reject = bucketed_on_decide(state2, {3, Direction::LeftToRight}, kR0);
  CHECK(reject.kind == DecisionKind::Reject);
  CHECK(state2.right.small_bucket == Money(1));  // nothing moved
}

TEST_CASE("bucketed decide: zero threshold rejects everything") {
  CostParams params = kR0;
  BucketedState state = make_bucketed_state(params);
  auto decision = bucketed_on_decide(state, {1, Direction::LeftToRight}, params);
  CHECK(decision.kind == DecisionKind::Reject);
}

TEST_CASE("bucketed policy requires R = 0") {
  CostParams bad{Rat(1, 2), Money(3), Money(2), 2};
  auto stream = ltr({1});
  std::vector<std::int64_t> funds{0};
  CHECK_THROWS_AS(bucketed_policy(stream, bad, funds), UnsupportedParams);
}

TEST_CASE("bucketed policy conserves funds and hits the recharge target") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto stream = sample_stream({3.0, 0.5, 40, seed});
    auto sol = dp_solve(stream, kR0);

    std::vector<Money> totals;
    auto run = bucketed_policy(stream, kR0, sol.prefix_funds,
                               [&totals](const BucketedState& state) {
                                 totals.push_back(state.total_funds());
                                 CHECK_FALSE(state.left.small_bucket.is_negative());
                                 CHECK_FALSE(state.right.small_bucket.is_negative());
                                 CHECK_FALSE(state.left.overflow.is_negative());
                                 CHECK_FALSE(state.right.overflow.is_negative());
                                 for (const auto& level : state.left.levels)
                                   CHECK_FALSE(level.is_negative());
                                 for (const auto& level : state.right.levels)
                                   CHECK_FALSE(level.is_negative());
                               });

    REQUIRE(totals.size() == stream.size());
    Money capacity = 0;
    for (std::size_t i = 0; i < stream.size(); ++i) {
      if (run.trace[i].recharged) capacity = run.trace[i].recharged_to;
      CHECK(totals[i] == capacity);  // conservation between recharges
    }
  }
}

TEST_CASE("on-i decision rules over a crafted run") {
  CostParams params{Rat(0), Money(3), Money(1), 2};
  TransactionStream stream{{10, Direction::LeftToRight}, {4, Direction::LeftToRight},
                           {4, Direction::LeftToRight},  {7, Direction::LeftToRight},
                           {5, Direction::LeftToRight},  {1, Direction::RightToLeft}};
  std::vector<std::int64_t> funds{7, 7, 7, 7, 7, 7};  // F_tracker pins to 10

  auto run = on_i_policy(stream, params, funds);
  REQUIRE(run.trace.size() == 6);
  CHECK(run.trace[0].recharged);
  CHECK(run.trace[0].recharged_to == Money(10));  // gamma = 1 for C = 2
  CHECK(run.trace[0].decision == DecisionKind::Reject);  // 10 is not < F
  CHECK(run.trace[1].decision == DecisionKind::Accept);
  CHECK(run.trace[2].decision == DecisionKind::RebalanceThenAccept);
  CHECK(run.trace[2].rebalanced == Money(9));  // capped by the right side
  CHECK(run.trace[3].decision == DecisionKind::Reject);  // 7 > F/C with low funds
  CHECK(run.trace[4].decision == DecisionKind::Accept);
  CHECK(run.trace[5].decision == DecisionKind::Accept);

  CHECK(run.ledger.recharge_total == Money(13));
  CHECK(run.ledger.rebalance_total == Money(2));
  CHECK(run.ledger.rebalanced_amount == Money(9));
  CHECK(run.ledger.rejection_total == Money(2));
  CHECK(run.ledger.accepted_count == 4);
  CHECK(run.ledger.rejected_count == 2);
}

TEST_CASE("on-ii with alpha 1 is trace-identical to on-i") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    auto stream = sample_stream({3.0, 0.5, 40, seed});
    auto sol = dp_solve(stream, kR0);
    auto one = on_i_policy(stream, kR0, sol.prefix_funds);
    auto two = on_ii_policy(stream, kR0, {Rat(1)}, sol.prefix_funds);
    CHECK(one.trace == two.trace);
    CHECK(one.ledger == two.ledger);
  }
}

TEST_CASE("on-ii validates alpha and recharges lazily") {
  auto stream = ltr({1});
  std::vector<std::int64_t> funds{1};
  CHECK_THROWS_AS(on_ii_policy(stream, kR0, {Rat(1, 2)}, funds), UnsupportedParams);

  // alpha = 2: first recharge at A > 0 is unavoidable, later ones need A > 2F.
  auto wide = sample_stream({3.0, 0.5, 50, 11});
  auto sol = dp_solve(wide, kR0);
  auto strict = on_i_policy(wide, kR0, sol.prefix_funds);
  auto lax = on_ii_policy(wide, kR0, {Rat(2)}, sol.prefix_funds);
  CHECK(lax.ledger.recharge_count <= strict.ledger.recharge_count);
}

TEST_CASE("policies are deterministic") {
  auto stream = sample_stream({3.0, 0.5, 30, 42});
  auto sol = dp_solve(stream, kR0);
  auto a = bucketed_policy(stream, kR0, sol.prefix_funds);
  auto b = bucketed_policy(stream, kR0, sol.prefix_funds);
  CHECK(a.trace == b.trace);
  CHECK(a.ledger == b.ledger);
}

TEST_CASE("trace json lines") {
  auto run = accept_all_policy(ltr({3}), {Rat(0), Money(5), Money(2), 2});
  REQUIRE(run.trace.size() == 1);
  auto line = trace_event_to_json(run.trace[0]);
  CHECK(line ==
        R"({"t":1,"amount":3,"direction":"ltr","decision":"accept","recharged_to":"8","cost_delta":"13"})");
}

TEST_SUITE_END();
