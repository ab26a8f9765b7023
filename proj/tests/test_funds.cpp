#include <doctest.h>

#include "chanlab/funds.hpp"
#include "chanlab/generators.hpp"

using namespace chanlab;

namespace {

TransactionStream ltr(std::initializer_list<std::int64_t> amounts) {
  TransactionStream stream;
  for (auto a : amounts) stream.push_back({a, Direction::LeftToRight});
  return stream;
}

}  // namespace

TEST_SUITE_BEGIN("funds");

TEST_CASE("unidirectional funds without rejection is the prefix sum") {
  CHECK(funds_unidirectional_no_reject(ltr({3, 4})) == Money(7));
  CHECK(funds_unidirectional_no_reject({}) == Money(0));
  CHECK(funds_unidirectional_no_reject(ltr({1, 1, 1, 1})) == Money(4));

  TransactionStream mixed{{1, Direction::LeftToRight}, {1, Direction::RightToLeft}};
  CHECK_THROWS_AS(funds_unidirectional_no_reject(mixed), MixedDirections);
}

TEST_CASE("unidirectional funds with rejection") {
  CostParams params{Rat(0), Money(3), Money(2), 2};  // f1=3, f2=2
  auto stream = ltr({3, 1, 1, 1, 1});
  CHECK(funds_unidirectional_reject(std::span(stream).subspan(0, 1), params) == Money(0));
  CHECK(funds_unidirectional_reject(stream, params) == Money(4));

  CostParams expensive{Rat(0), Money(100), Money(2), 2};
  CHECK(funds_unidirectional_reject(ltr({1, 1, 1}), expensive) == Money(0));

  // x=5 is small since 5 <= 5*1+1; opening wins exactly when f1 <= 1
  CostParams tie{Rat(1), Money(1), Money(1), 2};
  CHECK(funds_unidirectional_reject(ltr({5}), tie) == Money(5));
  CostParams f1_2{Rat(1), Money(2), Money(1), 2};
  CHECK(funds_unidirectional_reject(ltr({5}), f1_2) == Money(0));
}

TEST_CASE("bidirectional funds via the dp") {
  CHECK(funds_bidirectional(ltr({2, 3}), {Rat(0), Money(1), Money(10), 2}) == Money(5));
  CHECK(funds_bidirectional(ltr({2}), {Rat(0), Money(3), Money(1), 2}) == Money(0));
  CHECK(funds_bidirectional({}, {Rat(0), Money(3), Money(1), 2}) == Money(0));
}

TEST_CASE("oracle determinism") {
  auto stream = sample_stream({3.0, 0.5, 20, 7});
  CostParams params{Rat(0), Money(3), Money(2), 2};
  auto oracle = funds_oracle_bidirectional(params);
  CHECK(oracle(stream) == oracle(stream));

  auto trace = trace_funds(stream, oracle);
  REQUIRE(trace.per_prefix.size() == stream.size());
  Money expected_max = 0;
  for (const auto& v : trace.per_prefix) expected_max = max(expected_max, v);
  CHECK(trace.running_max == expected_max);
}

TEST_CASE("tracker reproduces the example rows") {
  RechargeTracker tracker(Rat(2), Money(10));  // gamma=2, delta=10

  auto none = tracker.step(Money(0));
  CHECK_FALSE(none.recharge);
  CHECK(tracker.threshold() == Money(0));

  auto first = tracker.step(Money(1));
  CHECK(first.recharge);
  CHECK(first.recharge_to == Money(22));
  CHECK(tracker.threshold() == Money(11));

  auto steady = tracker.step(Money(10));
  CHECK_FALSE(steady.recharge);
  CHECK(tracker.threshold() == Money(11));

  auto second = tracker.step(Money(12));
  CHECK(second.recharge);
  CHECK(second.recharge_to == Money(44));
  CHECK(tracker.threshold() == Money(22));
}

TEST_CASE("tracker laxity delays firing") {
  RechargeTracker lax(Rat(1), Money(3), Rat(2));  // fires only when A > 2*F
  lax.step(Money(5));
  CHECK(lax.threshold() == Money(8));
  CHECK_FALSE(lax.step(Money(15)).recharge);  // 15 <= 2*8
  CHECK(lax.step(Money(17)).recharge);        // 17 > 16
  CHECK(lax.threshold() == Money(20));
}

TEST_CASE("tracker parameter validation") {
  CHECK_THROWS_AS(RechargeTracker(Rat(0), Money(1)), UnsupportedParams);
  CHECK_THROWS_AS(RechargeTracker(Rat(1), Money(0)), UnsupportedParams);
  CHECK_THROWS_AS(RechargeTracker(Rat(1), Money(1), Rat(1, 2)), UnsupportedParams);
}

TEST_CASE("tracker dominance and recharge-count bound") {
  // gamma * F_tracker >= gamma * A after every step, and the number of
  // recharges never exceeds ceil(A_t / delta).
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto stream = sample_stream({3.0, 1.0, 40, seed});
    RechargeTracker tracker(Rat(1), Money(5));
    Money prefix = 0;
    Money max_funds = 0;
    std::int64_t recharges = 0;
    for (const auto& tx : stream) {
      prefix += Money(tx.amount);
      max_funds = max(max_funds, prefix);
      if (tracker.step(prefix).recharge) ++recharges;
      CHECK(tracker.threshold() >= prefix);
    }
    CHECK(Rat(recharges) <= (max_funds / Money(5)).ceil64());
  }
}

TEST_SUITE_END();
