#include <doctest.h>

#include "chanlab/generators.hpp"
#include "chanlab/offline.hpp"

using namespace chanlab;

namespace {

TransactionStream ltr(std::initializer_list<std::int64_t> amounts) {
  TransactionStream stream;
  for (auto a : amounts) stream.push_back({a, Direction::LeftToRight});
  return stream;
}

// Replays an offline solution through the channel model and re-derives its
// total cost with the core cost operations.
Money replay_cost(const OfflineSolution& sol, std::span<const Transaction> stream,
                  const CostParams& params) {
  Money cost = 0;
  if (sol.opened)
    cost += recharge_cost(params, Money(sol.funds_left + sol.funds_right));
  ChannelState state{Money(sol.funds_left), Money(sol.funds_right)};
  REQUIRE(sol.decisions.size() == stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto& tx = stream[i];
    const auto& d = sol.decisions[i];
    switch (d.action) {
      case OfflineAction::Reject:
        cost += rejection_cost(params, Money(tx.amount));
        break;
      case OfflineAction::Accept:
        state = apply_accept(state, tx);
        break;
      case OfflineAction::RebalanceThenAccept: {
        cost += rebalance_cost(params, Money(d.rebalance_amount));
        Money move(d.rebalance_amount);
        if (tx.direction == Direction::LeftToRight) {
          REQUIRE(state.right >= move);
          state.left += move;
          state.right -= move;
        } else {
          REQUIRE(state.left >= move);
          state.right += move;
          state.left -= move;
        }
        state = apply_accept(state, tx);
        break;
      }
    }
    CHECK_FALSE(state.left.is_negative());
    CHECK_FALSE(state.right.is_negative());
  }
  return cost;
}

}  // namespace

TEST_SUITE_BEGIN("offline");

TEST_CASE("dp_bound applies both appendix bounds") {
  CHECK(dp_bound(ltr({2, 3}), {Rat(0), Money(1), Money(10), 2}).max_funds == 5);
  CHECK(dp_bound(ltr({2, 3}), {Rat(0), Money(100), Money(1), 2}).max_funds == 0);
  CHECK(dp_bound({}, {Rat(0), Money(1), Money(1), 2}).max_funds == 0);
}

TEST_CASE("dp_solve on the worked examples") {
  {
    auto sol = dp_solve(ltr({2, 3}), {Rat(0), Money(1), Money(10), 2});
    CHECK(sol.total_cost == Money(6));
    CHECK(sol.opened);
    CHECK(sol.funds_left == 5);
    CHECK(sol.funds_right == 0);
    CHECK(sol.decisions == std::vector<OfflineDecision>{{OfflineAction::Accept, 0},
                                                        {OfflineAction::Accept, 0}});
  }
  {
    auto sol = dp_solve(ltr({2}), {Rat(0), Money(3), Money(1), 2});
    CHECK(sol.total_cost == Money(1));
    CHECK_FALSE(sol.opened);
    CHECK(sol.prefix_funds == std::vector<std::int64_t>{0});
  }
  {
    TransactionStream zigzag{{2, Direction::LeftToRight},
                             {2, Direction::RightToLeft},
                             {2, Direction::LeftToRight}};
    auto sol = dp_solve(zigzag, {Rat(0), Money(1), Money(2), 2});
    CHECK(sol.total_cost == Money(3));
    CHECK(sol.opened);
    CHECK(sol.funds_left + sol.funds_right == 2);
  }
  CHECK(dp_solve({}, {Rat(0), Money(1), Money(1), 2}).total_cost == Money(0));
}

TEST_CASE("brute force on the worked examples") {
  BruteCaps caps{6, 20};
  CHECK(brute_force_offline(ltr({2, 3}), {Rat(0), Money(1), Money(10), 2}, caps) ==
        Money(6));
  CHECK(brute_force_offline(ltr({2}), {Rat(0), Money(3), Money(1), 2}, caps) == Money(1));
  CHECK(brute_force_offline({}, {Rat(0), Money(1), Money(1), 2}, caps) == Money(0));

  TransactionStream single{{1, Direction::RightToLeft}};
  CHECK(brute_force_offline(single, {Rat(0), Money(1), Money(5), 2}, caps) == Money(2));

  CHECK_THROWS_AS(brute_force_offline(ltr({9, 9, 9}), {Rat(0), Money(1), Money(1), 2}),
                  CapExceeded);
  CHECK_THROWS_AS(
      brute_force_offline(ltr({1, 1, 1, 1, 1, 1, 1}), {Rat(0), Money(1), Money(1), 2}),
      CapExceeded);
}

TEST_CASE("dp equals brute force on sampled small instances") {
  const CostParams grid[] = {
      {Rat(0), Money(1), Money(1), 2},    {Rat(0), Money(3), Money(2), 3},
      {Rat(1, 2), Money(1), Money(2), 2}, {Rat(1, 2), Money(3), Money(1), 3},
  };
  SplitMix64 rng(2024);
  for (int it = 0; it < 300; ++it) {
    TransactionStream stream;
    auto t = rng.next() % 7;  // lengths 0..6
    for (std::uint64_t i = 0; i < t; ++i)
      stream.push_back({static_cast<std::int64_t>(rng.next() % 3) + 1,
                        rng.next() % 2 == 0 ? Direction::LeftToRight
                                            : Direction::RightToLeft});
    const auto& params = grid[rng.next() % 4];
    auto brute = brute_force_offline(stream, params, {6, 18});
    auto sol = dp_solve(stream, params);
    CHECK(sol.total_cost == brute);
  }
}

TEST_CASE("replay consistency and structural facts on random streams") {
  CostParams params{Rat(0), Money(3), Money(2), 2};
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    auto stream = sample_stream({3.0, 0.5, 30, seed});
    auto sol = dp_solve(stream, params);

    CHECK(replay_cost(sol, stream, params) == sol.total_cost);

    // prefix costs are monotone, funds bounded by the running optimum
    for (std::size_t i = 1; i < sol.prefix_costs.size(); ++i)
      CHECK(sol.prefix_costs[i - 1] <= sol.prefix_costs[i]);

    // Cost_OFF >= A_t + f1 whenever A_t > 0
    std::int64_t max_funds = 0;
    for (auto f : sol.prefix_funds) max_funds = std::max(max_funds, f);
    if (max_funds > 0)
      CHECK(sol.total_cost >= Money(max_funds) + params.onchain_fee);
  }
}

TEST_CASE("budget guards") {
  auto stream = ltr({5, 5, 5});
  CHECK_THROWS_AS(dp_solve(stream, {Rat(0), Money(1), Money(100), 2}, DpCaps{10, 200}),
                  BudgetExceeded);
  CHECK_THROWS_AS(dp_solve(stream, {Rat(0), Money(1), Money(100), 2}, DpCaps{2000, 2}),
                  BudgetExceeded);
  CHECK(off_cost(stream, {Rat(0), Money(1), Money(100), 2}) == Money(16));
}

TEST_SUITE_END();
