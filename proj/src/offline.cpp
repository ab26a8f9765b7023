#include "chanlab/offline.hpp"

#include <algorithm>
#include <limits>

namespace chanlab {

namespace {

using Int = Rat::Int;

Int gcd128(Int a, Int b) {
  while (b != 0) {
    Int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

void check_stream(std::span<const Transaction> stream) {
  for (const auto& tx : stream)
    if (tx.amount < 1) throw Error("transaction amounts must be >= 1");
}

// All DP costs are R*p + f2*q + f1*r with integer coefficients, so one layer
// cell is an int64 in units of 1/scale, scale = lcm of the denominators.
struct CostScale {
  std::int64_t scale = 1;
  std::int64_t rate = 0;      // R in 1/scale units
  std::int64_t base = 0;      // f2
  std::int64_t onchain = 0;   // f1

  std::int64_t reject(std::int64_t x) const { return rate * x + base; }
};

CostScale make_scale(std::span<const Transaction> stream, const CostParams& params,
                     std::int64_t max_funds) {
  Int d = params.fee_rate.den();
  d = d / gcd128(d, params.base_fee.den()) * params.base_fee.den();
  d = d / gcd128(d, params.onchain_fee.den()) * params.onchain_fee.den();
  if (d > Int(1'000'000'000'000))
    throw BudgetExceeded("parameter denominators too large for the exact DP");
  Int rate = params.fee_rate.num() * (d / params.fee_rate.den());
  Int base = params.base_fee.num() * (d / params.base_fee.den());
  Int onchain = params.onchain_fee.num() * (d / params.onchain_fee.den());

  // Worst accumulated cell value; keep everything clear of int64.
  Int worst = onchain + d * Int(max_funds);
  for (const auto& tx : stream)
    worst += (Int(params.cycle_hops) + 1) * (rate * Int(tx.amount) + base) +
             Int(params.cycle_hops) * rate * Int(max_funds);
  if (worst > (Int(1) << 62))
    throw BudgetExceeded("cost magnitudes overflow the exact DP scale");

  return {static_cast<std::int64_t>(d), static_cast<std::int64_t>(rate),
          static_cast<std::int64_t>(base), static_cast<std::int64_t>(onchain)};
}

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// One DP step in sender coordinates: cur/nxt are indexed by the sender's
// final balance. Every state is reachable by rejecting, so no cell is kInf.
void step_sender(const std::vector<std::int64_t>& cur, std::vector<std::int64_t>& nxt,
                 std::vector<std::int64_t>& prefix_min, std::int64_t x,
                 std::int64_t cycle_hops, const CostScale& cs) {
  const std::int64_t cap = static_cast<std::int64_t>(cur.size()) - 1;
  const std::int64_t reject = cs.reject(x);
  const std::int64_t crate = cycle_hops * cs.rate;
  const std::int64_t cbase = cycle_hops * cs.base;

  prefix_min.resize(cur.size());
  std::int64_t running = kInf;
  for (std::int64_t a = 0; a <= cap; ++a) {
    running = std::min(running, cur[a] - crate * a);
    prefix_min[a] = running;
  }

  for (std::int64_t s = 0; s <= cap; ++s) {
    std::int64_t best = cur[s] + reject;
    if (s + x <= cap) {
      best = std::min(best, cur[s + x]);
      std::int64_t j = std::min(s + x - 1, cap);
      std::int64_t reb = prefix_min[j] + crate * (s + x) + cbase;
      best = std::min(best, reb);
    }
    nxt[s] = best;
  }
}

struct PrefixBest {
  std::int64_t value = 0;
  std::int64_t sigma = -1;  // -1 = reject everything
};

}  // namespace

DpBounds dp_bound(std::span<const Transaction> stream, const CostParams& params) {
  params.validate();
  check_stream(stream);
  std::int64_t sum = total_amount(stream);
  Rat reject_all = params.fee_rate * Rat(sum) +
                   params.base_fee * Rat(static_cast<std::int64_t>(stream.size()));
  std::int64_t by_rejection = (reject_all - params.onchain_fee).floor64();
  std::int64_t s = std::min(sum, by_rejection);
  return {std::max<std::int64_t>(s, 0)};
}

OfflineSolution dp_solve(std::span<const Transaction> stream, const CostParams& params,
                         const DpBounds& bounds, const DpCaps& caps) {
  params.validate();
  check_stream(stream);
  const std::int64_t t = static_cast<std::int64_t>(stream.size());
  const std::int64_t S = bounds.max_funds;
  if (t > caps.max_transactions)
    throw BudgetExceeded("stream length exceeds the DP transaction cap");
  if (S > caps.max_total_funds)
    throw BudgetExceeded("funds bound exceeds the DP state cap");

  OfflineSolution sol;
  if (t == 0) return sol;

  const CostScale cs = make_scale(stream, params, S);
  const std::int64_t C = params.cycle_hops;

  // Prefix costs of the reject-everything strategy seed the per-prefix best.
  std::vector<PrefixBest> best(t);
  {
    std::int64_t acc = 0;
    for (std::int64_t i = 0; i < t; ++i) {
      acc += cs.reject(stream[i].amount);
      best[i].value = acc;
    }
  }

  std::vector<std::int64_t> cur, nxt, scratch;
  for (std::int64_t sigma = 0; sigma <= S; ++sigma) {
    cur.assign(sigma + 1, 0);
    nxt.assign(sigma + 1, 0);
    const std::int64_t open_charge = cs.scale * sigma + cs.onchain;
    for (std::int64_t i = 0; i < t; ++i) {
      const auto& tx = stream[i];
      if (tx.direction == Direction::RightToLeft) std::reverse(cur.begin(), cur.end());
      step_sender(cur, nxt, scratch, tx.amount, C, cs);
      if (tx.direction == Direction::RightToLeft) std::reverse(nxt.begin(), nxt.end());
      cur.swap(nxt);

      std::int64_t slice_min = *std::min_element(cur.begin(), cur.end());
      std::int64_t cand = slice_min + open_charge;
      // Fund ties break toward opening and toward the larger capacity: among
      // equally cheap optima, Funds reports the one that locks more.
      if (cand <= best[i].value) {
        best[i].value = cand;
        best[i].sigma = sigma;
      }
    }
  }

  sol.prefix_costs.reserve(t);
  sol.prefix_funds.reserve(t);
  for (std::int64_t i = 0; i < t; ++i) {
    sol.prefix_costs.emplace_back(Int(best[i].value), Int(cs.scale));
    sol.prefix_funds.push_back(best[i].sigma < 0 ? 0 : best[i].sigma);
  }
  sol.total_cost = sol.prefix_costs.back();
  sol.opened = best[t - 1].sigma >= 0;

  if (!sol.opened) {
    sol.decisions.assign(t, {OfflineAction::Reject, 0});
    return sol;
  }

  // Second pass on the winning capacity only, keeping every layer so the
  // decision path can be recovered by exact value matching.
  const std::int64_t sigma = best[t - 1].sigma;
  std::vector<std::vector<std::int64_t>> layers;
  layers.reserve(t + 1);
  layers.emplace_back(sigma + 1, 0);
  for (std::int64_t i = 0; i < t; ++i) {
    const auto& tx = stream[i];
    cur = layers.back();
    if (tx.direction == Direction::RightToLeft) std::reverse(cur.begin(), cur.end());
    nxt.assign(sigma + 1, 0);
    step_sender(cur, nxt, scratch, tx.amount, C, cs);
    if (tx.direction == Direction::RightToLeft) std::reverse(nxt.begin(), nxt.end());
    layers.push_back(nxt);
  }

  std::int64_t end_left = 0;
  for (std::int64_t s = 0; s <= sigma; ++s)
    if (layers[t][s] < layers[t][end_left]) end_left = s;

  sol.decisions.assign(t, {});
  std::int64_t left = end_left;
  for (std::int64_t i = t; i >= 1; --i) {
    const auto& tx = stream[i - 1];
    const bool ltr = tx.direction == Direction::LeftToRight;
    const std::int64_t x = tx.amount;
    const auto& prev = layers[i - 1];
    const std::int64_t here = layers[i][left];
    const std::int64_t sender = ltr ? left : sigma - left;
    auto fl_of = [&](std::int64_t sender_bal) { return ltr ? sender_bal : sigma - sender_bal; };

    // Tie order: reject, accept, rebalance with ascending prior balance a.
    if (prev[fl_of(sender)] + cs.reject(x) == here) {
      sol.decisions[i - 1] = {OfflineAction::Reject, 0};
      continue;
    }
    if (sender + x <= sigma && prev[fl_of(sender + x)] == here) {
      sol.decisions[i - 1] = {OfflineAction::Accept, 0};
      left = fl_of(sender + x);
      continue;
    }
    bool found = false;
    if (sender + x <= sigma) {
      const std::int64_t hi = std::min(sender + x - 1, sigma);
      for (std::int64_t a = 0; a <= hi && !found; ++a) {
        std::int64_t m = sender + x - a;
        if (prev[fl_of(a)] + C * (cs.rate * m + cs.base) == here) {
          sol.decisions[i - 1] = {OfflineAction::RebalanceThenAccept, m};
          left = fl_of(a);
          found = true;
        }
      }
    }
    if (!found) throw Error("dp backtrack failed to match a decision");
  }

  sol.funds_left = left;
  sol.funds_right = sigma - left;
  return sol;
}

OfflineSolution dp_solve(std::span<const Transaction> stream, const CostParams& params,
                         const DpCaps& caps) {
  return dp_solve(stream, params, dp_bound(stream, params), caps);
}

Money off_cost(std::span<const Transaction> stream, const CostParams& params,
               const DpCaps& caps) {
  return dp_solve(stream, params, caps).total_cost;
}

Money brute_force_offline(std::span<const Transaction> stream, const CostParams& params,
                          const BruteCaps& caps) {
  params.validate();
  check_stream(stream);
  const std::int64_t t = static_cast<std::int64_t>(stream.size());
  if (t > caps.max_transactions)
    throw CapExceeded("brute force: too many transactions");
  const std::int64_t sum = total_amount(stream);
  if (sum > caps.max_total_funds)
    throw CapExceeded("brute force: total amount exceeds the funds cap");

  std::vector<Money> reject_costs;
  reject_costs.reserve(t);
  Money no_channel = 0;
  for (const auto& tx : stream) {
    reject_costs.push_back(rejection_cost(params, Money(tx.amount)));
    no_channel += reject_costs.back();
  }
  Money best = no_channel;

  std::vector<Money> move_cost(sum + 1);
  for (std::int64_t m = 1; m <= sum; ++m)
    move_cost[m] = rebalance_cost(params, Money(m));

  // Suffix costs per capacity: suf[bl] = cheapest way to finish the stream
  // from step i with that left balance. Every decision branch is enumerated.
  std::vector<Money> suf, prev;
  for (std::int64_t sigma = 0; sigma <= sum; ++sigma) {
    suf.assign(sigma + 1, Money(0));
    for (std::int64_t i = t - 1; i >= 0; --i) {
      const auto& tx = stream[i];
      const std::int64_t x = tx.amount;
      prev.swap(suf);
      suf.assign(sigma + 1, Money(0));
      for (std::int64_t bl = 0; bl <= sigma; ++bl) {
        Money here = prev[bl] + reject_costs[i];
        if (tx.direction == Direction::LeftToRight) {
          if (bl >= x) here = chanlab::min(here, prev[bl - x]);
          for (std::int64_t m = 1; m <= sigma - bl; ++m)
            if (bl + m >= x)
              here = chanlab::min(here, move_cost[m] + prev[bl + m - x]);
        } else {
          const std::int64_t br = sigma - bl;
          if (br >= x) here = chanlab::min(here, prev[bl + x]);
          for (std::int64_t m = 1; m <= bl; ++m)
            if (br + m >= x)
              here = chanlab::min(here, move_cost[m] + prev[bl - m + x]);
        }
        suf[bl] = here;
      }
    }
    for (std::int64_t bl = 0; bl <= sigma; ++bl)
      best = chanlab::min(best, Money(sigma) + params.onchain_fee + suf[bl]);
  }
  return best;
}

}  // namespace chanlab
