#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "chanlab/core.hpp"
#include "chanlab/funds.hpp"

namespace chanlab {

enum class DecisionKind : std::uint8_t { Accept, Reject, RebalanceThenAccept };

std::string_view to_string(DecisionKind kind);

struct TraceEvent {
  std::int64_t index = 0;  // 1-based position in the stream
  std::int64_t amount = 0;
  Direction direction = Direction::LeftToRight;
  DecisionKind decision = DecisionKind::Reject;
  Money rebalanced;                  // off-chain amount moved before accepting
  bool rebalance_shortfall = false;  // source side could not supply the full target
  bool recharged = false;
  Money recharged_to;  // channel capacity right after the recharge
  Money cost_delta;

  bool operator==(const TraceEvent&) const = default;
};

struct RunResult {
  CostLedger ledger;
  std::vector<TraceEvent> trace;
};

// One JSON object per event: {t, amount, direction, decision, rebalanced?,
// recharged_to?, cost_delta}.
std::string trace_event_to_json(const TraceEvent& event);

// (1, f1)-recharging, accepts everything. Unidirectional streams only.
RunResult accept_all_policy(std::span<const Transaction> stream, const CostParams& params);

// (1, kRejectAwareDeltaFactor * f1)-recharging; big transactions are always
// rejected, small ones accepted whenever funds suffice.
RunResult reject_aware_policy(std::span<const Transaction> stream, const CostParams& params);

// (sqrt(5)-1)/2 to 14 decimal digits, pinned strictly below the exact value.
extern const Rat kRejectAwareDeltaFactor;

// k = max(1, ceil(log2 C)): number of level buckets per side.
int bucket_level_count(std::int64_t cycle_hops);

struct BucketClass {
  enum Kind : std::uint8_t { Small, Level, TooBig } kind = TooBig;
  int level = 0;  // 1..k, only for Kind::Level

  bool operator==(const BucketClass&) const = default;
};

// Small when x <= F/C (small wins overlaps with the deepest level); Level(i)
// for the unique i with F/2^i < x <= F/2^(i-1); TooBig above F.
BucketClass classify_bucket(const Money& f_tracker, std::int64_t cycle_hops,
                            const Money& amount);

struct BucketSet {
  Money small_bucket;          // B_s, capacity 2*F_tracker
  std::vector<Money> levels;   // levels[i-1] = B_i, capacity F_tracker each
  Money overflow;              // B_o

  Money total() const;
};

BucketSet make_bucket_set(int level_count, const Money& f_tracker);

// Waterfall fill of received funds: B_s up to 2F, then levels from B_k down
// to B_1 up to F each, remainder into B_o. Total funds conserved.
BucketSet bucketed_handle_incoming(BucketSet receiver, const Money& amount,
                                   const Money& f_tracker);

// Moves overflow funds into deficient buckets using the same priority order;
// idempotent when B_o is empty or everything is full.
BucketSet bucketed_refill_from_overflow(BucketSet side, const Money& f_tracker);

struct PolicyDecision {
  DecisionKind kind = DecisionKind::Reject;
  Money rebalance_amount;
  bool shortfall = false;
};

struct BucketedState {
  BucketSet left;
  BucketSet right;
  RechargeTracker tracker;
  std::int64_t cycle_hops = 1;

  Money total_funds() const { return left.total() + right.total(); }
};

BucketedState make_bucketed_state(const CostParams& params);

// Decides one transaction and applies the fund movements (bucket debit,
// off-chain draw, receiver-side waterfall, overflow refill) to the state.
// The tracker must already have been stepped for this prefix.
PolicyDecision bucketed_on_decide(BucketedState& state, const Transaction& tx,
                                  const CostParams& params);

using BucketObserver = std::function<void(const BucketedState&)>;

// The main bidirectional policy: (4 + 2k, f1)-recharging over the DP funds
// oracle plus the per-size bucket discipline. Requires R = 0.
RunResult bucketed_policy(std::span<const Transaction> stream, const CostParams& params,
                          std::span<const std::int64_t> prefix_funds,
                          const BucketObserver& observer = {});
RunResult bucketed_policy(std::span<const Transaction> stream, const CostParams& params);

struct HeuristicParams {
  Rat alpha = 2;  // recharge laxity; 1 makes the relaxed policy fire like the strict one
};

// Bucket-free variant: (max(1, ceil(log2 C)), f1)-recharging, equal split per
// side, accepts x < F_tracker while funds last, rebalances only for x <= F/C.
RunResult on_i_policy(std::span<const Transaction> stream, const CostParams& params,
                      std::span<const std::int64_t> prefix_funds);
RunResult on_i_policy(std::span<const Transaction> stream, const CostParams& params);

// Same as on_i but recharges only once observed funds exceed alpha * F_tracker.
RunResult on_ii_policy(std::span<const Transaction> stream, const CostParams& params,
                       const HeuristicParams& heuristics,
                       std::span<const std::int64_t> prefix_funds);
RunResult on_ii_policy(std::span<const Transaction> stream, const CostParams& params,
                       const HeuristicParams& heuristics);

}  // namespace chanlab
