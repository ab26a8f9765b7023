#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chanlab/rational.hpp"

namespace chanlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientBalance : Error { using Error::Error; };
struct MixedDirections : Error { using Error::Error; };
struct ZeroAmount : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct CapExceeded : Error { using Error::Error; };
struct GridTooCoarse : Error { using Error::Error; };
struct UnsupportedParams : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct EdgeNotFound : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

enum class Direction : std::uint8_t { LeftToRight, RightToLeft };

std::string_view to_string(Direction dir);  // "ltr" / "rtl"
std::optional<Direction> direction_from_string(std::string_view text);

constexpr Direction opposite(Direction dir) {
  return dir == Direction::LeftToRight ? Direction::RightToLeft
                                       : Direction::LeftToRight;
}

// Amounts are positive integers on the money grid; streams are processed in
// order and prefix i means the first i entries.
struct Transaction {
  std::int64_t amount = 0;
  Direction direction = Direction::LeftToRight;

  bool operator==(const Transaction&) const = default;
};

using TransactionStream = std::vector<Transaction>;

std::int64_t total_amount(std::span<const Transaction> stream);

// Returns the common direction, or nullopt for an empty stream.
// Throws MixedDirections when both directions appear.
std::optional<Direction> single_direction(std::span<const Transaction> stream);

// Fee environment shared by every algorithm:
//   rejection of x costs fee_rate*x + base_fee,
//   on-chain recharge of F costs F + onchain_fee,
//   off-chain rebalance of x costs cycle_hops * (fee_rate*x + base_fee),
// where cycle_hops is the rebalancing cycle length minus one.
struct CostParams {
  Rat fee_rate = 0;          // R
  Money onchain_fee = 1;     // f1
  Money base_fee = 1;        // f2
  std::int64_t cycle_hops = 1;  // C

  void validate() const;  // throws UnsupportedParams
};

struct ChannelState {
  Money left;
  Money right;

  Money capacity() const { return left + right; }
  bool operator==(const ChannelState&) const = default;
};

// Moves tx.amount across the channel; capacity is conserved. Throws
// InsufficientBalance when the sending side lacks funds (a policy bug:
// policies must check before accepting).
ChannelState apply_accept(const ChannelState& state, const Transaction& tx);

Money rejection_cost(const CostParams& params, const Money& amount);
Money rebalance_cost(const CostParams& params, const Money& amount);  // ZeroAmount on 0
Money recharge_cost(const CostParams& params, const Money& fund_amount);

// Every field is nondecreasing over a run; total() is the run's cost.
struct CostLedger {
  Money rejection_total;
  Money recharge_total;   // locked funds plus per-event onchain fees
  Money rebalance_total;
  std::int64_t recharge_count = 0;
  Money rebalanced_amount;
  std::int64_t accepted_count = 0;
  std::int64_t rejected_count = 0;

  Money total() const { return rejection_total + recharge_total + rebalance_total; }
  bool operator==(const CostLedger&) const = default;
};

// Stream CSV: header `index,amount,direction`, direction ltr/rtl, LF endings.
void write_stream_csv(std::span<const Transaction> stream, std::ostream& os);
TransactionStream read_stream_csv(std::istream& is);  // ParseError with line number

// Flat JSON object with the seven ledger fields as decimal strings.
std::string ledger_to_json(const CostLedger& ledger);
CostLedger ledger_from_json(const std::string& text);

}  // namespace chanlab
