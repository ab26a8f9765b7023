#include "chanlab/core.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

namespace chanlab {

std::string_view to_string(Direction dir) {
  return dir == Direction::LeftToRight ? "ltr" : "rtl";
}

std::optional<Direction> direction_from_string(std::string_view text) {
  if (text == "ltr") return Direction::LeftToRight;
  if (text == "rtl") return Direction::RightToLeft;
  return std::nullopt;
}

std::int64_t total_amount(std::span<const Transaction> stream) {
  std::int64_t sum = 0;
  for (const auto& tx : stream) sum += tx.amount;
  return sum;
}

std::optional<Direction> single_direction(std::span<const Transaction> stream) {
  if (stream.empty()) return std::nullopt;
  Direction dir = stream.front().direction;
  for (const auto& tx : stream) {
    if (tx.direction != dir)
      throw MixedDirections("stream mixes ltr and rtl transactions");
  }
  return dir;
}

void CostParams::validate() const {
  if (fee_rate.is_negative()) throw UnsupportedParams("fee_rate must be >= 0");
  if (!(onchain_fee > Money(0))) throw UnsupportedParams("onchain_fee must be > 0");
  if (!(base_fee > Money(0))) throw UnsupportedParams("base_fee must be > 0");
  if (cycle_hops < 1) throw UnsupportedParams("cycle_hops must be >= 1");
}

ChannelState apply_accept(const ChannelState& state, const Transaction& tx) {
  Money amount(tx.amount);
  if (tx.direction == Direction::LeftToRight) {
    if (state.left < amount)
      throw InsufficientBalance("left balance below transaction amount");
    return {state.left - amount, state.right + amount};
  }
  if (state.right < amount)
    throw InsufficientBalance("right balance below transaction amount");
  return {state.left + amount, state.right - amount};
}

Money rejection_cost(const CostParams& params, const Money& amount) {
  return params.fee_rate * amount + params.base_fee;
}

Money rebalance_cost(const CostParams& params, const Money& amount) {
  if (amount.is_zero()) throw ZeroAmount("rebalance of zero must not be charged");
  return Rat(params.cycle_hops) * (params.fee_rate * amount + params.base_fee);
}

Money recharge_cost(const CostParams& params, const Money& fund_amount) {
  return fund_amount + params.onchain_fee;
}

void write_stream_csv(std::span<const Transaction> stream, std::ostream& os) {
  os << "index,amount,direction\n";
  std::int64_t index = 1;
  for (const auto& tx : stream)
    os << index++ << ',' << tx.amount << ',' << to_string(tx.direction) << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

TransactionStream read_stream_csv(std::istream& is) {
  TransactionStream stream;
  std::string line;
  std::int64_t lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "index" || fields[1] != "amount" ||
          fields[2] != "direction")
        throw ParseError("line 1: expected header index,amount,direction");
      header_seen = true;
      continue;
    }
    if (fields.size() != 3)
      throw ParseError("line " + std::to_string(lineno) + ": expected 3 fields");
    auto amount = Rat::parse(fields[1]);
    if (!amount || !amount->is_integer() || amount->num() < 1)
      throw ParseError("line " + std::to_string(lineno) +
                       ": amount must be a positive integer");
    auto dir = direction_from_string(fields[2]);
    if (!dir)
      throw ParseError("line " + std::to_string(lineno) +
                       ": direction must be ltr or rtl");
    stream.push_back({amount->floor64(), *dir});
  }
  if (!header_seen && lineno > 0)
    throw ParseError("line 1: expected header index,amount,direction");
  return stream;
}

std::string ledger_to_json(const CostLedger& ledger) {
  nlohmann::json j;
  j["rejection_total"] = ledger.rejection_total.str();
  j["recharge_total"] = ledger.recharge_total.str();
  j["rebalance_total"] = ledger.rebalance_total.str();
  j["recharge_count"] = std::to_string(ledger.recharge_count);
  j["rebalanced_amount"] = ledger.rebalanced_amount.str();
  j["accepted_count"] = std::to_string(ledger.accepted_count);
  j["rejected_count"] = std::to_string(ledger.rejected_count);
  return j.dump();
}

CostLedger ledger_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("ledger: invalid JSON");
  auto money = [&](const char* key) {
    auto parsed = Rat::parse(j.at(key).get<std::string>());
    if (!parsed) throw ParseError(std::string("ledger: bad value for ") + key);
    return *parsed;
  };
  auto count = [&](const char* key) { return money(key).floor64(); };
  CostLedger ledger;
  ledger.rejection_total = money("rejection_total");
  ledger.recharge_total = money("recharge_total");
  ledger.rebalance_total = money("rebalance_total");
  ledger.recharge_count = count("recharge_count");
  ledger.rebalanced_amount = money("rebalanced_amount");
  ledger.accepted_count = count("accepted_count");
  ledger.rejected_count = count("rejected_count");
  return ledger;
}

}  // namespace chanlab
