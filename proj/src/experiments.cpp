#include "chanlab/experiments.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>

#include "chanlab/parallel.hpp"

namespace chanlab {

std::string_view policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Offline: return "OFF";
    case PolicyKind::Bucketed: return "ON";
    case PolicyKind::OnI: return "ON-I";
    case PolicyKind::OnII: return "ON-II";
    case PolicyKind::AcceptAll: return "ACCEPT-ALL";
    case PolicyKind::RejectAware: return "REJECT-AWARE";
  }
  return "?";
}

std::optional<PolicyKind> policy_from_string(std::string_view token) {
  if (token == "off" || token == "OFF") return PolicyKind::Offline;
  if (token == "on" || token == "ON" || token == "bucketed") return PolicyKind::Bucketed;
  if (token == "on-i" || token == "ON-I" || token == "on1") return PolicyKind::OnI;
  if (token == "on-ii" || token == "ON-II" || token == "on2") return PolicyKind::OnII;
  if (token == "accept-all" || token == "ACCEPT-ALL") return PolicyKind::AcceptAll;
  if (token == "reject-aware" || token == "REJECT-AWARE") return PolicyKind::RejectAware;
  return std::nullopt;
}

RunMetrics metrics_from_run(const RunResult& run, Money off_cost_value,
                            const CostParams& params) {
  RunMetrics m;
  m.cost = run.ledger.total();
  // Purchased funds alone; recharge_total also carries the onchain fees.
  m.locked_funds =
      run.ledger.recharge_total - Rat(run.ledger.recharge_count) * params.onchain_fee;
  m.recharges = run.ledger.recharge_count;
  m.rebalanced = run.ledger.rebalanced_amount;
  const std::int64_t handled = run.ledger.accepted_count + run.ledger.rejected_count;
  m.accept_rate = handled == 0 ? Rat(0) : Rat(run.ledger.accepted_count, handled);
  m.off_cost = std::move(off_cost_value);
  if (!m.off_cost.is_zero()) m.ratio = m.cost / m.off_cost;
  return m;
}

RunMetrics metrics_from_offline(const OfflineSolution& solution,
                                std::span<const Transaction> stream,
                                const CostParams& /*params*/) {
  RunMetrics m;
  m.cost = solution.total_cost;
  m.off_cost = solution.total_cost;
  if (!m.off_cost.is_zero()) m.ratio = Rat(1);
  m.locked_funds = Money(solution.funds_left + solution.funds_right);
  m.recharges = solution.opened ? 1 : 0;
  std::int64_t accepted = 0;
  Money rebalanced = 0;
  for (const auto& d : solution.decisions) {
    if (d.action != OfflineAction::Reject) ++accepted;
    if (d.action == OfflineAction::RebalanceThenAccept)
      rebalanced += Money(d.rebalance_amount);
  }
  m.rebalanced = rebalanced;
  m.accept_rate =
      stream.empty() ? Rat(0) : Rat(accepted, static_cast<std::int64_t>(stream.size()));
  return m;
}

RunMetrics run_policy(std::span<const Transaction> stream, const CostParams& params,
                      PolicyKind kind, const HeuristicParams& heuristics,
                      const OfflineSolution* precomputed, const DpCaps& caps) {
  OfflineSolution local;
  if (precomputed == nullptr) {
    local = dp_solve(stream, params, caps);
    precomputed = &local;
  }
  if (kind == PolicyKind::Offline)
    return metrics_from_offline(*precomputed, stream, params);

  RunResult run;
  switch (kind) {
    case PolicyKind::Bucketed:
      run = bucketed_policy(stream, params, precomputed->prefix_funds);
      break;
    case PolicyKind::OnI:
      run = on_i_policy(stream, params, precomputed->prefix_funds);
      break;
    case PolicyKind::OnII:
      run = on_ii_policy(stream, params, heuristics, precomputed->prefix_funds);
      break;
    case PolicyKind::AcceptAll:
      run = accept_all_policy(stream, params);
      break;
    case PolicyKind::RejectAware:
      run = reject_aware_policy(stream, params);
      break;
    case PolicyKind::Offline:
      break;  // handled above
  }
  return metrics_from_run(run, stream.empty() ? Money(0) : precomputed->total_cost,
                          params);
}

Money offline_reference_cost(PolicyKind kind, std::span<const Transaction> stream,
                             const CostParams& params, const DpCaps& caps) {
  switch (kind) {
    case PolicyKind::AcceptAll: {
      // Single recharge to the whole volume at the start.
      if (stream.empty()) return Money(0);
      return params.onchain_fee + Money(total_amount(stream));
    }
    case PolicyKind::RejectAware: {
      // Reject every big transaction; open for the small ones only when that
      // beats rejecting them too.
      Money big_rejections = 0;
      Money small_rejections = 0;
      Money small_sum = 0;
      for (const auto& tx : stream) {
        Money reject = rejection_cost(params, Money(tx.amount));
        if (is_big_transaction(params, tx.amount)) {
          big_rejections += reject;
        } else {
          small_rejections += reject;
          small_sum += Money(tx.amount);
        }
      }
      Money open_branch = params.onchain_fee + small_sum;
      bool opens = !small_sum.is_zero() && open_branch <= small_rejections;
      return big_rejections + (opens ? open_branch : small_rejections);
    }
    default:
      return stream.empty() ? Money(0) : off_cost(stream, params, caps);
  }
}

std::optional<Rat> policy_competitive_bound(PolicyKind kind, const CostParams& params) {
  switch (kind) {
    case PolicyKind::AcceptAll:
      return Rat(2);
    case PolicyKind::RejectAware:
      // Strictly below 2 + (sqrt(5)-1)/2, so a pass implies the exact bound.
      return Rat(2618033988749894LL, 1000000000000000LL);
    case PolicyKind::Bucketed:
      return Rat(7 + 2 * bucket_level_count(params.cycle_hops));
    default:
      return std::nullopt;
  }
}

namespace {

RunMetrics run_for(PolicyKind kind, std::span<const Transaction> stream,
                   const CostParams& params, const Rat& alpha,
                   const OfflineSolution& solution, const DpCaps& caps) {
  HeuristicParams h{alpha};
  return run_policy(stream, params, kind, h, &solution, caps);
}

}  // namespace

CompareResult compare(const CompareConfig& config) {
  const PolicyKind kinds[] = {PolicyKind::Offline, PolicyKind::Bucketed, PolicyKind::OnI,
                              PolicyKind::OnII};
  struct Cell {
    std::size_t grid = 0;
    std::uint64_t seed = 0;
    std::vector<RawRow> rows;
  };
  std::vector<std::pair<std::int64_t, Rat>> grid;
  for (auto c : config.c_grid)
    for (const auto& f2 : config.f2_grid) grid.emplace_back(c, f2);

  std::vector<Cell> cells(grid.size() * static_cast<std::size_t>(config.runs));
  parallel_for(static_cast<std::int64_t>(cells.size()), config.jobs, [&](std::int64_t i) {
    auto& cell = cells[static_cast<std::size_t>(i)];
    cell.grid = static_cast<std::size_t>(i) / static_cast<std::size_t>(config.runs);
    std::uint64_t offset = static_cast<std::uint64_t>(i) %
                           static_cast<std::uint64_t>(config.runs);
    cell.seed = config.seed_base + offset;
    const auto& [c, f2] = grid[cell.grid];
    CostParams params{config.fee_rate, config.onchain_fee, f2, c};
    auto stream =
        sample_stream({config.sigma, config.p_ltr, config.length, cell.seed});
    auto solution = dp_solve(stream, params, config.caps);
    for (auto kind : kinds) {
      RawRow row;
      row.param_c = c;
      row.param_f2 = f2;
      row.policy = std::string(policy_name(kind));
      row.seed = cell.seed;
      row.metrics = run_for(kind, stream, params, config.alpha, solution, config.caps);
      cell.rows.push_back(std::move(row));
    }
  });

  CompareResult result;
  for (const auto& cell : cells)
    result.raw.insert(result.raw.end(), cell.rows.begin(), cell.rows.end());
  result.aggregates = aggregate_rows(result.raw);
  return result;
}

std::vector<AggRow> aggregate_rows(const std::vector<RawRow>& raw) {
  std::vector<AggRow> out;
  auto find = [&out](const RawRow& row) -> AggRow& {
    for (auto& agg : out)
      if (agg.param_c == row.param_c && agg.param_f2 == row.param_f2 &&
          agg.policy == row.policy)
        return agg;
    out.push_back(AggRow{row.param_c, row.param_f2, row.policy, 0, {}});
    return out.back();
  };
  for (const auto& row : raw) {
    auto& agg = find(row);
    agg.runs += 1;
    agg.means.cost += row.metrics.cost;
    agg.means.locked_funds += row.metrics.locked_funds;
    agg.means.accept_rate += row.metrics.accept_rate;
    agg.means.rebalanced += row.metrics.rebalanced;
    agg.means.recharges += Rat(row.metrics.recharges);
    agg.means.off_cost += row.metrics.off_cost;
  }
  for (auto& agg : out) {
    Rat n(agg.runs);
    agg.means.cost /= n;
    agg.means.locked_funds /= n;
    agg.means.accept_rate /= n;
    agg.means.rebalanced /= n;
    agg.means.recharges /= n;
    agg.means.off_cost /= n;
    agg.means.cost_over_off =
        agg.means.off_cost.is_zero() ? Rat(0) : agg.means.cost / agg.means.off_cost;
  }
  return out;
}

std::vector<SweepRow> sweep(const SweepSpec& spec) {
  if (spec.grid.empty()) throw UnsupportedParams("sweep grid must be nonempty");
  for (std::size_t i = 1; i < spec.grid.size(); ++i)
    if (!(spec.grid[i - 1] < spec.grid[i]))
      throw UnsupportedParams("sweep grid must be strictly increasing");

  struct Cell {
    std::vector<Money> costs;  // one per policy
  };
  std::vector<Cell> cells(spec.grid.size() * static_cast<std::size_t>(spec.runs));
  parallel_for(static_cast<std::int64_t>(cells.size()), spec.jobs, [&](std::int64_t i) {
    std::size_t gi = static_cast<std::size_t>(i) / static_cast<std::size_t>(spec.runs);
    std::uint64_t offset =
        static_cast<std::uint64_t>(i) % static_cast<std::uint64_t>(spec.runs);
    StreamConfig sc{spec.sigma, spec.p_ltr, spec.length, spec.seed_base + offset};
    if (spec.param == SweepParam::Sigma)
      sc.sigma = spec.grid[gi];
    else
      sc.p_ltr = spec.grid[gi];
    auto stream = sample_stream(sc);
    auto solution = dp_solve(stream, spec.params, spec.caps);
    auto& cell = cells[static_cast<std::size_t>(i)];
    for (auto kind : spec.policies)
      cell.costs.push_back(
          run_for(kind, stream, spec.params, spec.alpha, solution, spec.caps).cost);
  });

  std::vector<SweepRow> rows;
  for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
    for (std::size_t pi = 0; pi < spec.policies.size(); ++pi) {
      Rat sum = 0;
      for (std::int64_t r = 0; r < spec.runs; ++r)
        sum += cells[gi * static_cast<std::size_t>(spec.runs) +
                     static_cast<std::size_t>(r)]
                   .costs[pi];
      rows.push_back(SweepRow{spec.grid[gi], std::string(policy_name(spec.policies[pi])),
                              spec.runs, sum / Rat(spec.runs)});
    }
  }
  return rows;
}

CompetitiveCheckResult competitive_check(const CostParams& params,
                                         std::int64_t n_streams, StreamConfig base,
                                         PolicyKind kind,
                                         const HeuristicParams& heuristics,
                                         const DpCaps& caps) {
  CompetitiveCheckResult result;
  auto bound = policy_competitive_bound(kind, params);
  for (std::int64_t i = 0; i < n_streams; ++i) {
    StreamConfig sc = base;
    sc.seed = base.seed + static_cast<std::uint64_t>(i);
    auto stream = sample_stream(sc);
    RunResult run;
    switch (kind) {
      case PolicyKind::AcceptAll: run = accept_all_policy(stream, params); break;
      case PolicyKind::RejectAware: run = reject_aware_policy(stream, params); break;
      case PolicyKind::Bucketed: run = bucketed_policy(stream, params); break;
      case PolicyKind::OnI: run = on_i_policy(stream, params); break;
      case PolicyKind::OnII: run = on_ii_policy(stream, params, heuristics); break;
      case PolicyKind::Offline: throw UnsupportedParams("check an online policy");
    }
    Money reference = offline_reference_cost(kind, stream, params, caps);
    ++result.checked;
    if (reference.is_zero()) continue;
    Rat ratio = run.ledger.total() / reference;
    result.worst_ratio = max(result.worst_ratio, ratio);
    if (bound && ratio > *bound) ++result.bound_violations;
  }
  return result;
}

namespace {

std::string ratio_str(const std::optional<Rat>& ratio) {
  return ratio ? ratio->str() : std::string("NA");
}

std::vector<std::string> split_line(const std::string& line) {
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

Rat parse_rat_field(const std::string& field, std::int64_t lineno) {
  auto value = Rat::parse(field);
  if (!value)
    throw ParseError("line " + std::to_string(lineno) + ": bad value " + field);
  return *value;
}

}  // namespace

void write_raw_csv(const std::vector<RawRow>& rows, std::ostream& os) {
  os << "param_C,param_f2,policy,seed,cost,locked_funds,accept_rate,rebalanced,"
        "recharges,off_cost,ratio\n";
  for (const auto& row : rows) {
    const auto& m = row.metrics;
    os << row.param_c << ',' << row.param_f2.str() << ',' << row.policy << ','
       << row.seed << ',' << m.cost.str() << ',' << m.locked_funds.str() << ','
       << m.accept_rate.str() << ',' << m.rebalanced.str() << ',' << m.recharges << ','
       << m.off_cost.str() << ',' << ratio_str(m.ratio) << '\n';
  }
}

std::vector<RawRow> read_raw_csv(std::istream& is) {
  std::vector<RawRow> rows;
  std::string line;
  std::int64_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (!header) {
      header = true;
      continue;
    }
    auto f = split_line(line);
    if (f.size() != 11)
      throw ParseError("line " + std::to_string(lineno) + ": expected 11 fields");
    RawRow row;
    row.param_c = parse_rat_field(f[0], lineno).floor64();
    row.param_f2 = parse_rat_field(f[1], lineno);
    row.policy = f[2];
    row.seed = static_cast<std::uint64_t>(parse_rat_field(f[3], lineno).floor64());
    row.metrics.cost = parse_rat_field(f[4], lineno);
    row.metrics.locked_funds = parse_rat_field(f[5], lineno);
    row.metrics.accept_rate = parse_rat_field(f[6], lineno);
    row.metrics.rebalanced = parse_rat_field(f[7], lineno);
    row.metrics.recharges = parse_rat_field(f[8], lineno).floor64();
    row.metrics.off_cost = parse_rat_field(f[9], lineno);
    if (f[10] != "NA") row.metrics.ratio = parse_rat_field(f[10], lineno);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_agg_csv(const std::vector<AggRow>& rows, std::ostream& os) {
  os << "param_C,param_f2,policy,runs,mean_cost,mean_locked_funds,mean_accept_rate,"
        "mean_rebalanced,mean_recharges,mean_off_cost,mean_cost_over_mean_off\n";
  for (const auto& row : rows) {
    const auto& m = row.means;
    os << row.param_c << ',' << row.param_f2.str() << ',' << row.policy << ','
       << row.runs << ',' << m.cost.str() << ',' << m.locked_funds.str() << ','
       << m.accept_rate.str() << ',' << m.rebalanced.str() << ',' << m.recharges.str()
       << ',' << m.off_cost.str() << ',' << m.cost_over_off.str() << '\n';
  }
}

void write_sweep_csv(SweepParam param, const std::vector<SweepRow>& rows,
                     std::ostream& os) {
  os << (param == SweepParam::Sigma ? "sigma" : "p") << ",policy,runs,mean_cost\n";
  for (const auto& row : rows)
    os << row.value << ',' << row.policy << ',' << row.runs << ','
       << row.mean_cost.str() << '\n';
}

Rat spearman_against_order(const std::vector<Rat>& values) {
  const std::int64_t n = static_cast<std::int64_t>(values.size());
  if (n < 2) throw UnsupportedParams("need at least two values");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  // Average ranks over ties keep the statistic exact.
  std::vector<Rat> rank(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    Rat avg = Rat(static_cast<std::int64_t>(i + j) + 2, 2);  // ranks are 1-based
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  Rat d2 = 0;
  for (std::size_t k = 0; k < rank.size(); ++k) {
    Rat d = rank[k] - Rat(static_cast<std::int64_t>(k) + 1);
    d2 += d * d;
  }
  return Rat(1) - Rat(6) * d2 / Rat(n * (n * n - 1));
}

}  // namespace chanlab
