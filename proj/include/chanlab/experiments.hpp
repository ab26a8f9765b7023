#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chanlab/core.hpp"
#include "chanlab/generators.hpp"
#include "chanlab/offline.hpp"
#include "chanlab/policies.hpp"

namespace chanlab {

enum class PolicyKind { Offline, Bucketed, OnI, OnII, AcceptAll, RejectAware };

std::string_view policy_name(PolicyKind kind);  // "OFF", "ON", "ON-I", ...
std::optional<PolicyKind> policy_from_string(std::string_view token);

struct RunMetrics {
  Money cost;
  Money locked_funds;  // total funds recharged into the channel, A(X)
  Rat accept_rate;     // accepted / (accepted + rejected), 0 for empty runs
  Money rebalanced;
  std::int64_t recharges = 0;
  Money off_cost;
  std::optional<Rat> ratio;  // cost / off_cost, absent when off_cost = 0
};

RunMetrics metrics_from_run(const RunResult& run, Money off_cost_value,
                            const CostParams& params);
RunMetrics metrics_from_offline(const OfflineSolution& solution,
                                std::span<const Transaction> stream,
                                const CostParams& params);

// Runs one policy on one stream. `precomputed` may carry the stream's DP
// solution to avoid re-solving; otherwise it is computed here.
RunMetrics run_policy(std::span<const Transaction> stream, const CostParams& params,
                      PolicyKind kind, const HeuristicParams& heuristics = {},
                      const OfflineSolution* precomputed = nullptr,
                      const DpCaps& caps = {});

// The offline benchmark each policy's competitive bound is stated against:
// the closed-form strategies for the unidirectional policies, the DP optimum
// for the bidirectional ones.
Money offline_reference_cost(PolicyKind kind, std::span<const Transaction> stream,
                             const CostParams& params, const DpCaps& caps = {});

std::optional<Rat> policy_competitive_bound(PolicyKind kind, const CostParams& params);

struct RawRow {
  std::int64_t param_c = 0;
  Rat param_f2;
  std::string policy;
  std::uint64_t seed = 0;
  RunMetrics metrics;
};

// Means are exact; `cost_over_off` is mean_cost / mean_off_cost (the exact
// mean of per-run ratios would accumulate unrelated denominators past what
// 128-bit rationals can hold).
struct MetricMeans {
  Rat cost, locked_funds, accept_rate, rebalanced, recharges, off_cost, cost_over_off;
};

struct AggRow {
  std::int64_t param_c = 0;
  Rat param_f2;
  std::string policy;
  std::int64_t runs = 0;
  MetricMeans means;
};

struct CompareConfig {
  std::vector<std::int64_t> c_grid{2, 8};
  std::vector<Rat> f2_grid{Rat(1, 2), Rat(2)};
  Money onchain_fee{3};
  Rat fee_rate{0};
  double sigma = 3.0;
  double p_ltr = 0.5;
  std::int64_t length = 50;
  std::int64_t runs = 50;
  std::uint64_t seed_base = 1;
  Rat alpha{2};
  int jobs = 1;
  DpCaps caps;
};

struct CompareResult {
  std::vector<RawRow> raw;
  std::vector<AggRow> aggregates;
};

// The OFF / ON / ON-I / ON-II comparison over the (C, f2) grid.
CompareResult compare(const CompareConfig& config);

std::vector<AggRow> aggregate_rows(const std::vector<RawRow>& raw);

enum class SweepParam { Sigma, PLtr };

struct SweepSpec {
  SweepParam param = SweepParam::Sigma;
  std::vector<double> grid;
  CostParams params{Rat(0), Money(3), Money(2), 4};
  double sigma = 3.0;
  double p_ltr = 0.5;
  std::int64_t length = 50;
  std::int64_t runs = 50;
  std::uint64_t seed_base = 1;
  Rat alpha{2};
  std::vector<PolicyKind> policies{PolicyKind::Offline, PolicyKind::Bucketed,
                                   PolicyKind::OnI, PolicyKind::OnII};
  int jobs = 1;
  DpCaps caps;
};

struct SweepRow {
  double value = 0;
  std::string policy;
  std::int64_t runs = 0;
  Rat mean_cost;
};

std::vector<SweepRow> sweep(const SweepSpec& spec);

struct CompetitiveCheckResult {
  Rat worst_ratio;   // max cost / reference over streams with reference > 0
  std::int64_t checked = 0;
  std::int64_t bound_violations = 0;
};

CompetitiveCheckResult competitive_check(const CostParams& params,
                                         std::int64_t n_streams, StreamConfig base,
                                         PolicyKind kind,
                                         const HeuristicParams& heuristics = {},
                                         const DpCaps& caps = {});

// CSV surface. Raw columns:
// param_C,param_f2,policy,seed,cost,locked_funds,accept_rate,rebalanced,
// recharges,off_cost,ratio — exact values, `NA` for an undefined ratio.
void write_raw_csv(const std::vector<RawRow>& rows, std::ostream& os);
std::vector<RawRow> read_raw_csv(std::istream& is);
void write_agg_csv(const std::vector<AggRow>& rows, std::ostream& os);
void write_sweep_csv(SweepParam param, const std::vector<SweepRow>& rows,
                     std::ostream& os);

// Spearman rank correlation of `values` against their index order (the grid
// is strictly increasing); exact while ranks are unique.
Rat spearman_against_order(const std::vector<Rat>& values);

}  // namespace chanlab
