#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chanlab/core.hpp"
#include "chanlab/experiments.hpp"
#include "chanlab/generators.hpp"
#include "chanlab/netgraph.hpp"
#include "chanlab/offline.hpp"
#include "chanlab/policies.hpp"

namespace {

using namespace chanlab;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;
constexpr int kExitIo = 4;

Rat parse_rat_flag(const std::string& text, const std::string& flag) {
  auto value = Rat::parse(text);
  if (!value) throw ParseError("bad value for " + flag + ": " + text);
  return *value;
}

struct CostFlags {
  std::string fee_rate = "0";
  std::string onchain_fee = "3";
  std::string base_fee = "2";
  std::int64_t cycle_hops = 2;

  void attach(CLI::App* cmd) {
    cmd->add_option("--R", fee_rate, "per-coin fee rate R (exact rational)");
    cmd->add_option("--f1", onchain_fee, "on-chain recharge fee f1");
    cmd->add_option("--f2", base_fee, "base forwarding fee f2");
    cmd->add_option("--C", cycle_hops, "rebalancing cycle length minus one");
  }

  CostParams to_params() const {
    CostParams params{parse_rat_flag(fee_rate, "--R"), parse_rat_flag(onchain_fee, "--f1"),
                      parse_rat_flag(base_fee, "--f2"), cycle_hops};
    params.validate();
    return params;
  }
};

struct StreamFlags {
  double sigma = 3.0;
  double p_ltr = 0.5;
  std::int64_t length = 50;
  std::int64_t runs = 50;
  std::uint64_t seed = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--sigma", sigma, "folded normal standard deviation");
    cmd->add_option("--p", p_ltr, "probability of a left-to-right transaction");
    cmd->add_option("--length", length, "transactions per stream");
    cmd->add_option("--runs", runs, "number of generated streams");
    cmd->add_option("--seed", seed, "base seed; run i uses seed+i");
  }
};

struct DpFlags {
  std::int64_t max_funds = 2000;
  std::int64_t max_transactions = 200;

  void attach(CLI::App* cmd) {
    cmd->add_option("--dp-max-funds", max_funds, "DP state budget for total funds");
    cmd->add_option("--dp-max-transactions", max_transactions,
                    "DP budget for stream length");
  }

  DpCaps caps() const { return {max_funds, max_transactions}; }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

TransactionStream stream_from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open stream file " + path);
  return read_stream_csv(in);
}

std::string agg_path_for(const std::string& path) {
  std::string stem = path;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv")
    stem.resize(stem.size() - 4);
  return stem + ".agg.csv";
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    double start = 0;
    double stop = 0;
    double step = 0;
    char c1 = 0;
    char c2 = 0;
    std::istringstream in(text);
    if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' ||
        step <= 0)
      throw ParseError("bad grid " + text + " (want start:stop:step)");
    for (int i = 0;; ++i) {
      double v = start + i * step;
      if (v > stop + step / 2) break;
      grid.push_back(v);
    }
  } else {
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ','))
      if (!part.empty()) grid.push_back(std::stod(part));
  }
  if (grid.empty()) throw ParseError("empty grid " + text);
  return grid;
}

int cmd_simulate(const CostFlags& costs, const StreamFlags& streams, const DpFlags& dp,
                 const std::string& policy_token, const std::string& alpha_text,
                 const std::string& stream_file, const std::string& out_dir, int jobs) {
  auto params = costs.to_params();
  auto kind = policy_from_string(policy_token);
  if (!kind) throw ParseError("unknown policy " + policy_token);
  HeuristicParams heuristics{parse_rat_flag(alpha_text, "--alpha")};
  (void)jobs;

  std::vector<RawRow> rows;
  std::vector<TraceEvent> trace;
  bool single = false;
  if (!stream_file.empty()) {
    auto stream = stream_from_file(stream_file);
    auto metrics = run_policy(stream, params, *kind, heuristics, nullptr, dp.caps());
    rows.push_back({params.cycle_hops, params.base_fee, std::string(policy_name(*kind)),
                    0, metrics});
    if (*kind != PolicyKind::Offline) {
      auto sol = dp_solve(stream, params, dp.caps());
      RunResult run;
      switch (*kind) {
        case PolicyKind::Bucketed: run = bucketed_policy(stream, params, sol.prefix_funds); break;
        case PolicyKind::OnI: run = on_i_policy(stream, params, sol.prefix_funds); break;
        case PolicyKind::OnII: run = on_ii_policy(stream, params, heuristics, sol.prefix_funds); break;
        case PolicyKind::AcceptAll: run = accept_all_policy(stream, params); break;
        case PolicyKind::RejectAware: run = reject_aware_policy(stream, params); break;
        default: break;
      }
      trace = std::move(run.trace);
      single = true;
    }
  } else {
    for (std::int64_t i = 0; i < streams.runs; ++i) {
      std::uint64_t seed = streams.seed + static_cast<std::uint64_t>(i);
      auto stream = sample_stream({streams.sigma, streams.p_ltr, streams.length, seed});
      auto metrics = run_policy(stream, params, *kind, heuristics, nullptr, dp.caps());
      rows.push_back({params.cycle_hops, params.base_fee,
                      std::string(policy_name(*kind)), seed, metrics});
    }
  }

  auto metrics_out = open_output(out_dir + "/metrics.csv");
  write_raw_csv(rows, metrics_out);
  if (single) {
    auto trace_out = open_output(out_dir + "/trace.jsonl");
    for (const auto& ev : trace) trace_out << trace_event_to_json(ev) << '\n';
  }
  return kExitOk;
}

int cmd_compare(const CostFlags& costs, const StreamFlags& streams, const DpFlags& dp,
                const std::string& grid_text, const std::string& alpha_text,
                const std::string& output, int jobs) {
  CompareConfig config;
  config.onchain_fee = parse_rat_flag(costs.onchain_fee, "--f1");
  config.fee_rate = parse_rat_flag(costs.fee_rate, "--R");
  config.sigma = streams.sigma;
  config.p_ltr = streams.p_ltr;
  config.length = streams.length;
  config.runs = streams.runs;
  config.seed_base = streams.seed;
  config.alpha = parse_rat_flag(alpha_text, "--alpha");
  config.jobs = jobs;
  config.caps = dp.caps();

  if (!grid_text.empty()) {
    // e.g. "C=2,8:f2=0.5,2"
    config.c_grid.clear();
    config.f2_grid.clear();
    std::istringstream in(grid_text);
    std::string part;
    while (std::getline(in, part, ':')) {
      auto eq = part.find('=');
      if (eq == std::string::npos) throw ParseError("bad grid part " + part);
      std::string key = part.substr(0, eq);
      std::istringstream values(part.substr(eq + 1));
      std::string v;
      while (std::getline(values, v, ',')) {
        if (key == "C")
          config.c_grid.push_back(parse_rat_flag(v, "--grid C").floor64());
        else if (key == "f2")
          config.f2_grid.push_back(parse_rat_flag(v, "--grid f2"));
        else
          throw ParseError("unknown grid key " + key);
      }
    }
    if (config.c_grid.empty() || config.f2_grid.empty())
      throw ParseError("grid must set both C and f2");
  }

  auto result = compare(config);
  auto raw_out = open_output(output);
  write_raw_csv(result.raw, raw_out);
  auto agg_out = open_output(agg_path_for(output));
  write_agg_csv(result.aggregates, agg_out);
  return kExitOk;
}

int cmd_sweep(const CostFlags& costs, const StreamFlags& streams, const DpFlags& dp,
              const std::string& param_token, const std::string& grid_text,
              const std::string& alpha_text, const std::string& output, int jobs) {
  SweepSpec spec;
  if (param_token == "sigma") {
    spec.param = SweepParam::Sigma;
    spec.grid = parse_grid(grid_text.empty() ? "3:20:2" : grid_text);
  } else if (param_token == "p") {
    spec.param = SweepParam::PLtr;
    spec.grid = parse_grid(grid_text.empty() ? "0.1:0.9:0.1" : grid_text);
  } else {
    throw ParseError("unknown sweep parameter " + param_token);
  }
  spec.params = costs.to_params();
  spec.sigma = streams.sigma;
  spec.p_ltr = streams.p_ltr;
  spec.length = streams.length;
  spec.runs = streams.runs;
  spec.seed_base = streams.seed;
  spec.alpha = parse_rat_flag(alpha_text, "--alpha");
  spec.jobs = jobs;
  spec.caps = dp.caps();

  auto rows = sweep(spec);
  auto out = open_output(output);
  write_sweep_csv(spec.param, rows, out);
  return kExitOk;
}

int cmd_adversary(const std::string& variant, std::int64_t amount, std::int64_t c,
                  std::int64_t cycle_hops, const std::string& f1_text,
                  std::int64_t epsilon, std::int64_t length, const std::string& output) {
  TransactionStream stream;
  if (variant == "epoch") {
    stream = adversary_epoch_stream(amount, c, cycle_hops);
  } else if (variant == "epsilon") {
    stream = adversary_epsilon_stream(parse_rat_flag(f1_text, "--f1"), epsilon, length);
  } else {
    throw ParseError("unknown adversary variant " + variant);
  }
  if (output.empty()) {
    write_stream_csv(stream, std::cout);
  } else {
    auto out = open_output(output);
    write_stream_csv(stream, out);
  }
  return kExitOk;
}

int cmd_cycles(const std::string& input, const std::string& output, int jobs) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw ParseError("cannot open edge list " + input);
  auto graph = load_edge_list(in);
  auto histogram = cycle_histogram(graph, jobs);
  if (graph.self_loops_dropped > 0)
    std::cerr << "warning: dropped " << graph.self_loops_dropped << " self-loops\n";
  if (output.empty()) {
    write_cycle_csv(histogram, std::cout);
  } else {
    auto out = open_output(output);
    write_cycle_csv(histogram, out);
  }
  return kExitOk;
}

int cmd_dp_exact(const CostFlags& costs, const DpFlags& dp, const std::string& stream_file,
                 const std::string& output) {
  auto params = costs.to_params();
  auto stream = stream_from_file(stream_file);
  auto solution = dp_solve(stream, params, dp.caps());

  nlohmann::ordered_json j;
  j["cost"] = solution.total_cost.str();
  j["f_left"] = solution.funds_left;
  j["f_right"] = solution.funds_right;
  j["opened"] = solution.opened;
  auto& decisions = j["decisions"] = nlohmann::ordered_json::array();
  std::int64_t i = 0;
  for (const auto& d : solution.decisions) {
    nlohmann::ordered_json entry;
    entry["i"] = ++i;
    switch (d.action) {
      case OfflineAction::Reject: entry["action"] = "reject"; break;
      case OfflineAction::Accept: entry["action"] = "accept"; break;
      case OfflineAction::RebalanceThenAccept:
        entry["action"] = "rebalance";
        entry["amount"] = d.rebalance_amount;
        break;
    }
    decisions.push_back(std::move(entry));
  }
  if (output.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    auto out = open_output(output);
    out << j.dump(2) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Payment-channel admission control and rebalancing laboratory"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat TOML config file (flag = value)");

  CostFlags costs;
  StreamFlags streams;
  DpFlags dp;
  int jobs = 1;
  app.add_option("--jobs", jobs, "worker threads for seed-parallel runs")
      ->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "run one policy over streams");
  std::string policy_token = "on";
  std::string alpha_text = "2";
  std::string stream_file;
  std::string out_dir = ".";
  costs.attach(simulate);
  streams.attach(simulate);
  dp.attach(simulate);
  simulate->add_option("--policy", policy_token,
                       "accept-all|reject-aware|on|on-i|on-ii|off");
  simulate->add_option("--alpha", alpha_text, "recharge laxity for on-ii");
  simulate->add_option("--stream-file", stream_file, "run on this CSV stream instead");
  simulate->add_option("--out-dir", out_dir, "directory for metrics.csv / trace.jsonl");

  auto* cmp = app.add_subcommand("compare", "OFF vs ON vs ON-I vs ON-II table");
  std::string grid_text;
  std::string compare_out = "compare.csv";
  costs.attach(cmp);
  streams.attach(cmp);
  dp.attach(cmp);
  cmp->add_option("--grid", grid_text, "grid like C=2,8:f2=0.5,2");
  cmp->add_option("--alpha", alpha_text, "recharge laxity for on-ii");
  cmp->add_option("--output", compare_out, "raw CSV path (.agg.csv written alongside)");

  auto* swp = app.add_subcommand("sweep", "mean cost over a sigma or p grid");
  std::string sweep_param = "sigma";
  std::string sweep_grid;
  std::string sweep_out = "sweep.csv";
  CostFlags sweep_costs;
  sweep_costs.cycle_hops = 4;  // the sweep figures use C = 4
  StreamFlags sweep_streams;
  sweep_costs.attach(swp);
  sweep_streams.attach(swp);
  dp.attach(swp);
  swp->add_option("--param", sweep_param, "sigma or p");
  swp->add_option("--grid", sweep_grid, "start:stop:step or comma list");
  swp->add_option("--alpha", alpha_text, "recharge laxity for on-ii");
  swp->add_option("--output", sweep_out, "output CSV path");

  auto* adv = app.add_subcommand("adversary", "emit a lower-bound stream");
  std::string variant = "epoch";
  std::int64_t adv_amount = 8;
  std::int64_t adv_c = 1;
  std::int64_t adv_cycle = 4;
  std::int64_t adv_epsilon = 3;
  std::int64_t adv_length = 50;
  std::string adv_f1 = "3";
  std::string adv_out;
  adv->add_option("--variant", variant, "epoch or epsilon");
  adv->add_option("--amount", adv_amount, "epoch amount A");
  adv->add_option("--c", adv_c, "epoch phase growth c");
  adv->add_option("--C", adv_cycle, "cycle length minus one");
  adv->add_option("--f1", adv_f1, "onchain fee (context for the epsilon stream)");
  adv->add_option("--epsilon", adv_epsilon, "epsilon in money units (multiple of 3)");
  adv->add_option("--length", adv_length, "epsilon stream length");
  adv->add_option("--output", adv_out, "output CSV path (stdout by default)");

  auto* cyc = app.add_subcommand("cycles", "shortest rebalancing cycle histogram");
  std::string cycles_in;
  std::string cycles_out;
  cyc->add_option("--input", cycles_in, "edge list CSV")->required();
  cyc->add_option("--output", cycles_out, "output CSV path (stdout by default)");

  auto* dpe = app.add_subcommand("dp-exact", "exact offline solution as JSON");
  std::string dp_stream;
  std::string dp_out;
  CostFlags dp_costs;
  dp_costs.base_fee = "2";
  dp_costs.attach(dpe);
  dp.attach(dpe);
  dpe->add_option("--stream-file", dp_stream, "input stream CSV")->required();
  dpe->add_option("--output", dp_out, "output path (stdout by default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed())
      return cmd_simulate(costs, streams, dp, policy_token, alpha_text, stream_file,
                          out_dir, jobs);
    if (cmp->parsed())
      return cmd_compare(costs, streams, dp, grid_text, alpha_text, compare_out, jobs);
    if (swp->parsed())
      return cmd_sweep(sweep_costs, sweep_streams, dp, sweep_param, sweep_grid,
                       alpha_text, sweep_out, jobs);
    if (adv->parsed())
      return cmd_adversary(variant, adv_amount, adv_c, adv_cycle, adv_f1, adv_epsilon,
                           adv_length, adv_out);
    if (cyc->parsed()) return cmd_cycles(cycles_in, cycles_out, jobs);
    if (dpe->parsed()) return cmd_dp_exact(dp_costs, dp, dp_stream, dp_out);
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBudget;
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBudget;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
