// Command-line front end: single runs, policy comparisons, fleet-size search
// and distance summaries.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ridepool/experiment.hpp"
#include "ridepool/sim.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& policy, std::uint64_t seed,
                bool seed_set, const std::string& mode, const std::string& out_path,
                const std::string& checkpoint_in, const std::string& checkpoint_out, int horizon) {
  using namespace ridepool;
  SimConfig cfg = load_config_file(config_path);
  if (!policy.empty()) cfg.policy = parse_policy(policy);
  if (seed_set) cfg.seed = seed;
  if (horizon >= 0) cfg.horizon = horizon;
  cfg.validate();

  const RunMode run_mode = mode == "eval" ? RunMode::Eval : RunMode::Train;
  Learners learners = checkpoint_in.empty() ? fresh_learners(cfg) : load_checkpoint(checkpoint_in);
  if (run_mode == RunMode::Eval && checkpoint_in.empty()) {
    std::cerr << "warning: eval mode without --checkpoint-in uses untrained learners\n";
  }

  const auto net = scenario_network(cfg);
  const auto result = run(cfg, net, scenario_demand(cfg, *net), std::move(learners), run_mode);

  if (out_path.empty() || out_path == "-") {
    write_metrics_csv(std::cout, result.metrics);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    write_metrics_csv(out, result.metrics);
  }
  if (!checkpoint_out.empty()) save_checkpoint(checkpoint_out, result.learners);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ride-pooling pricing and matching simulator"};
  app.require_subcommand(1);

  std::string config_path, policy, mode = "train", out_path, ckpt_in, ckpt_out;
  std::uint64_t seed = 0;
  int horizon = -1;
  auto* run_cmd = app.add_subcommand("run", "Simulate one policy and write per-epoch metrics");
  run_cmd->add_option("--config", config_path, "Scenario config (key = value)")->required();
  run_cmd->add_option("--policy", policy, "Approach code, e.g. M&N-E");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Root random seed");
  run_cmd->add_option("--mode", mode, "train or eval")->check(CLI::IsMember({"train", "eval"}));
  run_cmd->add_option("--out", out_path, "Metrics CSV path (default stdout)");
  run_cmd->add_option("--checkpoint-in", ckpt_in, "Learner checkpoint prefix to start from");
  run_cmd->add_option("--checkpoint-out", ckpt_out, "Write final learners to this prefix");
  run_cmd->add_option("--horizon", horizon, "Override the number of epochs");

  std::string spec_path, compare_out;
  auto* compare_cmd = app.add_subcommand("compare", "Mean revenue per policy vs F&N-E");
  compare_cmd->add_option("--spec", spec_path, "Experiment spec")->required();
  compare_cmd->add_option("--out", compare_out, "Write the table to a CSV file");

  std::string fleet_spec;
  double target = 0.0;
  bool frozen = false;
  auto* fleet_cmd = app.add_subcommand("fleet-search", "Smallest fleet reaching a revenue target");
  fleet_cmd->add_option("--spec", fleet_spec, "Experiment spec")->required();
  fleet_cmd->add_option("--target", target, "Target mean evaluation revenue")->required();
  fleet_cmd->add_flag("--frozen", frozen,
                      "Train once at the configured fleet size and reuse the learners");

  std::vector<std::string> inputs;
  int fleet = 0;
  double epoch_seconds = 60.0;
  auto* dist_cmd = app.add_subcommand("distance", "Mean km per vehicle per hour");
  dist_cmd->add_option("--in", inputs, "Metrics CSV files")->required()->expected(1, -1);
  dist_cmd->add_option("--fleet", fleet, "Fleet size of the runs")->required();
  dist_cmd->add_option("--epoch-seconds", epoch_seconds, "Epoch length in seconds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      return run_command(config_path, policy, seed, seed_opt->count() > 0, mode, out_path, ckpt_in,
                         ckpt_out, horizon);
    }
    if (*compare_cmd) {
      const auto table = ridepool::compare(ridepool::load_experiment_file(spec_path));
      ridepool::write_compare_table(std::cout, table);
      if (!compare_out.empty()) {
        std::ofstream out(compare_out);
        ridepool::write_compare_table(out, table);
      }
      return 0;
    }
    if (*fleet_cmd) {
      auto spec = ridepool::load_experiment_file(fleet_spec);
      spec.frozen = spec.frozen || frozen;
      std::cout << "policy,min_fleet\n";
      for (const auto& [p, n] : ridepool::fleet_search(spec, target)) {
        std::cout << p << ',' << n << '\n';
      }
      return 0;
    }
    if (*dist_cmd) {
      std::vector<std::vector<ridepool::EpochMetrics>> streams;
      for (const auto& path : inputs) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        streams.push_back(ridepool::read_metrics_csv(in));
      }
      std::printf("%.2f\n", ridepool::distance_report(streams, fleet, epoch_seconds));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
