#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ridepool/config.hpp"
#include "ridepool/sim.hpp"

namespace ridepool {

inline constexpr const char* kBaselinePolicy = "F&N-E";

/// What to run: a scenario, the approaches to compare and the seeds.
struct ExperimentSpec {
  SimConfig base;
  std::vector<std::string> policies{"M&N-E", "F&N-E", "F&IR"};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int train_epochs = 600;
  int eval_epochs = 120;
  bool train = true;
  /// Learner checkpoint prefix; required when `train` is false.
  std::string checkpoint;
  int min_fleet = 1;
  int max_fleet = 200;
  bool frozen = false;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
};

/// `key = value` spec. Recognized keys: config, policies, seeds,
/// train_epochs, eval_epochs, train, checkpoint, min_fleet, max_fleet,
/// frozen, threads. Every other key is applied to the scenario config.
ExperimentSpec parse_experiment(std::istream& in);
ExperimentSpec load_experiment_file(const std::string& path);

/// Evaluation revenue of one (policy, seed) pair.
using RevenueFn = std::function<double(const std::string& policy, std::uint64_t seed)>;

struct CompareRow {
  std::string policy;
  std::vector<double> revenues;  // one per seed
  double mean = 0.0;
  double stddev = 0.0;
  double delta_pct = 0.0;  // relative to the baseline mean
};

struct CompareTable {
  std::vector<CompareRow> rows;
};

double percent_delta(double value, double baseline);

/// Mean and sample standard deviation (0 for a single value).
std::pair<double, double> mean_std(const std::vector<double>& xs);

/// Runs every policy on every seed via `revenue` and reports means with the
/// percentage change against F&N-E (added when not listed).
CompareTable compare(const std::vector<std::string>& policies,
                     const std::vector<std::uint64_t>& seeds, const RevenueFn& revenue,
                     int threads = 1);
CompareTable compare(const ExperimentSpec& spec);

void write_compare_table(std::ostream& out, const CompareTable& table);

/// Smallest fleet size in [lo, hi] whose revenue reaches `target`, by
/// bisection. Throws std::runtime_error when even `hi` falls short.
int fleet_search(int lo, int hi, double target, const std::function<double(int)>& revenue_at);
/// Per policy in the spec: minimal fleet reaching `target` mean revenue.
std::vector<std::pair<std::string, int>> fleet_search(const ExperimentSpec& spec, double target);

/// Train-then-evaluate revenue for one policy and seed under the spec.
double evaluate_revenue(const ExperimentSpec& spec, const std::string& policy,
                        std::uint64_t seed, const std::optional<Learners>& preset = std::nullopt);

/// Mean kilometers per vehicle per hour over metric streams.
double distance_report(const std::vector<std::vector<EpochMetrics>>& streams, int fleet_size,
                       double epoch_seconds);

}  // namespace ridepool
