#include "ridepool/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ridepool {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(' ');
    const auto last = item.find_last_not_of(' ');
    if (first != std::string::npos) out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("experiment key `" + key + "`: expected true/false");
}

// Fixed offset keeps evaluation demand disjoint from the training stream.
constexpr std::uint64_t kEvalSeedOffset = 1000003;

}  // namespace

void ExperimentSpec::validate() const {
  base.validate();
  if (seeds.empty()) throw std::invalid_argument("experiment: at least one seed required");
  if (policies.empty()) throw std::invalid_argument("experiment: at least one policy required");
  for (const auto& p : policies) parse_policy(p);
  if (train_epochs < 0 || eval_epochs < 1) {
    throw std::invalid_argument("experiment: train_epochs >= 0 and eval_epochs >= 1 required");
  }
  if (min_fleet < 1 || max_fleet < min_fleet) {
    throw std::invalid_argument("experiment: need 1 <= min_fleet <= max_fleet");
  }
}

ExperimentSpec parse_experiment(std::istream& in) {
  ExperimentSpec spec;
  std::vector<std::size_t> lines;
  const auto pairs = read_key_values(in, &lines);
  // The scenario file goes first so inline keys can override it.
  for (const auto& [key, value] : pairs) {
    if (key == "config") spec.base = load_config_file(value);
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [key, value] = pairs[i];
    if (key == "config") continue;
    try {
    if (key == "policies") spec.policies = split_list(value);
    else if (key == "seeds") {
      spec.seeds.clear();
      for (const auto& s : split_list(value)) spec.seeds.push_back(std::stoull(s));
    }
    else if (key == "train_epochs") spec.train_epochs = std::stoi(value);
    else if (key == "eval_epochs") spec.eval_epochs = std::stoi(value);
    else if (key == "train") spec.train = parse_bool(key, value);
    else if (key == "checkpoint") spec.checkpoint = value;
    else if (key == "min_fleet") spec.min_fleet = std::stoi(value);
    else if (key == "max_fleet") spec.max_fleet = std::stoi(value);
    else if (key == "frozen") spec.frozen = parse_bool(key, value);
    else if (key == "threads") spec.threads = std::stoi(value);
    else apply_config_value(spec.base, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lines[i]) + ": " + e.what());
    }
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open experiment spec " + path);
  try {
    return parse_experiment(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

double percent_delta(double value, double baseline) {
  if (baseline == 0.0) throw std::domain_error("percent_delta: baseline revenue is zero");
  return (value - baseline) / baseline * 100.0;
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

CompareTable compare(const std::vector<std::string>& policies,
                     const std::vector<std::uint64_t>& seeds, const RevenueFn& revenue,
                     int threads) {
  if (seeds.empty()) throw std::invalid_argument("compare: at least one seed required");
  auto list = policies;
  if (std::find(list.begin(), list.end(), kBaselinePolicy) == list.end()) {
    list.push_back(kBaselinePolicy);
  }

  const std::size_t jobs = list.size() * seeds.size();
  std::vector<double> results(jobs, 0.0);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      try {
        results[j] = revenue(list[j / seeds.size()], seeds[j % seeds.size()]);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::max(1, threads));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(n_threads, jobs); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  CompareTable table;
  for (std::size_t p = 0; p < list.size(); ++p) {
    CompareRow row;
    row.policy = list[p];
    row.revenues.assign(results.begin() + static_cast<std::ptrdiff_t>(p * seeds.size()),
                        results.begin() + static_cast<std::ptrdiff_t>((p + 1) * seeds.size()));
    std::tie(row.mean, row.stddev) = mean_std(row.revenues);
    table.rows.push_back(std::move(row));
  }
  const auto base = std::find_if(table.rows.begin(), table.rows.end(),
                                 [](const CompareRow& r) { return r.policy == kBaselinePolicy; });
  for (auto& row : table.rows) row.delta_pct = percent_delta(row.mean, base->mean);
  return table;
}

double evaluate_revenue(const ExperimentSpec& spec, const std::string& policy,
                        std::uint64_t seed, const std::optional<Learners>& preset) {
  SimConfig cfg = spec.base;
  cfg.policy = parse_policy(policy);
  cfg.seed = seed;
  const auto net = scenario_network(cfg);

  Learners learners = preset ? *preset : fresh_learners(cfg);
  if (!preset) {
    if (spec.train) {
      cfg.horizon = spec.train_epochs;
      learners = run(cfg, net, scenario_demand(cfg, *net), std::move(learners), RunMode::Train).learners;
    } else {
      if (spec.checkpoint.empty()) {
        throw std::invalid_argument("training disabled but no checkpoint given");
      }
      learners = load_checkpoint(spec.checkpoint);
    }
  }
  cfg.seed = seed + kEvalSeedOffset;
  cfg.horizon = spec.eval_epochs;
  const auto result = run(cfg, net, scenario_demand(cfg, *net), std::move(learners), RunMode::Eval);
  double total = 0.0;
  for (const auto& m : result.metrics) total += m.revenue;
  return total;
}

CompareTable compare(const ExperimentSpec& spec) {
  spec.validate();
  const int threads =
      spec.threads > 0 ? spec.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return compare(
      spec.policies, spec.seeds,
      [&spec](const std::string& policy, std::uint64_t seed) {
        return evaluate_revenue(spec, policy, seed);
      },
      threads);
}

void write_compare_table(std::ostream& out, const CompareTable& table) {
  out << "policy,mean_revenue,std_revenue,delta_pct\n";
  char buf[256];
  for (const auto& row : table.rows) {
    std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f,%.2f\n", row.policy.c_str(), row.mean,
                  row.stddev, row.delta_pct);
    out << buf;
  }
}

int fleet_search(int lo, int hi, double target, const std::function<double(int)>& revenue_at) {
  if (lo < 1 || hi < lo) throw std::invalid_argument("fleet_search: need 1 <= lo <= hi");
  std::map<int, double> cache;
  auto at = [&](int n) {
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, revenue_at(n)).first;
    return it->second;
  };
  if (at(lo) >= target) return lo;
  if (at(hi) < target) {
    throw std::runtime_error("fleet_search: target revenue unreachable with " +
                             std::to_string(hi) + " vehicles");
  }
  // Invariant: revenue(lo) < target <= revenue(hi).
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (at(mid) >= target) hi = mid;
    else lo = mid;
  }
  return hi;
}

std::vector<std::pair<std::string, int>> fleet_search(const ExperimentSpec& spec, double target) {
  spec.validate();
  std::vector<std::pair<std::string, int>> out;
  for (const auto& policy : spec.policies) {
    // With --frozen, learners trained once at the configured fleet size are
    // reused for every candidate size.
    std::vector<std::optional<Learners>> frozen(spec.seeds.size());
    if (spec.frozen) {
      for (std::size_t s = 0; s < spec.seeds.size(); ++s) {
        SimConfig cfg = spec.base;
        cfg.policy = parse_policy(policy);
        cfg.seed = spec.seeds[s];
        cfg.horizon = spec.train_epochs;
        const auto net = scenario_network(cfg);
        frozen[s] = spec.train ? run(cfg, net, scenario_demand(cfg, *net), fresh_learners(cfg),
                                     RunMode::Train).learners
                               : load_checkpoint(spec.checkpoint);
      }
    }
    const auto revenue_at = [&](int fleet) {
      ExperimentSpec sized = spec;
      sized.base.fleet_size = fleet;
      std::vector<double> revenues(spec.seeds.size());
      std::vector<std::thread> pool;
      for (std::size_t s = 0; s < spec.seeds.size(); ++s) {
        pool.emplace_back([&, s] {
          revenues[s] = evaluate_revenue(sized, policy, spec.seeds[s], frozen[s]);
        });
      }
      for (auto& t : pool) t.join();
      return mean_std(revenues).first;
    };
    out.emplace_back(policy, fleet_search(spec.min_fleet, spec.max_fleet, target, revenue_at));
  }
  return out;
}

double distance_report(const std::vector<std::vector<EpochMetrics>>& streams, int fleet_size,
                       double epoch_seconds) {
  if (fleet_size < 1) throw std::invalid_argument("distance_report: fleet size must be positive");
  double meters = 0.0;
  std::size_t epochs = 0;
  for (const auto& s : streams) {
    for (const auto& m : s) meters += m.distance_m;
    epochs += s.size();
  }
  if (epochs == 0) throw std::invalid_argument("distance_report: empty metrics stream");
  const double hours = static_cast<double>(epochs) * epoch_seconds / 3600.0;
  if (hours < 1.0 - 1e-9) {
    throw std::invalid_argument("distance_report: streams cover less than one hour");
  }
  return meters / 1000.0 / (static_cast<double>(fleet_size) * hours);
}

}  // namespace ridepool
