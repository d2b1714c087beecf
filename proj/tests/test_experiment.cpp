#include <doctest.h>

#include <sstream>

#include "ridepool/experiment.hpp"

using namespace ridepool;

TEST_CASE("percent deltas") {
  CHECK(percent_delta(110, 100) == doctest::Approx(10.0));
  CHECK(percent_delta(100, 100) == 0.0);
  CHECK(percent_delta(90, 100) == doctest::Approx(-10.0));
  CHECK_THROWS(percent_delta(1, 0));
}

TEST_CASE("mean and sample deviation") {
  const auto [m, s] = mean_std({2, 4, 4, 4, 5, 5, 7, 9});
  CHECK(m == 5.0);
  CHECK(s == doctest::Approx(std::sqrt(32.0 / 7.0)));
  CHECK(mean_std({3.0}).second == 0.0);
}

TEST_CASE("comparison table with fixed revenues") {
  const RevenueFn fixed = [](const std::string& policy, std::uint64_t seed) {
    const double base = policy == "M&N-E" ? 110.0 : policy == "F&IR" ? 95.0 : 100.0;
    return base + (seed % 2 == 0 ? 1.0 : -1.0);
  };
  const auto table = compare({"M&N-E", "F&IR"}, {1, 2, 3, 4}, fixed, 3);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[2].policy == "F&N-E");
  CHECK(table.rows[2].delta_pct == 0.0);
  CHECK(table.rows[0].mean == 110.0);
  CHECK(table.rows[0].delta_pct == doctest::Approx(10.0));
  CHECK(table.rows[1].delta_pct == doctest::Approx(-5.0));
  CHECK(table.rows[0].revenues == std::vector<double>{109, 111, 109, 111});

  // Deltas can be recomputed from the printed means.
  std::ostringstream out;
  write_compare_table(out, table);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "policy,mean_revenue,std_revenue,delta_pct");
  std::vector<std::pair<double, double>> printed;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::string name;
    double mean, sd, delta;
    fields >> name >> mean >> sd >> delta;
    printed.emplace_back(mean, delta);
  }
  for (const auto& [mean, delta] : printed) {
    CHECK(std::abs(percent_delta(mean, printed[2].first) - delta) <= 0.01);
  }

  const auto same = compare({"F&N-E"}, {1}, fixed, 1);
  CHECK(same.rows.size() == 1);
  CHECK(same.rows[0].delta_pct == 0.0);
  CHECK_THROWS(compare({"M&N-E"}, {}, fixed, 1));
}

TEST_CASE("errors from a run surface from the pool") {
  const RevenueFn failing = [](const std::string& policy, std::uint64_t) -> double {
    if (policy == "F&IR") throw std::runtime_error("missing checkpoint");
    return 1.0;
  };
  CHECK_THROWS_WITH(compare({"F&IR"}, {1, 2}, failing, 4), "missing checkpoint");
}

TEST_CASE("fleet bisection") {
  const auto linear = [](int n) { return 10.0 * n; };
  CHECK(fleet_search(1, 200, 95.0, linear) == 10);
  CHECK(fleet_search(1, 200, 0.0, linear) == 1);
  CHECK(fleet_search(1, 200, 100.0, linear) == 10);
  CHECK(fleet_search(1, 200, 2000.0, linear) == 200);
  CHECK_THROWS_AS(fleet_search(1, 200, 2000.5, linear), std::runtime_error);
  int calls = 0;
  fleet_search(1, 1024, 333.0, [&](int n) {
    ++calls;
    return double(n);
  });
  CHECK(calls <= 12);
}

TEST_CASE("distance report") {
  auto stream = [](std::vector<double> meters) {
    std::vector<EpochMetrics> out;
    for (std::size_t i = 0; i < meters.size(); ++i) {
      EpochMetrics m;
      m.epoch = static_cast<int>(i);
      m.distance_m = meters[i];
      out.push_back(m);
    }
    return out;
  };
  CHECK(distance_report({stream(std::vector<double>(60, 0.0))}, 1, 60) == 0.0);
  std::vector<double> hour(60, 0.0);
  hour[0] = 11270.0;
  CHECK(distance_report({stream(hour)}, 1, 60) == doctest::Approx(11.27));
  std::vector<double> both(60, 0.0);
  both[3] = 22000.0;  // 10 km + 12 km over two vehicles
  CHECK(distance_report({stream(both)}, 2, 60) == doctest::Approx(11.0));
  CHECK_THROWS(distance_report({}, 1, 60));
  CHECK_THROWS(distance_report({stream(std::vector<double>(30, 1.0))}, 1, 60));
}

TEST_CASE("experiment spec parsing") {
  std::istringstream text(
      "policies = M&N-E, F&IR\n"
      "seeds = 3, 4\n"
      "train_epochs = 10\n"
      "eval_epochs = 5\n"
      "fleet_size = 4\n"
      "grid_side = 4\n"
      "demand_rate = 2\n");
  const auto spec = parse_experiment(text);
  CHECK(spec.policies == std::vector<std::string>{"M&N-E", "F&IR"});
  CHECK(spec.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(spec.base.fleet_size == 4);
  CHECK(spec.base.grid.side == 4);

  std::istringstream no_ckpt("train = false\n");
  const auto frozen = parse_experiment(no_ckpt);
  CHECK_THROWS_AS(evaluate_revenue(frozen, "F&N-E", 1), std::invalid_argument);

  std::istringstream bad("policies = Z&Z\n");
  CHECK_THROWS(parse_experiment(bad));
  std::istringstream no_seeds("seeds = \n");
  CHECK_THROWS(parse_experiment(no_seeds));
}

TEST_CASE("small end-to-end comparison is reproducible") {
  std::istringstream text(
      "policies = M&N-E, F&IR\n"
      "seeds = 1, 2\n"
      "train_epochs = 20\n"
      "eval_epochs = 10\n"
      "fleet_size = 4\n"
      "grid_side = 4\n"
      "demand_rate = 3\n"
      "threads = 2\n");
  const auto spec = parse_experiment(text);
  const auto a = compare(spec);
  const auto b = compare(spec);
  REQUIRE(a.rows.size() == 3);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].revenues == b.rows[i].revenues);
    CHECK(a.rows[i].mean > 0.0);
  }
}
