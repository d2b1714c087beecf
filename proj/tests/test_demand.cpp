#include <doctest.h>

#include <sstream>

#include "ridepool/demand.hpp"
#include "support.hpp"

using namespace ridepool;

namespace {

double logistic(double ratio, double k1, double k2) { return 1.0 / (1.0 + std::exp(k1 * ratio - k2)); }

}  // namespace

TEST_CASE("base price is flagfall plus time fare") {
  std::vector<NodeRecord> nodes{{1, 0, 0}, {2, 1, 0}};
  std::vector<ArcRecord> arcs{{1, 2, 600}, {2, 1, 600}};
  const auto net = load_network(nodes, arcs);
  const auto r = testsupport::make_request(0, net.at(1), net.at(2));
  CHECK(base_price(r, net, {2.5, 0.01}) == doctest::Approx(8.5));

  const auto same = testsupport::make_request(1, net.at(1), net.at(1));
  CHECK_THROWS_AS(base_price(same, net, {0.0, 0.01}), std::invalid_argument);

  const auto grid = make_grid({3, 30.0, 250.0});
  const auto corner = testsupport::make_request(2, grid.at(0), grid.at(8));
  CHECK(base_price(corner, grid, {1.0, 0.02}) == doctest::Approx(3.4));
}

TEST_CASE("acceptance curve values") {
  const auto uber = SensitivityParams::uber();
  CHECK(acceptance_probability(10, 10, uber) == doctest::Approx(0.7350).epsilon(1e-4));
  CHECK(acceptance_probability(10, 10, uber) == doctest::Approx(logistic(1.0, 0.67, 1.69)));
  CHECK(acceptance_probability(0, 10, uber) == doctest::Approx(0.8442).epsilon(1e-4));
  CHECK(acceptance_probability(1e6, 1, uber) < 1e-12);
  CHECK(acceptance_probability(5, 5, SensitivityParams::conscious()) ==
        doctest::Approx(0.99996).epsilon(1e-5));
  CHECK_THROWS_AS(acceptance_probability(1, 0, uber), std::invalid_argument);
  CHECK_THROWS_AS(acceptance_probability(-1, 1, uber), std::invalid_argument);
}

TEST_CASE("acceptance decreases with the quoted price") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const SensitivityParams s{0.1 + 5.0 * u(rng), 20.0 * u(rng) - 5.0};
    const double base = 0.5 + 20.0 * u(rng);
    double q1 = 3.0 * base * u(rng), q2 = 3.0 * base * u(rng);
    if (q1 == q2) continue;
    if (q1 > q2) std::swap(q1, q2);
    REQUIRE(acceptance_probability(q1, base, s) >= acceptance_probability(q2, base, s));
    // Strictness wherever the logistic has not saturated in double precision.
    if (logistic(q1 / base, s.k1, s.k2) - logistic(q2 / base, s.k1, s.k2) > 1e-15) {
      REQUIRE(acceptance_probability(q1, base, s) > acceptance_probability(q2, base, s));
    }
  }
}

TEST_CASE("sensitivity presets parse") {
  CHECK(parse_sensitivity("uber").k1 == 0.67);
  CHECK(parse_sensitivity("conscious").k2 == 16.9);
  const auto custom = parse_sensitivity("2.5,4");
  CHECK(custom.k1 == 2.5);
  CHECK(custom.k2 == 4.0);
  CHECK_THROWS(parse_sensitivity("fast"));
}

TEST_CASE("acceptance sampling") {
  Rng rng = substream(1, "acceptance");
  for (int i = 0; i < 1000; ++i) {
    REQUIRE_FALSE(sample_acceptance(0.0, rng));
    REQUIRE(sample_acceptance(1.0, rng));
  }
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits += sample_acceptance(0.5, rng) ? 1 : 0;
  CHECK(std::abs(hits / double(n) - 0.5) < 0.01);

  Rng a = substream(9, "acceptance"), b = substream(9, "acceptance");
  for (int i = 0; i < 100; ++i) REQUIRE(sample_acceptance(0.3, a) == sample_acceptance(0.3, b));
}

TEST_CASE("Poisson generator") {
  const auto net = make_grid({3, 30.0, 250.0});
  Rng rng = substream(3, "demand");
  RequestId next = 0;

  std::map<std::uint32_t, double> zero{{0, 0.0}, {4, 0.0}};
  for (int e = 0; e < 50; ++e) REQUIRE(generate_requests(e, 60, zero, net, rng, next).empty());

  std::map<std::uint32_t, double> one{{4, 2.0}};
  const int epochs = 10000;
  std::size_t total = 0;
  for (int e = 0; e < epochs; ++e) {
    const auto batch = generate_requests(e, 60, one, net, rng, next);
    total += batch.size();
    for (const auto& r : batch) {
      REQUIRE(r.origin == net.at(4));
      REQUIRE(r.destination != r.origin);
      REQUIRE(r.arrival_epoch == e);
    }
  }
  CHECK(std::abs(total / double(epochs) - 2.0) < 0.05);
  CHECK(next == total);
}

TEST_CASE("request csv is grouped by epoch") {
  const auto net = make_grid({3, 30.0, 250.0});
  std::istringstream csv("epoch,origin,dest\n0,0,8\n0,1,2\n3,8,0\n");
  const auto batches = load_requests(csv, net, 60);
  REQUIRE(batches.size() == 4);
  CHECK(batches[0].size() == 2);
  CHECK(batches[1].empty());
  CHECK(batches[2].empty());
  CHECK(batches[3].size() == 1);
  CHECK(batches[3][0].arrival_time == 180);
  CHECK(batches[0][0].id != batches[0][1].id);
}

TEST_CASE("bad request rows name the row") {
  const auto net = make_grid({3, 30.0, 250.0});
  auto message = [&](const std::string& text) {
    std::istringstream csv(text);
    try {
      load_requests(csv, net, 60);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("epoch,origin,dest\n0,0,8\n1,0\n").find("row 3") != std::string::npos);
  CHECK(message("epoch,origin,dest\n0,0,99\n").find("row 2") != std::string::npos);
  CHECK(message("epoch,origin,dest\n0,3,3\n").find("row 2") != std::string::npos);
  CHECK_FALSE(message("origin,dest\n").empty());
}
