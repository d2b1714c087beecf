#include <doctest.h>

#include <sstream>

#include "support.hpp"

using namespace ridepool;

namespace {

RoadNetwork three_node() {
  // A=1, B=2, C=3
  std::vector<NodeRecord> nodes{{1, 0, 0}, {2, 100, 0}, {3, 200, 0}};
  std::vector<ArcRecord> arcs{{1, 2, 10}, {2, 3, 10}, {1, 3, 25}, {2, 1, 10}, {3, 2, 10}, {3, 1, 25}};
  return load_network(nodes, arcs);
}

// Relaxes every arc n-1 times from one source.
std::vector<double> bellman_ford(const std::vector<NodeRecord>& nodes,
                                 const std::vector<ArcRecord>& arcs, std::int64_t src) {
  std::map<std::int64_t, std::size_t> idx;
  for (std::size_t i = 0; i < nodes.size(); ++i) idx[nodes[i].id] = i;
  std::vector<double> d(nodes.size(), std::numeric_limits<double>::infinity());
  d[idx[src]] = 0.0;
  for (std::size_t it = 0; it + 1 < nodes.size(); ++it) {
    for (const auto& a : arcs) {
      const auto u = idx[a.from], v = idx[a.to];
      d[v] = std::min(d[v], d[u] + a.seconds);
    }
  }
  return d;
}

void simple_paths(const std::vector<ArcRecord>& arcs, std::int64_t at, std::int64_t goal,
                  double so_far, std::set<std::int64_t>& seen, double& best) {
  if (at == goal) {
    best = std::min(best, so_far);
    return;
  }
  for (const auto& a : arcs) {
    if (a.from != at || seen.count(a.to)) continue;
    seen.insert(a.to);
    simple_paths(arcs, a.to, goal, so_far + a.seconds, seen, best);
    seen.erase(a.to);
  }
}

}  // namespace

TEST_CASE("two-node cycle") {
  std::vector<NodeRecord> nodes{{1, 0, 0}, {2, 10, 0}};
  std::vector<ArcRecord> arcs{{1, 2, 60}, {2, 1, 60}};
  const auto net = load_network(nodes, arcs);
  CHECK(net.travel_time_by_id(1, 2) == 60);
  CHECK(net.travel_time_by_id(2, 1) == 60);
}

TEST_CASE("shortest path goes through the middle node") {
  const auto net = three_node();
  CHECK(net.travel_time_by_id(1, 3) == 20);
  CHECK(net.travel_time_by_id(3, 1) == 20);
  CHECK(net.travel_time_by_id(1, 1) == 0);
  CHECK(net.next_hop(net.at(1), net.at(3)) == net.at(2));
  CHECK(net.path_distance(net.at(1), net.at(3)) == doctest::Approx(200.0));
}

TEST_CASE("node without outgoing arcs is dropped") {
  std::vector<NodeRecord> nodes{{1, 0, 0}, {2, 1, 0}, {3, 2, 0}};
  std::vector<ArcRecord> arcs{{1, 2, 5}, {2, 1, 5}, {2, 3, 5}};
  const auto net = load_network(nodes, arcs);
  CHECK(net.size() == 2);
  CHECK_FALSE(net.find(3).has_value());
  CHECK_THROWS_AS(net.travel_time_by_id(1, 3), std::out_of_range);
}

TEST_CASE("malformed networks are rejected") {
  std::vector<NodeRecord> none;
  std::vector<ArcRecord> no_arcs;
  CHECK_THROWS_AS(load_network(none, no_arcs), std::invalid_argument);

  std::vector<NodeRecord> two{{1, 0, 0}, {2, 1, 0}};
  std::vector<ArcRecord> zero{{1, 2, 0}, {2, 1, 5}};
  CHECK_THROWS_AS(load_network(two, zero), std::invalid_argument);

  std::vector<ArcRecord> dangling{{1, 9, 5}, {2, 1, 5}};
  CHECK_THROWS_AS(load_network(two, dangling), std::invalid_argument);

  std::vector<NodeRecord> dup{{1, 0, 0}, {1, 1, 0}};
  std::vector<ArcRecord> loop{{1, 1, 5}};
  CHECK_THROWS_AS(load_network(dup, loop), std::invalid_argument);

  std::vector<ArcRecord> one_way{{1, 2, 5}};
  CHECK_THROWS_AS(load_network(two, one_way), std::invalid_argument);
}

TEST_CASE("grid corner to corner") {
  const auto net = make_grid({3, 30.0, 250.0});
  CHECK(net.size() == 9);
  CHECK(net.travel_time_by_id(0, 8) == 120);
  CHECK(net.travel_time_by_id(8, 0) == 120);
  CHECK(net.path_distance(net.at(0), net.at(8)) == doctest::Approx(1000.0));
  CHECK(net.zone_of(net.at(0), 3) == 0);
  CHECK(net.zone_of(net.at(8), 3) == 8);
}

TEST_CASE("triangle inequality and zero diagonal on a grid") {
  const auto net = make_grid({5, 30.0, 250.0});
  const auto locs = net.locations();
  for (const auto a : locs) {
    CHECK(net.travel_time(a, a) == 0);
    for (const auto b : locs) {
      for (const auto c : locs) {
        REQUIRE(net.travel_time(a, c) <= net.travel_time(a, b) + net.travel_time(b, c) + 1e-9);
      }
    }
  }
}

TEST_CASE("shortest paths agree with brute force and Bellman-Ford") {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int g = 0; g < 40; ++g) {
    const int n = g < 20 ? 4 + g % 5 : 10 + g;  // small graphs first, then up to 49 nodes
    auto [nodes, arcs] = testsupport::random_graph(n, 2 * n, rng);
    const auto net = load_network(nodes, arcs);
    REQUIRE(net.size() == static_cast<std::size_t>(n));
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int k = 0; k < 25; ++k, ++checked) {
      const int a = pick(rng), b = pick(rng);
      const double tt = net.travel_time_by_id(a, b);
      if (n <= 8) {
        double best = a == b ? 0.0 : std::numeric_limits<double>::infinity();
        std::set<std::int64_t> seen{a};
        simple_paths(arcs, a, b, 0.0, seen, best);
        REQUIRE(tt == doctest::Approx(best).epsilon(1e-12));
      } else {
        REQUIRE(tt == doctest::Approx(bellman_ford(nodes, arcs, a)[b]).epsilon(1e-12));
      }
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("next hops walk the shortest path") {
  std::mt19937_64 rng(11);
  auto [nodes, arcs] = testsupport::random_graph(20, 40, rng);
  const auto net = load_network(nodes, arcs);
  for (const auto a : net.locations()) {
    for (const auto b : net.locations()) {
      double walked = 0.0;
      auto at = a;
      int hops = 0;
      while (at != b && hops++ < 25) {
        const auto nx = net.next_hop(at, b);
        walked += net.travel_time(at, nx);
        at = nx;
      }
      REQUIRE(at == b);
      REQUIRE(walked == doctest::Approx(net.travel_time(a, b)));
    }
  }
}

TEST_CASE("network file round trip") {
  const auto [nodes, arcs] = grid_records({3, 30.0, 100.0});
  std::stringstream ss;
  ss << "# generated\n\n";
  write_network(ss, nodes, arcs);
  const auto net = read_network(ss);
  CHECK(net.size() == 9);
  CHECK(net.travel_time_by_id(0, 8) == 120);

  std::istringstream bad("N 1 0 0\nN 2 1 0\nX 1 2 3\n");
  CHECK_THROWS_AS(read_network(bad), std::invalid_argument);
}

TEST_CASE("neighbors within a travel-time radius") {
  const auto net = testsupport::line_network(3);
  const std::vector<Located> fleet{{0, net.at(0)}, {1, net.at(1)}, {2, net.at(2)}};
  CHECK(neighbors_within(net, net.at(0), 30, fleet, 0u) == std::vector<std::uint32_t>{1});
  CHECK(neighbors_within(net, net.at(0), 0, fleet, 0u).empty());
  CHECK(neighbors_within(net, net.at(0), kInfiniteRadius, fleet, 0u) ==
        std::vector<std::uint32_t>{1, 2});
  CHECK_THROWS_AS(neighbors_within(net, net.at(0), -1, fleet), std::invalid_argument);
}

TEST_CASE("neighbor sets grow with the radius") {
  std::mt19937_64 rng(3);
  const auto net = make_grid({6, 30.0, 250.0});
  std::uniform_int_distribution<std::uint32_t> loc(0, 35);
  std::uniform_real_distribution<double> radius(0.0, 400.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Located> fleet;
    for (std::uint32_t i = 0; i < 15; ++i) fleet.push_back({i, LocationId{loc(rng)}});
    const auto center = LocationId{loc(rng)};
    double r1 = radius(rng), r2 = radius(rng);
    if (r1 > r2) std::swap(r1, r2);
    const auto small = neighbors_within(net, center, r1, fleet, 0u);
    const auto large = neighbors_within(net, center, r2, fleet, 0u);
    REQUIRE(std::includes(large.begin(), large.end(), small.begin(), small.end()));
    for (const auto id : large) {
      REQUIRE(id != 0u);
      REQUIRE(net.travel_time(center, fleet[id].location) <= r2);
    }
  }
}
