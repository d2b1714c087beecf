#include <doctest.h>

#include <sstream>

#include "ridepool/matching.hpp"
#include "support.hpp"

using namespace ridepool;
using testsupport::idle_vehicle;
using testsupport::make_request;

namespace {

Trip trip_with(std::vector<RequestId> ids) {
  Trip t;
  t.requests = std::move(ids);
  return t;
}

}  // namespace

TEST_CASE("trip revenue per mode") {
  const auto uber = SensitivityParams::uber();
  const PriceBook prices{{1, {10.0, 10.0}}, {2, {12.0, 10.0}}};
  for (const auto mode : {MatchMode::Expected, MatchMode::Nominal, MatchMode::Immediate}) {
    CHECK(trip_revenue(trip_with({}), prices, mode, uber) == 0.0);
  }
  CHECK(trip_revenue(trip_with({1}), prices, MatchMode::Nominal, uber) == 10.0);
  CHECK(trip_revenue(trip_with({1}), prices, MatchMode::Expected, uber) ==
        doctest::Approx(7.350).epsilon(1e-4));
  CHECK(trip_revenue(trip_with({1, 2}), prices, MatchMode::Nominal, uber) == 22.0);
  const double p12 = 1.0 / (1.0 + std::exp(0.67 * 1.2 - 1.69));
  CHECK(trip_revenue(trip_with({2}), prices, MatchMode::Expected, uber) == doctest::Approx(12 * p12));
  CHECK_THROWS_AS(trip_revenue(trip_with({3}), prices, MatchMode::Nominal, uber),
                  std::invalid_argument);
}

TEST_CASE("trip scores") {
  const auto net = make_grid({3, 30.0, 250.0});
  const auto v = idle_vehicle(0, net.at(4));
  const Request r[] = {make_request(1, net.at(4), net.at(8))};
  const auto trip = *feasible_insertion(v, r, net, {}, 0.0);
  const auto empty = current_plan_trip(v, net, 0.0);
  const ValueSpec spec{};
  const auto post = post_decision_state(v, trip, 0, net, spec);
  const auto idle_post = post_decision_state(v, empty, 0, net, spec);
  const PriceBook prices{{1, {10.0, 10.0}}};
  const auto uber = SensitivityParams::uber();

  ValueFunction zero(spec, 0.9, 0.1);
  CHECK(score_trip(empty, idle_post, prices, zero, {MatchMode::Immediate}, uber) == 0.0);
  CHECK(score_trip(trip, post, prices, zero, {MatchMode::Nominal}, uber) == 10.0);
  CHECK(score_trip(trip, post, prices, zero, {MatchMode::Expected}, uber) ==
        trip_revenue(trip, prices, MatchMode::Expected, uber));

  ValueFunction vf(spec, 0.9, 1.0);
  vf.td_update(post.feature_key(), 3.0, std::nullopt);
  CHECK(vf.value(post) == 3.0);
  CHECK(score_trip(trip, post, prices, vf, {MatchMode::Nominal}, uber) == doctest::Approx(12.7));
  CHECK(score_trip(trip, post, prices, vf, {MatchMode::Immediate}, uber) ==
        trip_revenue(trip, prices, MatchMode::Expected, uber));
  // Linear objective constants.
  CHECK(score_trip(trip, post, prices, vf, {MatchMode::Nominal, 2.0, -1.5}, uber) ==
        doctest::Approx(2.0 * 10.0 - 1.5 + 2.7));
}

TEST_CASE("post-decision states are deterministic") {
  const auto net = make_grid({6, 30.0, 250.0});
  const auto v = idle_vehicle(0, net.at(0));
  const Request r[] = {make_request(1, net.at(1), net.at(35))};
  const auto trip = *feasible_insertion(v, r, net, {}, 0.0);
  const ValueSpec spec{3, 24, 1440};
  const auto a = post_decision_state(v, trip, 100, net, spec);
  const auto b = post_decision_state(v, trip, 100, net, spec);
  CHECK(a == b);
  CHECK(a.feature_key() == b.feature_key());
  CHECK(a.final_location == net.at(35));
  CHECK(a.zone == 8);
  CHECK(a.committed_seats == 1);
  CHECK(a.time_bucket == 100 * 24 / 1440);
  CHECK(post_decision_state(v, trip, 1440 + 100, net, spec).time_bucket == a.time_bucket);
  const auto idle = post_decision_state(v, current_plan_trip(v, net, 0.0), 100, net, spec);
  CHECK(idle.zone == 0);
  CHECK(idle.committed_seats == 0);
  CHECK(idle.feature_key() != a.feature_key());
}

TEST_CASE("temporal-difference updates") {
  const ValueSpec spec{};
  ValueFunction one(spec, 0.0, 1.0);
  one.td_update(1, 5.0, 2);
  CHECK(one.value(1) == 5.0);

  ValueFunction still(spec, 0.9, 0.3);
  for (int i = 0; i < 100; ++i) still.td_update(i % 3, 0.0, (i + 1) % 3);
  for (std::uint64_t k = 0; k < 3; ++k) CHECK(still.value(k) == 0.0);

  // Two-step chain: reward 0 into the second state, then 10 and stop.
  ValueFunction chain(spec, 1.0, 0.5);
  for (int sweep = 0; sweep < 200; ++sweep) {
    chain.td_update(1, 0.0, 2);
    chain.td_update(2, 10.0, std::nullopt);
  }
  CHECK(std::abs(chain.value(1) - 10.0) < 1e-6);
  CHECK(std::abs(chain.value(2) - 10.0) < 1e-6);

  CHECK_THROWS(ValueFunction(spec, 1.5, 0.1));
  CHECK_THROWS(ValueFunction(spec, 0.5, 0.0));
}

TEST_CASE("value checkpoint round trip is exact") {
  ValueFunction vf({4, 12, 720}, 0.95, 0.2);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 300; ++i) vf.td_update(rng() % 40, u(rng), rng() % 40);
  std::stringstream ss;
  vf.save(ss);
  const auto back = ValueFunction::load(ss);
  CHECK(back == vf);
  CHECK(back.spec() == vf.spec());

  std::istringstream wrong("ridepool-qtable 1\n");
  CHECK_THROWS(ValueFunction::load(wrong));
}
