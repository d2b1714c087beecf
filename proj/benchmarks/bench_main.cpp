#include <benchmark/benchmark.h>

#include <random>

#include "ridepool/assignment.hpp"
#include "ridepool/sim.hpp"
#include "ridepool/trip.hpp"

using namespace ridepool;

namespace {

AssignmentProblem competing_fleet(int vehicles, int requests, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> score(0.0, 10.0);
  AssignmentProblem p;
  for (int v = 0; v < vehicles; ++v) {
    VehicleCandidates vc{static_cast<VehicleId>(v), {{{}, 0.0}}};
    for (RequestId r = 0; r < static_cast<RequestId>(requests); ++r) {
      if (rng() % 4 != 0) continue;
      vc.candidates.push_back({{r}, score(rng)});
      for (RequestId q = r + 1; q < static_cast<RequestId>(requests); ++q) {
        if (rng() % 8 == 0) vc.candidates.push_back({{r, q}, score(rng) + 3.0});
      }
    }
    p.vehicles.push_back(std::move(vc));
  }
  return p;
}

void BM_Solve(benchmark::State& state) {
  const auto p = competing_fleet(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(solve(p).objective);
}
BENCHMARK(BM_Solve)->Args({10, 8})->Args({50, 12})->Args({50, 16})->Unit(benchmark::kMillisecond);

void BM_TripGeneration(benchmark::State& state) {
  const auto net = make_grid({10, 30.0, 250.0});
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::uint32_t> loc(0, 99);
  std::vector<Vehicle> fleet;
  for (VehicleId v = 0; v < 50; ++v) {
    Vehicle veh;
    veh.id = v;
    veh.location = LocationId{loc(rng)};
    veh.capacity = 2;
    fleet.push_back(veh);
  }
  std::vector<Request> batch;
  for (RequestId r = 0; r < static_cast<RequestId>(state.range(0)); ++r) {
    Request req;
    req.id = r;
    req.origin = LocationId{loc(rng)};
    do req.destination = LocationId{loc(rng)}; while (req.destination == req.origin);
    batch.push_back(req);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_feasible_trips(fleet, batch, net, {}, 2, 0.0).size());
  }
}
BENCHMARK(BM_TripGeneration)->Arg(5)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_SimulatedHour(benchmark::State& state) {
  SimConfig cfg;
  cfg.policy = parse_policy("M&N-E");
  cfg.horizon = 60;
  const auto net = scenario_network(cfg);
  for (auto _ : state) {
    const auto r = run(cfg, net, scenario_demand(cfg, *net), fresh_learners(cfg), RunMode::Train);
    benchmark::DoNotOptimize(r.metrics.size());
  }
}
BENCHMARK(BM_SimulatedHour)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
