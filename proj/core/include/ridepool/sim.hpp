#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ridepool/assignment.hpp"
#include "ridepool/config.hpp"
#include "ridepool/demand.hpp"
#include "ridepool/matching.hpp"
#include "ridepool/network.hpp"
#include "ridepool/pricing.hpp"
#include "ridepool/rng.hpp"
#include "ridepool/trip.hpp"

namespace ridepool {

enum class RunMode { Train, Eval };

struct EpochMetrics {
  int epoch = 0;
  double revenue = 0.0;  // sum of accepted quoted prices
  int offers = 0;
  int accepts = 0;
  int served = 0;   // requests accepted and committed to a vehicle
  int dropped = 0;  // unmatched or rejected
  double distance_m = 0.0;  // fleet distance driven during the epoch
  std::vector<int> occupancy;  // committed passengers per vehicle at epoch end

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& metrics);
std::vector<EpochMetrics> read_metrics_csv(std::istream& in);

/// Pickup or dropoff actually performed by a vehicle.
struct ServiceEvent {
  int epoch = 0;
  double time = 0.0;
  VehicleId vehicle = 0;
  RequestId request = 0;
  StopKind kind = StopKind::Pickup;
  int load_after = 0;
};

struct OfferRecord {
  int epoch = 0;
  VehicleId vehicle = 0;
  RequestId request = 0;
  double factor = 1.0;
  double base = 0.0;
  double quoted = 0.0;
  bool accepted = false;
};

struct RequestRecord {
  RequestId id = 0;
  LocationId origin;
  LocationId destination;
  double arrival_time = 0.0;
  double direct_time = 0.0;
};

/// Everything needed to audit a run after the fact.
struct SimLog {
  std::vector<RequestRecord> requests;
  std::vector<OfferRecord> offers;
  std::vector<ServiceEvent> events;
};

struct Learners {
  QTable q;
  ValueFunction vf;
};

Learners fresh_learners(const SimConfig& cfg);

/// Source of per-epoch request batches: a replayed file or Poisson arrivals.
class DemandSource {
 public:
  static DemandSource replay(std::vector<std::vector<Request>> batches);
  static DemandSource poisson(std::map<std::uint32_t, double> rates);
  /// Poisson demand described by the config (uniform plus optional hotspot).
  static DemandSource from_config(const SimConfig& cfg, const RoadNetwork& net);

  std::vector<Request> batch(int epoch, double epoch_seconds, const RoadNetwork& net, Rng& rng);

 private:
  std::optional<std::vector<std::vector<Request>>> batches_;
  std::map<std::uint32_t, double> rates_;
  RequestId next_id_ = 0;
};

/// Optional hooks for inspecting a run while it happens.
struct SimObserver {
  std::function<void(int epoch, const AssignmentProblem&)> on_problem;
  std::function<void(int epoch, const std::vector<double>& factors)> on_prices;
};

/// One fleet, its learners and the epoch loop.
///
/// Each step(): move vehicles to the epoch start, batch the new requests, let
/// every vehicle pick a price factor, enumerate feasible trips, score them,
/// solve the assignment, offer prices and keep the accepted subsets, route
/// rewards, apply learning updates (train mode) and report metrics.
class Simulator {
 public:
  Simulator(SimConfig cfg, std::shared_ptr<const RoadNetwork> net, DemandSource demand,
            Learners learners, RunMode mode);

  EpochMetrics step();

  int epoch() const { return epoch_; }
  double now() const { return clock_; }
  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  const Learners& learners() const { return learners_; }
  const SimLog& log() const { return log_; }
  const SimConfig& config() const { return cfg_; }
  void set_observer(SimObserver obs) { observer_ = std::move(obs); }

 private:
  struct PricingMemory {
    std::uint64_t obs = 0;
    std::uint64_t mean = 0;
    int action = -1;
    double reward = 0.0;
  };

  void advance_vehicles(double target, EpochMetrics& m);
  std::vector<int> choose_prices(const std::vector<Request>& batch,
                                 std::vector<QTransition>& q_updates);
  int fixed_action() const;

  SimConfig cfg_;
  std::shared_ptr<const RoadNetwork> net_;
  DemandSource demand_;
  Learners learners_;
  RunMode mode_;
  SimObserver observer_;

  Rng demand_rng_;
  Rng acceptance_rng_;
  Rng pricing_rng_;

  std::vector<Vehicle> vehicles_;
  std::vector<int> last_action_;
  std::vector<std::optional<PricingMemory>> pending_q_;
  std::vector<std::optional<std::uint64_t>> last_post_key_;
  int epoch_ = 0;
  double clock_ = 0.0;
  SimLog log_;
};

struct RunResult {
  std::vector<EpochMetrics> metrics;
  Learners learners;
  SimLog log;
};

/// Loads the scenario named by the config (network file or grid).
std::shared_ptr<const RoadNetwork> scenario_network(const SimConfig& cfg);
DemandSource scenario_demand(const SimConfig& cfg, const RoadNetwork& net);

/// Runs `cfg.horizon` epochs. Eval mode leaves the learners untouched.
RunResult run(const SimConfig& cfg, std::shared_ptr<const RoadNetwork> net, DemandSource demand,
              Learners learners, RunMode mode, SimObserver observer = {});

void save_checkpoint(const std::string& prefix, const Learners& learners);
Learners load_checkpoint(const std::string& prefix);

}  // namespace ridepool
