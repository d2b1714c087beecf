#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ridepool/demand.hpp"
#include "ridepool/network.hpp"

namespace ridepool {

using VehicleId = std::uint32_t;

/// Slack added to every time comparison. Scheduled times are sums of arc
/// times taken in different orders, so exact equality cannot be relied on.
inline constexpr double kTimeEps = 1e-6;

enum class StopKind : std::uint8_t { Pickup = 0, Dropoff = 1 };

struct Stop {
  RequestId request = 0;
  StopKind kind = StopKind::Pickup;
  LocationId location;
  double time = 0.0;  // scheduled arrival, seconds since start

  friend bool operator==(const Stop&, const Stop&) = default;
};

/// A request the vehicle has committed to, either waiting for pickup or
/// already on board (`pickup_time` set).
struct Passenger {
  RequestId id = 0;
  LocationId origin;
  LocationId destination;
  double arrival_time = 0.0;
  double direct_time = 0.0;
  std::optional<double> pickup_time;

  bool onboard() const { return pickup_time.has_value(); }
};

struct Vehicle {
  VehicleId id = 0;
  /// Node the vehicle is at, or the node it is heading to when mid-arc.
  LocationId location;
  /// Seconds until the vehicle reaches `location` (0 when standing on it).
  double ready_offset = 0.0;
  int capacity = 2;
  std::vector<Passenger> passengers;
  std::vector<Stop> route_plan;
  double cumulative_distance = 0.0;  // meters
};

struct ServiceLimits {
  double max_pickup_delay = 300.0;  // tau
  double max_detour = 600.0;        // lambda
};

struct RequestDelays {
  RequestId request = 0;
  double pickup_delay = 0.0;
  double detour_delay = 0.0;
};

/// A set of new requests for one vehicle together with the validated plan
/// serving them alongside everything the vehicle already committed to.
struct Trip {
  VehicleId vehicle = 0;
  std::vector<RequestId> requests;  // new requests, ascending
  std::vector<Stop> plan;
  /// One entry per request served by the plan (new and committed), ascending id.
  std::vector<RequestDelays> delays;
  /// Time the last stop is reached; `now + ready_offset` for an empty plan.
  double completion_time = 0.0;

  bool empty() const { return requests.empty(); }
};

/// Returns the trip that keeps the vehicle's current plan unchanged.
Trip current_plan_trip(const Vehicle& v, const RoadNetwork& net, double now);

/// Searches every stop ordering that serves the committed passengers plus
/// `reqs` and returns the one finishing earliest while keeping every pickup
/// delay within tau and every detour within lambda. Ties go to the
/// lexicographically smallest (request id, kind) stop sequence.
///
/// An empty `reqs` returns the current plan untouched. Throws
/// std::invalid_argument when the request count would exceed capacity.
std::optional<Trip> feasible_insertion(const Vehicle& v, std::span<const Request> reqs,
                                       const RoadNetwork& net, const ServiceLimits& limits,
                                       double now);

/// Per vehicle (same order as `vehicles`): the empty trip, all feasible
/// singletons, and each larger combination whose every one-smaller subset was
/// feasible, up to `size_cap` new requests. Trips are ordered by size, then
/// lexicographically by request ids.
std::vector<std::vector<Trip>> generate_feasible_trips(std::span<const Vehicle> vehicles,
                                                       std::span<const Request> requests,
                                                       const RoadNetwork& net,
                                                       const ServiceLimits& limits, int size_cap,
                                                       double now);

}  // namespace ridepool
