#include "ridepool/trip.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace ridepool {

namespace {

struct PendingStop {
  RequestId request;
  StopKind kind;
  LocationId location;
  std::size_t rider;  // index into the riders table
};

struct Rider {
  RequestId id;
  double arrival_time;
  double direct_time;
  std::optional<double> pickup_time;  // set for onboard riders
};

class OrderSearch {
 public:
  OrderSearch(const RoadNetwork& net, const ServiceLimits& limits, std::vector<Rider> riders,
              std::vector<PendingStop> stops)
      : net_(net), limits_(limits), riders_(std::move(riders)), stops_(std::move(stops)) {
    std::sort(stops_.begin(), stops_.end(), [](const PendingStop& a, const PendingStop& b) {
      return std::tie(a.request, a.kind) < std::tie(b.request, b.kind);
    });
    used_.assign(stops_.size(), 0);
    pickup_at_.resize(riders_.size());
    for (std::size_t i = 0; i < riders_.size(); ++i) pickup_at_[i] = riders_[i].pickup_time;
  }

  std::optional<std::vector<Stop>> run(LocationId start, double start_time) {
    best_time_ = std::numeric_limits<double>::infinity();
    best_.reset();
    current_.clear();
    descend(start, start_time);
    return best_;
  }

 private:
  void descend(LocationId here, double time) {
    if (current_.size() == stops_.size()) {
      if (time < best_time_ - kTimeEps) {
        best_time_ = time;
        best_ = current_;
      }
      return;
    }
    for (std::size_t i = 0; i < stops_.size(); ++i) {
      if (used_[i]) continue;
      const auto& stop = stops_[i];
      const std::size_t rider = stop.rider;
      if (stop.kind == StopKind::Dropoff && !pickup_at_[rider]) continue;
      const double arrive = time + net_.travel_time(here, stop.location);
      if (arrive >= best_time_ - kTimeEps) continue;
      if (stop.kind == StopKind::Pickup) {
        if (arrive - riders_[rider].arrival_time > limits_.max_pickup_delay + kTimeEps) continue;
        pickup_at_[rider] = arrive;
      } else {
        const double ride = arrive - *pickup_at_[rider];
        if (ride - riders_[rider].direct_time > limits_.max_detour + kTimeEps) continue;
      }
      used_[i] = 1;
      current_.push_back(Stop{stop.request, stop.kind, stop.location, arrive});
      descend(stop.location, arrive);
      current_.pop_back();
      used_[i] = 0;
      if (stop.kind == StopKind::Pickup) pickup_at_[rider].reset();
    }
  }

  const RoadNetwork& net_;
  const ServiceLimits& limits_;
  std::vector<Rider> riders_;
  std::vector<PendingStop> stops_;
  std::vector<char> used_;
  std::vector<std::optional<double>> pickup_at_;
  std::vector<Stop> current_;
  std::optional<std::vector<Stop>> best_;
  double best_time_ = 0.0;
};

std::vector<RequestDelays> delays_of(const std::vector<Stop>& plan,
                                     const std::vector<Rider>& riders) {
  std::vector<RequestDelays> out;
  for (const auto& rider : riders) {
    RequestDelays d{rider.id, 0.0, 0.0};
    double pickup = rider.pickup_time.value_or(0.0);
    for (const auto& stop : plan) {
      if (stop.request != rider.id) continue;
      if (stop.kind == StopKind::Pickup) {
        pickup = stop.time;
        d.pickup_delay = stop.time - rider.arrival_time;
      } else {
        d.detour_delay = (stop.time - pickup) - rider.direct_time;
      }
    }
    if (rider.pickup_time) d.pickup_delay = *rider.pickup_time - rider.arrival_time;
    out.push_back(d);
  }
  std::sort(out.begin(), out.end(),
            [](const RequestDelays& a, const RequestDelays& b) { return a.request < b.request; });
  return out;
}

std::vector<Rider> committed_riders(const Vehicle& v) {
  std::vector<Rider> riders;
  for (const auto& p : v.passengers) {
    riders.push_back(Rider{p.id, p.arrival_time, p.direct_time, p.pickup_time});
  }
  return riders;
}

}  // namespace

Trip current_plan_trip(const Vehicle& v, const RoadNetwork& net, double now) {
  (void)net;
  Trip trip;
  trip.vehicle = v.id;
  trip.plan = v.route_plan;
  trip.delays = delays_of(trip.plan, committed_riders(v));
  trip.completion_time = trip.plan.empty() ? now + v.ready_offset : trip.plan.back().time;
  return trip;
}

std::optional<Trip> feasible_insertion(const Vehicle& v, std::span<const Request> reqs,
                                       const RoadNetwork& net, const ServiceLimits& limits,
                                       double now) {
  if (reqs.size() + v.passengers.size() > static_cast<std::size_t>(v.capacity)) {
    throw std::invalid_argument("feasible_insertion: " + std::to_string(reqs.size()) +
                                " new requests exceed remaining capacity of vehicle " +
                                std::to_string(v.id));
  }
  if (reqs.empty()) return current_plan_trip(v, net, now);

  std::vector<Rider> riders = committed_riders(v);
  std::vector<PendingStop> stops;
  for (std::size_t i = 0; i < v.passengers.size(); ++i) {
    const auto& p = v.passengers[i];
    if (!p.onboard()) stops.push_back({p.id, StopKind::Pickup, p.origin, i});
    stops.push_back({p.id, StopKind::Dropoff, p.destination, i});
  }
  for (const auto& r : reqs) {
    const std::size_t idx = riders.size();
    riders.push_back(Rider{r.id, r.arrival_time, net.travel_time(r.origin, r.destination),
                           std::nullopt});
    stops.push_back({r.id, StopKind::Pickup, r.origin, idx});
    stops.push_back({r.id, StopKind::Dropoff, r.destination, idx});
  }

  OrderSearch search(net, limits, riders, std::move(stops));
  auto plan = search.run(v.location, now + v.ready_offset);
  if (!plan) return std::nullopt;

  Trip trip;
  trip.vehicle = v.id;
  for (const auto& r : reqs) trip.requests.push_back(r.id);
  std::sort(trip.requests.begin(), trip.requests.end());
  trip.plan = std::move(*plan);
  trip.delays = delays_of(trip.plan, riders);
  trip.completion_time = trip.plan.back().time;
  return trip;
}

std::vector<std::vector<Trip>> generate_feasible_trips(std::span<const Vehicle> vehicles,
                                                       std::span<const Request> requests,
                                                       const RoadNetwork& net,
                                                       const ServiceLimits& limits, int size_cap,
                                                       double now) {
  std::vector<const Request*> sorted;
  for (const auto& r : requests) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const Request* a, const Request* b) { return a->id < b->id; });

  std::vector<std::vector<Trip>> out;
  out.reserve(vehicles.size());
  for (const auto& v : vehicles) {
    std::vector<Trip> trips{current_plan_trip(v, net, now)};
    const int room = std::min(size_cap, v.capacity - static_cast<int>(v.passengers.size()));

    // Feasible combinations of the previous size, as index lists into `sorted`.
    std::vector<std::vector<std::size_t>> level;
    std::set<std::vector<std::size_t>> feasible;
    if (room >= 1) {
      const double start = now + v.ready_offset;
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto& r = *sorted[i];
        // Reaching the origin directly is a lower bound on the pickup time.
        if (start + net.travel_time(v.location, r.origin) - r.arrival_time >
            limits.max_pickup_delay + kTimeEps) {
          continue;
        }
        const Request one[] = {r};
        if (auto trip = feasible_insertion(v, one, net, limits, now)) {
          trips.push_back(std::move(*trip));
          level.push_back({i});
          feasible.insert({i});
        }
      }
    }
    for (int k = 2; k <= room && level.size() >= 2; ++k) {
      std::vector<std::vector<std::size_t>> next;
      for (std::size_t a = 0; a < level.size(); ++a) {
        for (std::size_t b = a + 1; b < level.size(); ++b) {
          // Join combinations sharing their first k-2 members.
          if (!std::equal(level[a].begin(), level[a].end() - 1, level[b].begin())) break;
          auto combo = level[a];
          combo.push_back(level[b].back());
          bool closed = true;
          for (std::size_t drop = 0; drop + 2 < combo.size() && closed; ++drop) {
            auto subset = combo;
            subset.erase(subset.begin() + static_cast<std::ptrdiff_t>(drop));
            closed = feasible.contains(subset);
          }
          if (!closed) continue;
          std::vector<Request> reqs;
          for (const auto idx : combo) reqs.push_back(*sorted[idx]);
          if (auto trip = feasible_insertion(v, reqs, net, limits, now)) {
            trips.push_back(std::move(*trip));
            next.push_back(combo);
          }
        }
      }
      for (const auto& c : next) feasible.insert(c);
      level = std::move(next);
    }
    out.push_back(std::move(trips));
  }
  return out;
}

}  // namespace ridepool
