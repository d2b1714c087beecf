// Shared fixtures and independent oracles for the test binaries. Nothing here
// calls into the library code it is used to check.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ridepool/network.hpp"
#include "ridepool/sim.hpp"
#include "ridepool/trip.hpp"

namespace testsupport {

using namespace ridepool;

/// Nodes 0..n-1 on a line, 250 m apart, bidirectional arcs of `arc` seconds.
inline RoadNetwork line_network(int n, double arc = 30.0) {
  std::vector<NodeRecord> nodes;
  std::vector<ArcRecord> arcs;
  for (int i = 0; i < n; ++i) nodes.push_back({i, 250.0 * i, 0.0});
  for (int i = 0; i + 1 < n; ++i) {
    arcs.push_back({i, i + 1, arc});
    arcs.push_back({i + 1, i, arc});
  }
  return load_network(nodes, arcs);
}

/// Random strongly connected digraph: a Hamiltonian cycle plus extra arcs.
inline std::pair<std::vector<NodeRecord>, std::vector<ArcRecord>> random_graph(int n, int extra,
                                                                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(0.0, 1000.0);
  std::uniform_real_distribution<double> secs(1.0, 100.0);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<NodeRecord> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back({i, coord(rng), coord(rng)});
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<ArcRecord> arcs;
  for (int i = 0; i < n; ++i) arcs.push_back({order[i], order[(i + 1) % n], secs(rng)});
  for (int e = 0; e < extra; ++e) {
    const int a = pick(rng), b = pick(rng);
    if (a != b) arcs.push_back({a, b, secs(rng)});
  }
  return {nodes, arcs};
}

inline Vehicle idle_vehicle(VehicleId id, LocationId at, int capacity = 2) {
  Vehicle v;
  v.id = id;
  v.location = at;
  v.capacity = capacity;
  return v;
}

inline Request make_request(RequestId id, LocationId o, LocationId d, double arrival = 0.0) {
  Request r;
  r.id = id;
  r.origin = o;
  r.destination = d;
  r.arrival_time = arrival;
  return r;
}

/// Best plan found by trying every permutation of the stops of the vehicle's
/// committed passengers plus `reqs`, with the same delay rules spelled out
/// directly. Returns the minimum completion time, or nullopt.
inline std::optional<double> brute_force_completion(const Vehicle& v,
                                                    const std::vector<Request>& reqs,
                                                    const RoadNetwork& net,
                                                    const ServiceLimits& lim, double now) {
  struct S {
    RequestId id;
    bool pickup;
    LocationId at;
    double arrival;
    double direct;
    std::optional<double> picked;  // already on board
  };
  std::vector<S> stops;
  for (const auto& p : v.passengers) {
    if (!p.onboard()) stops.push_back({p.id, true, p.origin, p.arrival_time, p.direct_time, {}});
    stops.push_back({p.id, false, p.destination, p.arrival_time, p.direct_time, p.pickup_time});
  }
  for (const auto& r : reqs) {
    const double direct = net.travel_time(r.origin, r.destination);
    stops.push_back({r.id, true, r.origin, r.arrival_time, direct, {}});
    stops.push_back({r.id, false, r.destination, r.arrival_time, direct, {}});
  }
  std::vector<int> perm(stops.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::optional<double> best;
  const double eps = 1e-6;
  do {
    double t = now + v.ready_offset;
    LocationId at = v.location;
    std::map<RequestId, double> picked;
    for (const auto& s : stops) {
      if (s.picked) picked[s.id] = *s.picked;
    }
    bool ok = true;
    int load = 0;
    for (const auto& p : v.passengers) load += p.onboard() ? 1 : 0;
    for (const int k : perm) {
      const auto& s = stops[k];
      t += net.travel_time(at, s.at);
      at = s.at;
      if (s.pickup) {
        if (t - s.arrival > lim.max_pickup_delay + eps || ++load > v.capacity) {
          ok = false;
          break;
        }
        picked[s.id] = t;
      } else {
        const auto it = picked.find(s.id);
        if (it == picked.end() || (t - it->second) - s.direct > lim.max_detour + eps) {
          ok = false;
          break;
        }
        --load;
      }
    }
    if (ok && (!best || t < *best)) best = t;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Replays the service log and lists every violated rule in plain words.
inline std::vector<std::string> audit_log(const SimLog& log, const std::vector<EpochMetrics>& metrics,
                                          const SimConfig& cfg) {
  std::vector<std::string> problems;
  const double eps = 1e-6;
  std::map<RequestId, RequestRecord> requests;
  for (const auto& r : log.requests) {
    if (!requests.emplace(r.id, r).second) problems.push_back("request id reused " + std::to_string(r.id));
  }
  std::map<RequestId, VehicleId> accepted_by;
  for (const auto& o : log.offers) {
    if (!o.accepted) continue;
    if (!accepted_by.emplace(o.request, o.vehicle).second) {
      problems.push_back("request accepted twice " + std::to_string(o.request));
    }
  }
  std::map<RequestId, std::pair<VehicleId, double>> pickups;
  std::set<RequestId> dropped_off;
  std::map<VehicleId, int> onboard;
  for (const auto& e : log.events) {
    const auto req = requests.find(e.request);
    if (req == requests.end()) {
      problems.push_back("service of unknown request " + std::to_string(e.request));
      continue;
    }
    const auto acc = accepted_by.find(e.request);
    if (acc == accepted_by.end() || acc->second != e.vehicle) {
      problems.push_back("request " + std::to_string(e.request) + " served by a vehicle it did not accept");
    }
    if (e.kind == StopKind::Pickup) {
      if (!pickups.emplace(e.request, std::make_pair(e.vehicle, e.time)).second) {
        problems.push_back("request picked up twice " + std::to_string(e.request));
      }
      if (e.time - req->second.arrival_time > cfg.limits.max_pickup_delay + eps) {
        problems.push_back("pickup delay exceeded for " + std::to_string(e.request));
      }
      if (++onboard[e.vehicle] > cfg.capacity) {
        problems.push_back("capacity exceeded on vehicle " + std::to_string(e.vehicle));
      }
    } else {
      const auto p = pickups.find(e.request);
      if (p == pickups.end() || p->second.first != e.vehicle) {
        problems.push_back("dropoff without pickup for " + std::to_string(e.request));
        continue;
      }
      if (!dropped_off.insert(e.request).second) {
        problems.push_back("request dropped off twice " + std::to_string(e.request));
      }
      const double ride = e.time - p->second.second;
      if (ride - req->second.direct_time > cfg.limits.max_detour + eps) {
        problems.push_back("detour exceeded for " + std::to_string(e.request));
      }
      --onboard[e.vehicle];
    }
    if (onboard[e.vehicle] != e.load_after) {
      problems.push_back("logged load disagrees on vehicle " + std::to_string(e.vehicle));
    }
  }
  for (const auto& m : metrics) {
    for (const int seats : m.occupancy) {
      if (seats > cfg.capacity) problems.push_back("committed seats exceed capacity");
    }
  }
  return problems;
}

}  // namespace testsupport
