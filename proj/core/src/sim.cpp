#include "ridepool/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ridepool {

void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& metrics) {
  out << "epoch,revenue,offers,accepts,served,dropped,distance_m\n";
  char buf[256];
  for (const auto& m : metrics) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%d,%d,%d,%d,%.3f\n", m.epoch, m.revenue, m.offers,
                  m.accepts, m.served, m.dropped, m.distance_m);
    out << buf;
  }
}

std::vector<EpochMetrics> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("epoch,revenue,offers,accepts,served,dropped,distance_m", 0) != 0) {
    throw std::invalid_argument("metrics csv: missing header");
  }
  std::vector<EpochMetrics> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    EpochMetrics m;
    if (!(fields >> m.epoch >> m.revenue >> m.offers >> m.accepts >> m.served >> m.dropped >>
          m.distance_m)) {
      throw std::invalid_argument("metrics csv row " + std::to_string(row) + ": malformed");
    }
    out.push_back(m);
  }
  return out;
}

Learners fresh_learners(const SimConfig& cfg) {
  return Learners{QTable(cfg.price_factors.size(), cfg.q),
                  ValueFunction(cfg.value, cfg.vf_gamma, cfg.vf_learning_rate)};
}

DemandSource DemandSource::replay(std::vector<std::vector<Request>> batches) {
  DemandSource d;
  d.batches_ = std::move(batches);
  return d;
}

DemandSource DemandSource::poisson(std::map<std::uint32_t, double> rates) {
  DemandSource d;
  d.rates_ = std::move(rates);
  return d;
}

DemandSource DemandSource::from_config(const SimConfig& cfg, const RoadNetwork& net) {
  std::vector<double> weight(net.size(), 1.0);
  if (cfg.hotspot_zone >= 0) {
    for (const auto loc : net.locations()) {
      if (net.zone_of(loc, cfg.observation.zones_per_side) == cfg.hotspot_zone) {
        weight[loc.index] = cfg.hotspot_weight;
      }
    }
  }
  double total = 0.0;
  for (const double w : weight) total += w;
  std::map<std::uint32_t, double> rates;
  for (std::uint32_t i = 0; i < weight.size(); ++i) {
    rates[i] = total > 0.0 ? cfg.demand_rate * weight[i] / total : 0.0;
  }
  return poisson(std::move(rates));
}

std::vector<Request> DemandSource::batch(int epoch, double epoch_seconds, const RoadNetwork& net,
                                         Rng& rng) {
  if (batches_) {
    if (epoch < 0 || static_cast<std::size_t>(epoch) >= batches_->size()) return {};
    return (*batches_)[epoch];
  }
  return generate_requests(epoch, epoch_seconds, rates_, net, rng, next_id_);
}

std::shared_ptr<const RoadNetwork> scenario_network(const SimConfig& cfg) {
  if (!cfg.network_file.empty()) {
    return std::make_shared<const RoadNetwork>(read_network_file(cfg.network_file));
  }
  return std::make_shared<const RoadNetwork>(make_grid(cfg.grid));
}

DemandSource scenario_demand(const SimConfig& cfg, const RoadNetwork& net) {
  if (!cfg.requests_file.empty()) {
    return DemandSource::replay(load_requests_file(cfg.requests_file, net, cfg.epoch_seconds));
  }
  return DemandSource::from_config(cfg, net);
}

Simulator::Simulator(SimConfig cfg, std::shared_ptr<const RoadNetwork> net, DemandSource demand,
                     Learners learners, RunMode mode)
    : cfg_(std::move(cfg)),
      net_(std::move(net)),
      demand_(std::move(demand)),
      learners_(std::move(learners)),
      mode_(mode),
      demand_rng_(substream(cfg_.seed, "demand")),
      acceptance_rng_(substream(cfg_.seed, "acceptance")),
      pricing_rng_(substream(cfg_.seed, "pricing")) {
  cfg_.validate();
  if (!net_) throw std::invalid_argument("Simulator: no network");
  if (learners_.q.action_count() != cfg_.price_factors.size()) {
    throw std::invalid_argument("Simulator: q-table action count does not match price_factors");
  }
  Rng fleet_rng = substream(cfg_.seed, "fleet");
  const auto n = static_cast<double>(net_->size());
  for (int i = 0; i < cfg_.fleet_size; ++i) {
    Vehicle v;
    v.id = static_cast<VehicleId>(i);
    v.location = LocationId{static_cast<std::uint32_t>(uniform01(fleet_rng) * n)};
    v.capacity = cfg_.capacity;
    vehicles_.push_back(std::move(v));
  }
  last_action_.assign(vehicles_.size(), -1);
  pending_q_.assign(vehicles_.size(), std::nullopt);
  last_post_key_.assign(vehicles_.size(), std::nullopt);
}

int Simulator::fixed_action() const {
  const auto it = std::find(cfg_.price_factors.begin(), cfg_.price_factors.end(), 1.0);
  return static_cast<int>(it - cfg_.price_factors.begin());
}

void Simulator::advance_vehicles(double target, EpochMetrics& m) {
  for (auto& v : vehicles_) {
    double t = clock_;
    const double before = v.cumulative_distance;
    while (true) {
      if (v.ready_offset > 0.0) {
        if (t + v.ready_offset <= target + kTimeEps) {
          t += v.ready_offset;
          v.ready_offset = 0.0;
        } else {
          v.ready_offset -= target - t;
          break;
        }
      }
      while (!v.route_plan.empty() && v.route_plan.front().location == v.location) {
        const Stop stop = v.route_plan.front();
        v.route_plan.erase(v.route_plan.begin());
        auto rider = std::find_if(v.passengers.begin(), v.passengers.end(),
                                  [&](const Passenger& p) { return p.id == stop.request; });
        if (rider == v.passengers.end()) {
          throw std::logic_error("vehicle " + std::to_string(v.id) + " plan serves unknown request " +
                                 std::to_string(stop.request));
        }
        if (stop.kind == StopKind::Pickup) {
          rider->pickup_time = t;
        } else {
          v.passengers.erase(rider);
        }
        int load = 0;
        for (const auto& p : v.passengers) load += p.onboard() ? 1 : 0;
        log_.events.push_back(ServiceEvent{epoch_, t, v.id, stop.request, stop.kind, load});
      }
      if (v.route_plan.empty() || t >= target - kTimeEps) break;
      const LocationId next = net_->next_hop(v.location, v.route_plan.front().location);
      v.cumulative_distance += net_->path_distance(v.location, next);
      v.ready_offset = net_->travel_time(v.location, next);
      v.location = next;
    }
    m.distance_m += v.cumulative_distance - before;
  }
  clock_ = target;
}

std::vector<int> Simulator::choose_prices(const std::vector<Request>& batch,
                                          std::vector<QTransition>& q_updates) {
  const std::size_t n = vehicles_.size();
  std::vector<int> actions(n, fixed_action());
  if (cfg_.policy.pricing == PricingKind::Fixed) return actions;

  std::vector<Located> fleet;
  fleet.reserve(n);
  for (const auto& v : vehicles_) fleet.push_back(Located{v.id, v.location});

  const auto& q = learners_.q;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = vehicles_[i];
    const auto neighbors =
        neighbors_within(*net_, v.location, cfg_.neighborhood_radius, fleet, v.id);
    std::size_t reachable = 0;
    for (const auto& r : batch) {
      if (v.ready_offset + net_->travel_time(v.location, r.origin) <=
          cfg_.limits.max_pickup_delay + kTimeEps) {
        ++reachable;
      }
    }
    const auto obs =
        make_observation(*net_, v.location, neighbors.size(), reachable, cfg_.observation).code();
    std::uint64_t mean = 0;
    if (cfg_.policy.pricing == PricingKind::MeanField) {
      std::vector<int> seen;
      for (const auto id : neighbors) {
        if (last_action_[id] >= 0) seen.push_back(last_action_[id]);
      }
      mean = mean_action(seen, cfg_.price_factors.size()).code(cfg_.observation.mean_resolution);
    }
    if (pending_q_[i]) {
      const auto& prev = *pending_q_[i];
      q_updates.push_back(QTransition{prev.obs, prev.action, prev.mean, prev.reward, false, obs, mean});
    }
    actions[i] = q.select_action(obs, mean, pricing_rng_);
    pending_q_[i] = PricingMemory{obs, mean, actions[i], 0.0};
  }
  return actions;
}

EpochMetrics Simulator::step() {
  EpochMetrics m;
  m.epoch = epoch_;
  const double now = epoch_ * cfg_.epoch_seconds;

  // (1) motion up to the decision time.
  advance_vehicles(now, m);

  // (2) batch new requests and price them at base.
  auto batch = demand_.batch(epoch_, cfg_.epoch_seconds, *net_, demand_rng_);
  std::map<RequestId, const Request*> by_id;
  for (auto& r : batch) {
    r.arrival_epoch = epoch_;
    r.arrival_time = now;
    r.base_price = base_price(r, *net_, cfg_.tariff);
    log_.requests.push_back(RequestRecord{r.id, r.origin, r.destination, r.arrival_time,
                                          net_->travel_time(r.origin, r.destination)});
  }
  for (const auto& r : batch) by_id[r.id] = &r;

  // (3) one price factor per vehicle.
  std::vector<QTransition> q_updates;
  const auto actions = choose_prices(batch, q_updates);
  if (observer_.on_prices) {
    std::vector<double> factors;
    for (const int a : actions) factors.push_back(cfg_.price_factors[a]);
    observer_.on_prices(epoch_, factors);
  }

  // (4) feasible trips.
  const auto trips =
      generate_feasible_trips(vehicles_, batch, *net_, cfg_.limits, cfg_.size_cap, now);

  // (5) scores.
  const MatchObjective objective{cfg_.policy.matching, 1.0, 0.0};
  AssignmentProblem problem;
  std::vector<PriceBook> books(vehicles_.size());
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    const double factor = cfg_.price_factors[actions[i]];
    auto& book = books[i];
    for (const auto& trip : trips[i]) {
      for (const auto id : trip.requests) {
        const auto* r = by_id.at(id);
        book.emplace(id, PriceQuote{candidate_price(r->base_price, factor), r->base_price});
      }
    }
    VehicleCandidates vc{vehicles_[i].id, {}};
    for (const auto& trip : trips[i]) {
      const auto post = post_decision_state(vehicles_[i], trip, epoch_, *net_, cfg_.value);
      vc.candidates.push_back(Candidate{
          trip.requests, score_trip(trip, post, book, learners_.vf, objective, cfg_.sensitivity)});
    }
    problem.vehicles.push_back(std::move(vc));
  }
  if (observer_.on_problem) observer_.on_problem(epoch_, problem);

  // (6) central assignment.
  const auto solution = solve(problem);
  if (!is_feasible(problem, solution)) {
    throw std::logic_error("epoch " + std::to_string(epoch_) +
                           ": assignment violates vehicle or request uniqueness");
  }

  // (7) offers, acceptance and plan commitment; (8) reward routing.
  std::vector<std::pair<std::uint64_t, std::pair<double, std::optional<std::uint64_t>>>> td_updates;
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    auto& v = vehicles_[i];
    const auto& chosen = trips[i][solution.choice[i]];
    const double factor = cfg_.price_factors[actions[i]];
    std::vector<Request> accepted;
    double reward = 0.0;
    for (const auto id : chosen.requests) {
      const auto* r = by_id.at(id);
      const double quoted = books[i].at(id).quoted;
      const double p = acceptance_probability(quoted, r->base_price, cfg_.sensitivity);
      const bool ok = sample_acceptance(p, acceptance_rng_);
      ++m.offers;
      log_.offers.push_back(OfferRecord{epoch_, v.id, id, factor, r->base_price, quoted, ok});
      if (ok) {
        accepted.push_back(*r);
        accepted.back().quoted_price = quoted;
        reward += quoted;
      }
    }

    Trip realized;
    if (accepted.size() == chosen.requests.size()) {
      realized = chosen;
    } else {
      auto shrunk = feasible_insertion(v, accepted, *net_, cfg_.limits, now);
      if (!shrunk) {
        throw std::logic_error("epoch " + std::to_string(epoch_) + ": accepted subset for vehicle " +
                               std::to_string(v.id) + " is infeasible");
      }
      realized = std::move(*shrunk);
    }
    const auto post = post_decision_state(v, realized, epoch_, *net_, cfg_.value);
    for (const auto& r : accepted) {
      v.passengers.push_back(Passenger{r.id, r.origin, r.destination, r.arrival_time,
                                       net_->travel_time(r.origin, r.destination), std::nullopt});
    }
    v.route_plan = realized.plan;

    m.accepts += static_cast<int>(accepted.size());
    m.revenue += reward;

    if (pending_q_[i]) pending_q_[i]->reward = reward;
    last_action_[i] = cfg_.policy.pricing == PricingKind::Fixed ? -1 : actions[i];
    const auto key = post.feature_key();
    if (last_post_key_[i]) td_updates.push_back({*last_post_key_[i], {reward, key}});
    last_post_key_[i] = key;
  }
  m.served = m.accepts;
  m.dropped = static_cast<int>(batch.size()) - m.served;

  // (9) learning at the barrier.
  if (mode_ == RunMode::Train) {
    for (const auto& t : q_updates) learners_.q.update(t);
    if (cfg_.policy.matching != MatchMode::Immediate) {
      for (const auto& [state, target] : td_updates) {
        learners_.vf.td_update(state, target.first, target.second);
      }
    }
  }

  // (10) metrics.
  for (const auto& v : vehicles_) m.occupancy.push_back(static_cast<int>(v.passengers.size()));
  ++epoch_;
  return m;
}

RunResult run(const SimConfig& cfg, std::shared_ptr<const RoadNetwork> net, DemandSource demand,
              Learners learners, RunMode mode, SimObserver observer) {
  Simulator sim(cfg, std::move(net), std::move(demand), std::move(learners), mode);
  sim.set_observer(std::move(observer));
  RunResult out{{}, sim.learners(), {}};
  for (int t = 0; t < cfg.horizon; ++t) out.metrics.push_back(sim.step());
  out.learners = sim.learners();
  out.log = sim.log();
  return out;
}

void save_checkpoint(const std::string& prefix, const Learners& learners) {
  std::ofstream q(prefix + ".q");
  std::ofstream v(prefix + ".vf");
  if (!q || !v) throw std::runtime_error("cannot write checkpoint " + prefix + ".{q,vf}");
  learners.q.save(q);
  learners.vf.save(v);
  if (!q || !v) throw std::runtime_error("failed writing checkpoint " + prefix);
}

Learners load_checkpoint(const std::string& prefix) {
  std::ifstream q(prefix + ".q");
  std::ifstream v(prefix + ".vf");
  if (!q || !v) throw std::runtime_error("cannot open checkpoint " + prefix + ".{q,vf}");
  try {
    return Learners{QTable::load(q), ValueFunction::load(v)};
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(prefix + ": " + e.what());
  }
}

}  // namespace ridepool
