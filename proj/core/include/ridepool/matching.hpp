#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ridepool/demand.hpp"
#include "ridepool/network.hpp"
#include "ridepool/trip.hpp"

namespace ridepool {

/// How a trip's revenue enters the matching score.
enum class MatchMode {
  Expected,   // N-E: quoted price weighted by acceptance probability, plus future value
  Nominal,    // N-N: quoted price, plus future value
  Immediate,  // IR: expected revenue only, no future value
};

/// Linear matching objective o = revenue_weight * revenue + constant.
/// Plain revenue is (1, 0); profit subtracts a per-trip cost through the
/// constant; driver-history balancing adds historical earnings.
struct MatchObjective {
  MatchMode mode = MatchMode::Expected;
  double revenue_weight = 1.0;
  double constant = 0.0;
};

struct PriceQuote {
  double quoted = 0.0;
  double base = 0.0;
};

using PriceBook = std::map<RequestId, PriceQuote>;

double trip_revenue(const Trip& trip, const PriceBook& prices, MatchMode mode,
                    const SensitivityParams& sensitivity);

struct ValueSpec {
  int zones_per_side = 3;
  int time_buckets = 24;
  int day_epochs = 1440;

  friend bool operator==(const ValueSpec&, const ValueSpec&) = default;
};

/// Vehicle state right after committing to a trip and before new demand
/// arrives. Fully determined by the vehicle, the trip and the epoch.
struct PostDecisionState {
  LocationId final_location;
  int zone = 0;
  int committed_seats = 0;
  int time_bucket = 0;
  std::vector<Stop> plan;

  std::uint64_t feature_key() const;
  friend bool operator==(const PostDecisionState&, const PostDecisionState&) = default;
};

PostDecisionState post_decision_state(const Vehicle& v, const Trip& trip, int epoch,
                                      const RoadNetwork& net, const ValueSpec& spec);

/// Value of post-decision states, shared by all vehicles and evaluated per
/// vehicle. Features are one-hot over (zone of last planned stop, committed
/// seats, time-of-day bucket), so the weights form a table.
class ValueFunction {
 public:
  ValueFunction(ValueSpec spec, double gamma, double learning_rate);

  const ValueSpec& spec() const { return spec_; }
  double gamma() const { return gamma_; }
  double learning_rate() const { return learning_rate_; }
  std::size_t entries() const { return weights_.size(); }

  double value(const PostDecisionState& s) const { return value(s.feature_key()); }
  double value(std::uint64_t key) const;

  /// One-step TD: V(s_t) moves toward reward + gamma V(s_{t+1}); a missing
  /// successor makes the target the reward alone.
  void td_update(std::uint64_t state, double reward, std::optional<std::uint64_t> next);

  void save(std::ostream& out) const;
  static ValueFunction load(std::istream& in);

  friend bool operator==(const ValueFunction&, const ValueFunction&) = default;

 private:
  ValueSpec spec_;
  double gamma_;
  double learning_rate_;
  std::unordered_map<std::uint64_t, double> weights_;
};

/// Score handed to the assignment solver:
/// weight * revenue + constant + gamma * V(post-decision state), with the
/// future term dropped in Immediate mode.
double score_trip(const Trip& trip, const PostDecisionState& post, const PriceBook& prices,
                  const ValueFunction& vf, const MatchObjective& objective,
                  const SensitivityParams& sensitivity);

}  // namespace ridepool
