#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ridepool/network.hpp"
#include "ridepool/rng.hpp"

namespace ridepool {

/// Price multipliers a vehicle may apply to base prices.
inline const std::vector<double> kDefaultPriceFactors{0.8, 0.9, 1.0, 1.1, 1.2};

/// Discretization used to turn a vehicle's surroundings into a table key.
struct ObservationSpec {
  int zones_per_side = 3;
  int count_bins = 4;
  int mean_resolution = 4;  // mean-action entries rounded to multiples of 1/resolution
};

/// Discretized local view of one vehicle: where it is, how crowded its
/// neighborhood is, how much demand it can reach, and the ratio of the two.
struct Observation {
  int zone = 0;
  int neighbor_bin = 0;
  int request_bin = 0;
  int supply_demand_bin = 0;

  std::uint64_t code() const;
  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Logarithmic bin of a count: 0, 1, 2-3, 4-7, ... capped at `bins - 1`.
int count_bin(std::size_t count, int bins);

Observation make_observation(const RoadNetwork& net, LocationId location,
                             std::size_t neighbor_count, std::size_t local_request_count,
                             const ObservationSpec& spec);

/// Average of the neighbors' one-hot actions (uniform when there are none).
struct MeanAction {
  std::vector<double> probs;

  std::uint64_t code(int resolution) const;
};

MeanAction mean_action(std::span<const int> neighbor_actions, std::size_t action_count);

/// Boltzmann distribution exp(beta * q) / sum exp(beta * q).
std::vector<double> softmax(std::span<const double> values, double beta);

/// Index drawn from a discrete distribution using a single uniform draw.
int sample_index(std::span<const double> probs, Rng& rng);

inline double candidate_price(double base, double factor) { return base * factor; }

struct QHyper {
  double alpha = 0.1;
  double gamma = 0.9;
  double beta = 1.0;

  friend bool operator==(const QHyper&, const QHyper&) = default;
};

struct QTransition {
  std::uint64_t obs = 0;
  int action = 0;
  std::uint64_t mean = 0;
  double reward = 0.0;
  bool terminal = false;
  std::uint64_t next_obs = 0;
  std::uint64_t next_mean = 0;
};

/// Tabular mean-field Q function Q(observation, action, mean action).
/// Entries never written read as zero.
class QTable {
 public:
  QTable(std::size_t action_count, QHyper hyper);

  std::size_t action_count() const { return actions_; }
  const QHyper& hyper() const { return hyper_; }
  std::size_t entries() const { return table_.size(); }

  double value(std::uint64_t obs, int action, std::uint64_t mean) const;
  void set(std::uint64_t obs, int action, std::uint64_t mean, double q);
  std::vector<double> values(std::uint64_t obs, std::uint64_t mean) const;

  std::vector<double> policy(std::uint64_t obs, std::uint64_t mean) const;
  int select_action(std::uint64_t obs, std::uint64_t mean, Rng& rng) const;
  int greedy_action(std::uint64_t obs, std::uint64_t mean) const;

  /// Expected value of the next state under the Boltzmann policy.
  double mean_field_value(std::uint64_t obs, std::uint64_t mean) const;

  /// Q <- (1 - alpha) Q + alpha (J + gamma V_MF(next)).
  void update(const QTransition& t);

  void save(std::ostream& out) const;
  static QTable load(std::istream& in);

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  struct Key {
    std::uint64_t obs;
    std::uint64_t mean;
    int action;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  std::size_t actions_;
  QHyper hyper_;
  std::unordered_map<Key, double, KeyHash> table_;
};

}  // namespace ridepool
