#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "ridepool/demand.hpp"
#include "ridepool/matching.hpp"
#include "ridepool/pricing.hpp"
#include "ridepool/trip.hpp"

namespace ridepool {

enum class PricingKind { MeanField, Independent, Fixed };

/// One row of the approach matrix: a pricing learner paired with a matching
/// objective.
struct Policy {
  PricingKind pricing = PricingKind::MeanField;
  MatchMode matching = MatchMode::Expected;

  friend bool operator==(const Policy&, const Policy&) = default;
};

/// Parses M&N-E, M&N-N, M&IR, Q&N-E, Q&N-N, F&N-E or F&IR.
Policy parse_policy(const std::string& code);
std::string policy_code(const Policy& p);
const std::vector<std::string>& policy_codes();

struct SimConfig {
  // Scenario: a grid unless `network_file` is set.
  std::string network_file;
  GridSpec grid{};
  // Demand: replayed from `requests_file` when set, otherwise Poisson arrivals
  // with `demand_rate` expected requests per epoch spread over all locations;
  // locations in the hotspot zone get `hotspot_weight` times the base share.
  std::string requests_file;
  double demand_rate = 5.0;
  double hotspot_weight = 1.0;
  int hotspot_zone = -1;

  int fleet_size = 50;
  int capacity = 2;
  int size_cap = 2;
  double epoch_seconds = 60.0;
  ServiceLimits limits{};
  Policy policy{};
  SensitivityParams sensitivity{};
  Tariff tariff{};
  std::vector<double> price_factors = kDefaultPriceFactors;

  QHyper q{};
  double vf_gamma = 0.9;
  double vf_learning_rate = 0.1;
  double neighborhood_radius = 300.0;
  ObservationSpec observation{};
  ValueSpec value{};

  std::uint64_t seed = 1;
  int horizon = 60;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

/// Applies `key = value` lines (`#` comments, blank lines ignored) on top of
/// `base`. Unknown keys are rejected with their line number.
SimConfig parse_config(std::istream& in, SimConfig base = {});
SimConfig load_config_file(const std::string& path, SimConfig base = {});
/// Applies one key; used by the parser and by command-line overrides.
void apply_config_value(SimConfig& cfg, const std::string& key, const std::string& value);

/// Splits `key = value` text into ordered pairs (shared by experiment specs).
/// When `lines` is given it receives the source line of each pair.
std::vector<std::pair<std::string, std::string>> read_key_values(
    std::istream& in, std::vector<std::size_t>* lines = nullptr);

}  // namespace ridepool
