#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ridepool/network.hpp"
#include "ridepool/rng.hpp"

namespace ridepool {

using RequestId = std::uint32_t;

struct Request {
  RequestId id = 0;
  LocationId origin;
  LocationId destination;
  int arrival_epoch = 0;
  double arrival_time = 0.0;  // seconds since simulation start
  double base_price = 0.0;
  std::optional<double> quoted_price;
};

/// Logistic acceptance curve p = 1 / (1 + exp(k1 * quoted/base - k2)).
struct SensitivityParams {
  double k1 = 0.67;
  double k2 = 1.69;

  static SensitivityParams uber() { return {0.67, 1.69}; }
  /// Slope and intercept both scaled by 10.
  static SensitivityParams conscious() { return {6.7, 16.9}; }
};

/// Parses "uber", "conscious" or an explicit "k1,k2" pair.
SensitivityParams parse_sensitivity(const std::string& text);

struct Tariff {
  double flag = 2.5;
  double per_second = 0.01;
};

double base_price(const Request& req, const RoadNetwork& net, const Tariff& tariff);

double acceptance_probability(double quoted, double base, const SensitivityParams& s);

bool sample_acceptance(double p, Rng& rng);

/// Draws Poisson(rate) requests per origin with destinations uniform over the
/// other locations. Ids are assigned consecutively from `next_id`, which is
/// advanced. Base prices are left at zero for the caller to fill in.
std::vector<Request> generate_requests(int epoch, double epoch_seconds,
                                       const std::map<std::uint32_t, double>& zone_rates,
                                       const RoadNetwork& net, Rng& rng, RequestId& next_id);

/// Reads the `epoch,origin,dest` CSV into per-epoch batches. The returned
/// vector has one entry per epoch from 0 to the largest epoch present.
std::vector<std::vector<Request>> load_requests(std::istream& csv, const RoadNetwork& net,
                                                double epoch_seconds);
std::vector<std::vector<Request>> load_requests_file(const std::string& path,
                                                     const RoadNetwork& net,
                                                     double epoch_seconds);

}  // namespace ridepool
