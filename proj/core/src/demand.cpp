#include "ridepool/demand.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ridepool {

SensitivityParams parse_sensitivity(const std::string& text) {
  if (text == "uber") return SensitivityParams::uber();
  if (text == "conscious") return SensitivityParams::conscious();
  const auto comma = text.find(',');
  if (comma != std::string::npos) {
    SensitivityParams s{std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
    if (!(s.k1 > 0.0)) throw std::invalid_argument("sensitivity k1 must be positive");
    return s;
  }
  throw std::invalid_argument("unknown sensitivity preset `" + text +
                              "` (expected uber, conscious or k1,k2)");
}

double base_price(const Request& req, const RoadNetwork& net, const Tariff& tariff) {
  const double tt = net.travel_time(req.origin, req.destination);
  if (req.origin == req.destination || !(tt > 0.0)) {
    throw std::invalid_argument("request " + std::to_string(req.id) +
                                " has zero travel time; origin must differ from destination");
  }
  const double price = tariff.flag + tariff.per_second * tt;
  if (!(price > 0.0)) {
    throw std::invalid_argument("tariff yields a non-positive base price");
  }
  return price;
}

double acceptance_probability(double quoted, double base, const SensitivityParams& s) {
  if (!(base > 0.0)) throw std::invalid_argument("base price must be positive");
  if (quoted < 0.0) throw std::invalid_argument("quoted price must be non-negative");
  return 1.0 / (1.0 + std::exp(s.k1 * quoted / base - s.k2));
}

bool sample_acceptance(double p, Rng& rng) { return uniform01(rng) < p; }

std::vector<Request> generate_requests(int epoch, double epoch_seconds,
                                       const std::map<std::uint32_t, double>& zone_rates,
                                       const RoadNetwork& net, Rng& rng, RequestId& next_id) {
  std::vector<Request> out;
  const auto n = static_cast<std::uint32_t>(net.size());
  for (const auto& [origin, rate] : zone_rates) {
    if (rate < 0.0) throw std::invalid_argument("negative demand rate");
    if (origin >= n) throw std::out_of_range("demand zone outside network");
    if (rate == 0.0) continue;
    const auto count = std::poisson_distribution<int>(rate)(rng);
    for (int k = 0; k < count; ++k) {
      // Uniform over the n - 1 other locations.
      auto dest = static_cast<std::uint32_t>(uniform01(rng) * (n - 1));
      if (dest >= origin) ++dest;
      Request r;
      r.id = next_id++;
      r.origin = LocationId{origin};
      r.destination = LocationId{dest};
      r.arrival_epoch = epoch;
      r.arrival_time = epoch * epoch_seconds;
      out.push_back(r);
    }
  }
  return out;
}

namespace {

std::int64_t parse_int(const std::string& field, std::size_t row, const char* what) {
  std::int64_t value = 0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw std::invalid_argument("requests csv row " + std::to_string(row) + ": bad " + what +
                                " `" + field + "`");
  }
  return value;
}

}  // namespace

std::vector<std::vector<Request>> load_requests(std::istream& csv, const RoadNetwork& net,
                                                double epoch_seconds) {
  std::string line;
  if (!std::getline(csv, line)) return {};
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "epoch,origin,dest") {
    throw std::invalid_argument("requests csv: expected header `epoch,origin,dest`");
  }
  std::vector<std::vector<Request>> batches;
  RequestId next_id = 0;
  std::size_t row = 1;
  while (std::getline(csv, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 3) {
      throw std::invalid_argument("requests csv row " + std::to_string(row) + ": expected 3 fields, got " +
                                  std::to_string(fields.size()));
    }
    const auto epoch = parse_int(fields[0], row, "epoch");
    if (epoch < 0) {
      throw std::invalid_argument("requests csv row " + std::to_string(row) + ": negative epoch");
    }
    const auto origin = net.find(parse_int(fields[1], row, "origin"));
    const auto dest = net.find(parse_int(fields[2], row, "dest"));
    if (!origin || !dest) {
      throw std::invalid_argument("requests csv row " + std::to_string(row) + ": unknown location");
    }
    if (*origin == *dest) {
      throw std::invalid_argument("requests csv row " + std::to_string(row) +
                                  ": origin equals destination");
    }
    if (static_cast<std::size_t>(epoch) >= batches.size()) batches.resize(epoch + 1);
    Request r;
    r.id = next_id++;
    r.origin = *origin;
    r.destination = *dest;
    r.arrival_epoch = static_cast<int>(epoch);
    r.arrival_time = static_cast<double>(epoch) * epoch_seconds;
    batches[epoch].push_back(r);
  }
  return batches;
}

std::vector<std::vector<Request>> load_requests_file(const std::string& path,
                                                     const RoadNetwork& net,
                                                     double epoch_seconds) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open requests file " + path);
  try {
    return load_requests(in, net, epoch_seconds);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

}  // namespace ridepool
