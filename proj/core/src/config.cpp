#include "ridepool/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ridepool {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) {
    throw std::invalid_argument("config key `" + key + "`: expected a number, got `" + v + "`");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) {
    throw std::invalid_argument("config key `" + key + "`: expected an integer, got `" + v + "`");
  }
  return out;
}

}  // namespace

Policy parse_policy(const std::string& code) {
  static const std::map<std::string, Policy> table{
      {"M&N-E", {PricingKind::MeanField, MatchMode::Expected}},
      {"M&N-N", {PricingKind::MeanField, MatchMode::Nominal}},
      {"M&IR", {PricingKind::MeanField, MatchMode::Immediate}},
      {"Q&N-E", {PricingKind::Independent, MatchMode::Expected}},
      {"Q&N-N", {PricingKind::Independent, MatchMode::Nominal}},
      {"F&N-E", {PricingKind::Fixed, MatchMode::Expected}},
      {"F&IR", {PricingKind::Fixed, MatchMode::Immediate}},
  };
  const auto it = table.find(code);
  if (it == table.end()) throw std::invalid_argument("unknown policy code `" + code + "`");
  return it->second;
}

std::string policy_code(const Policy& p) {
  const char* pricing = p.pricing == PricingKind::MeanField     ? "M"
                        : p.pricing == PricingKind::Independent ? "Q"
                                                                : "F";
  const char* matching = p.matching == MatchMode::Expected  ? "N-E"
                         : p.matching == MatchMode::Nominal ? "N-N"
                                                            : "IR";
  return std::string(pricing) + "&" + matching;
}

const std::vector<std::string>& policy_codes() {
  static const std::vector<std::string> codes{"M&N-E", "M&N-N", "M&IR", "Q&N-E",
                                              "Q&N-N", "F&N-E", "F&IR"};
  return codes;
}

void SimConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (!(epoch_seconds > 0.0)) fail("epoch_seconds must be positive");
  if (!(limits.max_pickup_delay >= 0.0)) fail("tau must be non-negative");
  if (!(limits.max_detour >= 0.0)) fail("lambda must be non-negative");
  if (fleet_size < 0) fail("fleet_size must be non-negative");
  if (capacity < 1) fail("capacity must be at least 1");
  if (size_cap < 0 || size_cap > capacity) fail("size_cap must lie in [0, capacity]");
  if (horizon < 0) fail("horizon must be non-negative");
  if (demand_rate < 0.0 || hotspot_weight < 0.0) fail("demand rates must be non-negative");
  if (!(sensitivity.k1 > 0.0)) fail("k1 must be positive");
  if (price_factors.empty()) fail("price_factors must not be empty");
  for (const double f : price_factors) {
    if (!(f > 0.0)) fail("price factors must be positive");
  }
  if (policy.pricing == PricingKind::Fixed &&
      std::find(price_factors.begin(), price_factors.end(), 1.0) == price_factors.end()) {
    fail("fixed pricing needs factor 1.0 in price_factors");
  }
  if (!(q.alpha > 0.0 && q.alpha <= 1.0)) fail("alpha must lie in (0, 1]");
  if (!(q.gamma >= 0.0 && q.gamma < 1.0)) fail("gamma must lie in [0, 1)");
  if (!(q.beta >= 0.0) || !std::isfinite(q.beta)) fail("beta must be finite and non-negative");
  if (!(vf_gamma >= 0.0 && vf_gamma <= 1.0)) fail("vf_gamma must lie in [0, 1]");
  if (!(vf_learning_rate > 0.0 && vf_learning_rate <= 1.0)) {
    fail("vf_learning_rate must lie in (0, 1]");
  }
  if (!(neighborhood_radius >= 0.0)) fail("neighborhood_radius must be non-negative");
  if (value.time_buckets < 1 || value.day_epochs < 1) fail("time buckets and day length must be positive");
  if (tariff.flag < 0.0 || tariff.per_second < 0.0) fail("tariff must be non-negative");
}

void apply_config_value(SimConfig& cfg, const std::string& key, const std::string& value) {
  const auto num = [&] { return to_double(key, value); };
  const auto integer = [&] { return to_int(key, value); };
  if (key == "network") cfg.network_file = value;
  else if (key == "grid_side") cfg.grid.side = static_cast<int>(integer());
  else if (key == "grid_arc_seconds") cfg.grid.arc_seconds = num();
  else if (key == "grid_spacing_m") cfg.grid.spacing_m = num();
  else if (key == "requests") cfg.requests_file = value;
  else if (key == "demand_rate") cfg.demand_rate = num();
  else if (key == "hotspot_weight") cfg.hotspot_weight = num();
  else if (key == "hotspot_zone") cfg.hotspot_zone = static_cast<int>(integer());
  else if (key == "fleet_size") cfg.fleet_size = static_cast<int>(integer());
  else if (key == "capacity") cfg.capacity = static_cast<int>(integer());
  else if (key == "size_cap") cfg.size_cap = static_cast<int>(integer());
  else if (key == "epoch_seconds") cfg.epoch_seconds = num();
  else if (key == "tau") cfg.limits.max_pickup_delay = num();
  else if (key == "lambda") cfg.limits.max_detour = num();
  else if (key == "policy") cfg.policy = parse_policy(value);
  else if (key == "sensitivity") cfg.sensitivity = parse_sensitivity(value);
  else if (key == "k1") cfg.sensitivity.k1 = num();
  else if (key == "k2") cfg.sensitivity.k2 = num();
  else if (key == "flag") cfg.tariff.flag = num();
  else if (key == "per_second") cfg.tariff.per_second = num();
  else if (key == "price_factors") {
    cfg.price_factors.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.price_factors.push_back(to_double(key, trim(item)));
  }
  else if (key == "alpha") cfg.q.alpha = num();
  else if (key == "gamma") cfg.q.gamma = num();
  else if (key == "beta") cfg.q.beta = num();
  else if (key == "vf_gamma") cfg.vf_gamma = num();
  else if (key == "vf_learning_rate") cfg.vf_learning_rate = num();
  else if (key == "neighborhood_radius") cfg.neighborhood_radius = num();
  else if (key == "zones") {
    cfg.observation.zones_per_side = static_cast<int>(integer());
    cfg.value.zones_per_side = cfg.observation.zones_per_side;
  }
  else if (key == "count_bins") cfg.observation.count_bins = static_cast<int>(integer());
  else if (key == "mean_resolution") cfg.observation.mean_resolution = static_cast<int>(integer());
  else if (key == "time_buckets") cfg.value.time_buckets = static_cast<int>(integer());
  else if (key == "day_epochs") cfg.value.day_epochs = static_cast<int>(integer());
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(integer());
  else if (key == "horizon") cfg.horizon = static_cast<int>(integer());
  else throw std::invalid_argument("unknown config key `" + key + "`");
}

std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in,
                                                                 std::vector<std::size_t>* lines) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected `key = value`");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("line " + std::to_string(line_no) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
    if (lines) lines->push_back(line_no);
  }
  return out;
}

SimConfig parse_config(std::istream& in, SimConfig base) {
  std::vector<std::size_t> lines;
  const auto pairs = read_key_values(in, &lines);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    try {
      apply_config_value(base, pairs[i].first, pairs[i].second);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lines[i]) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

SimConfig load_config_file(const std::string& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  try {
    return parse_config(in, std::move(base));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

}  // namespace ridepool
