#include "ridepool/matching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ridepool/checkpoint.hpp"

namespace ridepool {

namespace {
constexpr const char* kVMagic = "ridepool-vfunc";
constexpr int kVVersion = 1;
}  // namespace

double trip_revenue(const Trip& trip, const PriceBook& prices, MatchMode mode,
                    const SensitivityParams& sensitivity) {
  double total = 0.0;
  for (const auto id : trip.requests) {
    const auto it = prices.find(id);
    if (it == prices.end()) {
      throw std::invalid_argument("trip_revenue: no price for request " + std::to_string(id));
    }
    const auto& q = it->second;
    if (mode == MatchMode::Nominal) {
      total += q.quoted;
    } else {
      total += q.quoted * acceptance_probability(q.quoted, q.base, sensitivity);
    }
  }
  return total;
}

std::uint64_t PostDecisionState::feature_key() const {
  return (static_cast<std::uint64_t>(zone) << 32) |
         (static_cast<std::uint64_t>(committed_seats) << 16) |
         static_cast<std::uint64_t>(time_bucket);
}

PostDecisionState post_decision_state(const Vehicle& v, const Trip& trip, int epoch,
                                      const RoadNetwork& net, const ValueSpec& spec) {
  PostDecisionState s;
  s.plan = trip.plan;
  s.final_location = trip.plan.empty() ? v.location : trip.plan.back().location;
  s.zone = net.zone_of(s.final_location, spec.zones_per_side);
  s.committed_seats = static_cast<int>(v.passengers.size() + trip.requests.size());
  const int day = std::max(spec.day_epochs, 1);
  const int in_day = ((epoch % day) + day) % day;
  s.time_bucket = static_cast<int>(static_cast<long long>(in_day) * spec.time_buckets / day);
  return s;
}

ValueFunction::ValueFunction(ValueSpec spec, double gamma, double learning_rate)
    : spec_(spec), gamma_(gamma), learning_rate_(learning_rate) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("ValueFunction: gamma must lie in [0, 1]");
  }
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw std::invalid_argument("ValueFunction: learning rate must lie in (0, 1]");
  }
}

double ValueFunction::value(std::uint64_t key) const {
  const auto it = weights_.find(key);
  return it == weights_.end() ? 0.0 : it->second;
}

void ValueFunction::td_update(std::uint64_t state, double reward,
                              std::optional<std::uint64_t> next) {
  const double target = next ? reward + gamma_ * value(*next) : reward;
  auto& w = weights_[state];
  w += learning_rate_ * (target - w);
  if (!std::isfinite(w)) throw std::runtime_error("ValueFunction: value diverged");
}

void ValueFunction::save(std::ostream& out) const {
  std::vector<std::pair<std::uint64_t, double>> rows(weights_.begin(), weights_.end());
  std::sort(rows.begin(), rows.end());
  out << kVMagic << ' ' << kVVersion << '\n';
  out << "zones " << spec_.zones_per_side << " buckets " << spec_.time_buckets << " day "
      << spec_.day_epochs << '\n';
  out << "gamma " << format_exact(gamma_) << " lr " << format_exact(learning_rate_) << '\n';
  out << "entries " << rows.size() << '\n';
  for (const auto& [key, w] : rows) out << key << ' ' << format_exact(w) << '\n';
}

ValueFunction ValueFunction::load(std::istream& in) {
  expect_token(in, kVMagic);
  if (read_token<int>(in, "version") != kVVersion) {
    throw std::invalid_argument("checkpoint: unsupported value-function version");
  }
  ValueSpec spec;
  expect_token(in, "zones");
  spec.zones_per_side = read_token<int>(in, "zones");
  expect_token(in, "buckets");
  spec.time_buckets = read_token<int>(in, "buckets");
  expect_token(in, "day");
  spec.day_epochs = read_token<int>(in, "day");
  expect_token(in, "gamma");
  const double gamma = read_exact(in, "gamma");
  expect_token(in, "lr");
  const double lr = read_exact(in, "learning rate");
  ValueFunction vf(spec, gamma, lr);
  expect_token(in, "entries");
  const auto count = read_token<std::size_t>(in, "entry count");
  for (std::size_t i = 0; i < count; ++i) {
    const auto key = read_token<std::uint64_t>(in, "feature key");
    vf.weights_[key] = read_exact(in, "weight");
  }
  return vf;
}

double score_trip(const Trip& trip, const PostDecisionState& post, const PriceBook& prices,
                  const ValueFunction& vf, const MatchObjective& objective,
                  const SensitivityParams& sensitivity) {
  double score = objective.revenue_weight *
                     trip_revenue(trip, prices, objective.mode, sensitivity) +
                 objective.constant;
  if (objective.mode != MatchMode::Immediate) score += vf.gamma() * vf.value(post);
  return score;
}

}  // namespace ridepool
