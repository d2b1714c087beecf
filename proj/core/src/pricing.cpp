#include "ridepool/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "ridepool/checkpoint.hpp"

namespace ridepool {

namespace {
constexpr const char* kQMagic = "ridepool-qtable";
constexpr int kQVersion = 1;
}  // namespace

std::uint64_t Observation::code() const {
  // 16 bits per field.
  return (static_cast<std::uint64_t>(zone) << 48) |
         (static_cast<std::uint64_t>(neighbor_bin) << 32) |
         (static_cast<std::uint64_t>(request_bin) << 16) |
         static_cast<std::uint64_t>(supply_demand_bin);
}

int count_bin(std::size_t count, int bins) {
  int bin = 0;
  while (count > 0 && bin < bins - 1) {
    ++bin;
    count >>= 1;
  }
  return bin;
}

Observation make_observation(const RoadNetwork& net, LocationId location,
                             std::size_t neighbor_count, std::size_t local_request_count,
                             const ObservationSpec& spec) {
  Observation obs;
  obs.zone = net.zone_of(location, spec.zones_per_side);
  obs.neighbor_bin = count_bin(neighbor_count, spec.count_bins);
  obs.request_bin = count_bin(local_request_count, spec.count_bins);
  const double ratio = static_cast<double>(neighbor_count + 1) /
                       static_cast<double>(local_request_count + 1);
  obs.supply_demand_bin = ratio < 0.5 ? 0 : ratio < 1.0 ? 1 : ratio < 2.0 ? 2 : 3;
  return obs;
}

std::uint64_t MeanAction::code(int resolution) const {
  std::uint64_t code = 0;
  for (const double p : probs) {
    const auto level = static_cast<std::uint64_t>(std::lround(p * resolution));
    code = code * static_cast<std::uint64_t>(resolution + 1) + level;
  }
  return code;
}

MeanAction mean_action(std::span<const int> neighbor_actions, std::size_t action_count) {
  MeanAction mean;
  if (neighbor_actions.empty()) {
    mean.probs.assign(action_count, 1.0 / static_cast<double>(action_count));
    return mean;
  }
  mean.probs.assign(action_count, 0.0);
  for (const int a : neighbor_actions) {
    if (a < 0 || static_cast<std::size_t>(a) >= action_count) {
      throw std::out_of_range("mean_action: action index out of range");
    }
    mean.probs[a] += 1.0;
  }
  for (auto& p : mean.probs) p /= static_cast<double>(neighbor_actions.size());
  return mean;
}

std::vector<double> softmax(std::span<const double> values, double beta) {
  if (!std::isfinite(beta) || beta < 0.0) {
    throw std::invalid_argument("softmax: beta must be finite and non-negative");
  }
  std::vector<double> out(values.size());
  if (values.empty()) return out;
  double top = -std::numeric_limits<double>::infinity();
  for (const double v : values) top = std::max(top, v);
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    // Differences first: beta * value alone can overflow.
    out[i] = beta == 0.0 ? 1.0 : std::exp(beta * (values[i] - top));
    total += out[i];
  }
  for (auto& p : out) p /= total;
  return out;
}

int sample_index(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

std::size_t QTable::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = k.obs * 0x9E3779B97F4A7C15ULL;
  h ^= k.mean + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
  h ^= static_cast<std::uint64_t>(k.action) + (h << 6) + (h >> 2);
  return static_cast<std::size_t>(h);
}

QTable::QTable(std::size_t action_count, QHyper hyper) : actions_(action_count), hyper_(hyper) {
  if (action_count == 0) throw std::invalid_argument("QTable: empty action set");
  if (!(hyper.alpha > 0.0 && hyper.alpha <= 1.0)) {
    throw std::invalid_argument("QTable: alpha must lie in (0, 1]");
  }
  if (!(hyper.gamma >= 0.0 && hyper.gamma < 1.0)) {
    throw std::invalid_argument("QTable: gamma must lie in [0, 1)");
  }
  if (!(hyper.beta >= 0.0) || !std::isfinite(hyper.beta)) {
    throw std::invalid_argument("QTable: beta must be finite and non-negative");
  }
}

double QTable::value(std::uint64_t obs, int action, std::uint64_t mean) const {
  const auto it = table_.find(Key{obs, mean, action});
  return it == table_.end() ? 0.0 : it->second;
}

void QTable::set(std::uint64_t obs, int action, std::uint64_t mean, double q) {
  if (action < 0 || static_cast<std::size_t>(action) >= actions_) {
    throw std::out_of_range("QTable: action index out of range");
  }
  table_[Key{obs, mean, action}] = q;
}

std::vector<double> QTable::values(std::uint64_t obs, std::uint64_t mean) const {
  std::vector<double> q(actions_);
  for (std::size_t a = 0; a < actions_; ++a) q[a] = value(obs, static_cast<int>(a), mean);
  return q;
}

std::vector<double> QTable::policy(std::uint64_t obs, std::uint64_t mean) const {
  return softmax(values(obs, mean), hyper_.beta);
}

int QTable::select_action(std::uint64_t obs, std::uint64_t mean, Rng& rng) const {
  return sample_index(policy(obs, mean), rng);
}

int QTable::greedy_action(std::uint64_t obs, std::uint64_t mean) const {
  const auto q = values(obs, mean);
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

double QTable::mean_field_value(std::uint64_t obs, std::uint64_t mean) const {
  const auto q = values(obs, mean);
  const auto pi = softmax(q, hyper_.beta);
  double v = 0.0;
  for (std::size_t a = 0; a < actions_; ++a) v += pi[a] * q[a];
  return v;
}

void QTable::update(const QTransition& t) {
  double target = t.reward;
  if (!t.terminal && hyper_.gamma > 0.0) {
    target += hyper_.gamma * mean_field_value(t.next_obs, t.next_mean);
  }
  const double old = value(t.obs, t.action, t.mean);
  set(t.obs, t.action, t.mean, (1.0 - hyper_.alpha) * old + hyper_.alpha * target);
}

void QTable::save(std::ostream& out) const {
  std::vector<std::pair<Key, double>> rows(table_.begin(), table_.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first.obs, a.first.mean, a.first.action) <
           std::tie(b.first.obs, b.first.mean, b.first.action);
  });
  out << kQMagic << ' ' << kQVersion << '\n';
  out << "actions " << actions_ << '\n';
  out << "alpha " << format_exact(hyper_.alpha) << " gamma " << format_exact(hyper_.gamma)
      << " beta " << format_exact(hyper_.beta) << '\n';
  out << "entries " << rows.size() << '\n';
  for (const auto& [key, q] : rows) {
    out << key.obs << ' ' << key.mean << ' ' << key.action << ' ' << format_exact(q) << '\n';
  }
}

QTable QTable::load(std::istream& in) {
  expect_token(in, kQMagic);
  if (read_token<int>(in, "version") != kQVersion) {
    throw std::invalid_argument("checkpoint: unsupported q-table version");
  }
  expect_token(in, "actions");
  const auto actions = read_token<std::size_t>(in, "action count");
  QHyper hyper;
  expect_token(in, "alpha");
  hyper.alpha = read_exact(in, "alpha");
  expect_token(in, "gamma");
  hyper.gamma = read_exact(in, "gamma");
  expect_token(in, "beta");
  hyper.beta = read_exact(in, "beta");
  QTable table(actions, hyper);
  expect_token(in, "entries");
  const auto count = read_token<std::size_t>(in, "entry count");
  for (std::size_t i = 0; i < count; ++i) {
    const auto obs = read_token<std::uint64_t>(in, "observation");
    const auto mean = read_token<std::uint64_t>(in, "mean action");
    const auto action = read_token<int>(in, "action");
    table.set(obs, action, mean, read_exact(in, "q value"));
  }
  return table;
}

}  // namespace ridepool
