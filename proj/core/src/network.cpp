#include "ridepool/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace ridepool {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

struct Adjacency {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> out;
  std::vector<std::vector<std::uint32_t>> in;
};

// Kosaraju with explicit stacks. Returns a component label per node.
std::vector<std::uint32_t> strong_components(const Adjacency& adj) {
  const auto n = static_cast<std::uint32_t>(adj.out.size());
  std::vector<std::uint32_t> order;
  order.reserve(n);
  std::vector<char> seen(n, 0);
  for (std::uint32_t root = 0; root < n; ++root) {
    if (seen[root]) continue;
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{root, 0}};
    seen[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < adj.out[node].size()) {
        const auto succ = adj.out[node][next++].first;
        if (!seen[succ]) {
          seen[succ] = 1;
          stack.emplace_back(succ, 0);
        }
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
  }

  std::vector<std::uint32_t> label(n, kNone);
  std::uint32_t count = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (label[*it] != kNone) continue;
    std::vector<std::uint32_t> stack{*it};
    label[*it] = count;
    while (!stack.empty()) {
      const auto node = stack.back();
      stack.pop_back();
      for (const auto pred : adj.in[node]) {
        if (label[pred] == kNone) {
          label[pred] = count;
          stack.push_back(pred);
        }
      }
    }
    ++count;
  }
  return label;
}

}  // namespace

std::size_t RoadNetwork::cell(LocationId a, LocationId b) const {
  return static_cast<std::size_t>(a.index) * size() + b.index;
}

void RoadNetwork::check(LocationId loc) const {
  if (loc.index >= size()) {
    throw std::out_of_range("location index " + std::to_string(loc.index) + " not in network");
  }
}

double RoadNetwork::travel_time(LocationId from, LocationId to) const {
  check(from);
  check(to);
  return tt_[cell(from, to)];
}

double RoadNetwork::travel_time_by_id(std::int64_t from, std::int64_t to) const {
  return travel_time(at(from), at(to));
}

double RoadNetwork::path_distance(LocationId from, LocationId to) const {
  check(from);
  check(to);
  return dist_[cell(from, to)];
}

LocationId RoadNetwork::next_hop(LocationId from, LocationId to) const {
  check(from);
  check(to);
  return LocationId{next_[cell(from, to)]};
}

std::optional<LocationId> RoadNetwork::find(std::int64_t external_id) const {
  const auto it = std::lower_bound(external_ids_.begin(), external_ids_.end(), external_id);
  if (it == external_ids_.end() || *it != external_id) return std::nullopt;
  return LocationId{static_cast<std::uint32_t>(it - external_ids_.begin())};
}

LocationId RoadNetwork::at(std::int64_t external_id) const {
  if (auto loc = find(external_id)) return *loc;
  throw std::out_of_range("unknown location id " + std::to_string(external_id));
}

std::int64_t RoadNetwork::external_id(LocationId loc) const {
  check(loc);
  return external_ids_[loc.index];
}

int RoadNetwork::zone_of(LocationId loc, int per_side) const {
  check(loc);
  if (per_side <= 1) return 0;
  auto bucket = [per_side](double v, double lo, double hi) {
    if (hi <= lo) return 0;
    const int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * per_side));
    return std::clamp(b, 0, per_side - 1);
  };
  return bucket(ys_[loc.index], min_y_, max_y_) * per_side +
         bucket(xs_[loc.index], min_x_, max_x_);
}

std::vector<LocationId> RoadNetwork::locations() const {
  std::vector<LocationId> out(size());
  for (std::uint32_t i = 0; i < out.size(); ++i) out[i] = LocationId{i};
  return out;
}

RoadNetwork load_network(std::span<const NodeRecord> nodes, std::span<const ArcRecord> arcs) {
  if (nodes.empty()) throw std::invalid_argument("network has no nodes");

  // Sort by external id so dense indices follow id order.
  std::vector<NodeRecord> sorted(nodes.begin(), nodes.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const NodeRecord& a, const NodeRecord& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].id == sorted[i - 1].id) {
      throw std::invalid_argument("duplicate node id " + std::to_string(sorted[i].id));
    }
  }
  std::unordered_map<std::int64_t, std::uint32_t> index;
  for (std::uint32_t i = 0; i < sorted.size(); ++i) index.emplace(sorted[i].id, i);

  Adjacency adj;
  adj.out.resize(sorted.size());
  adj.in.resize(sorted.size());
  for (const auto& arc : arcs) {
    if (!(arc.seconds > 0.0) || !std::isfinite(arc.seconds)) {
      throw std::invalid_argument("arc " + std::to_string(arc.from) + "->" +
                                  std::to_string(arc.to) + " has non-positive travel time");
    }
    const auto from = index.find(arc.from);
    const auto to = index.find(arc.to);
    if (from == index.end() || to == index.end()) {
      throw std::invalid_argument("arc " + std::to_string(arc.from) + "->" +
                                  std::to_string(arc.to) + " references an unknown node");
    }
    if (from->second == to->second) continue;
    adj.out[from->second].emplace_back(to->second, arc.seconds);
    adj.in[to->second].push_back(from->second);
  }

  const auto label = strong_components(adj);
  std::unordered_map<std::uint32_t, std::size_t> comp_size;
  for (const auto l : label) ++comp_size[l];
  // Largest component; on ties the one containing the smallest node id.
  std::uint32_t best = label[0];
  for (std::uint32_t i = 0; i < label.size(); ++i) {
    if (comp_size[label[i]] > comp_size[best]) best = label[i];
  }
  if (comp_size[best] < 2) {
    throw std::invalid_argument("largest strongly connected component has fewer than 2 nodes");
  }

  RoadNetwork net;
  std::vector<std::uint32_t> remap(sorted.size(), kNone);
  for (std::uint32_t i = 0; i < sorted.size(); ++i) {
    if (label[i] != best) continue;
    remap[i] = static_cast<std::uint32_t>(net.external_ids_.size());
    net.external_ids_.push_back(sorted[i].id);
    net.xs_.push_back(sorted[i].x_m);
    net.ys_.push_back(sorted[i].y_m);
  }
  const std::size_t n = net.external_ids_.size();
  net.min_x_ = *std::min_element(net.xs_.begin(), net.xs_.end());
  net.max_x_ = *std::max_element(net.xs_.begin(), net.xs_.end());
  net.min_y_ = *std::min_element(net.ys_.begin(), net.ys_.end());
  net.max_y_ = *std::max_element(net.ys_.begin(), net.ys_.end());

  std::vector<std::vector<std::pair<std::uint32_t, double>>> out(n);
  for (std::uint32_t i = 0; i < sorted.size(); ++i) {
    if (remap[i] == kNone) continue;
    for (const auto& [succ, secs] : adj.out[i]) {
      if (remap[succ] != kNone) out[remap[i]].emplace_back(remap[succ], secs);
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  net.tt_.assign(n * n, inf);
  net.dist_.assign(n * n, 0.0);
  net.next_.assign(n * n, kNone);

  using Item = std::pair<double, std::uint32_t>;
  for (std::uint32_t src = 0; src < n; ++src) {
    double* tt = &net.tt_[src * n];
    double* dist = &net.dist_[src * n];
    std::uint32_t* first = &net.next_[src * n];
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    tt[src] = 0.0;
    first[src] = src;
    heap.emplace(0.0, src);
    while (!heap.empty()) {
      const auto [d, node] = heap.top();
      heap.pop();
      if (d > tt[node]) continue;
      for (const auto& [succ, secs] : out[node]) {
        const double cand = d + secs;
        if (cand < tt[succ]) {
          tt[succ] = cand;
          dist[succ] = dist[node] + std::hypot(net.xs_[succ] - net.xs_[node],
                                               net.ys_[succ] - net.ys_[node]);
          first[succ] = node == src ? succ : first[node];
          heap.emplace(cand, succ);
        }
      }
    }
  }
  return net;
}

RoadNetwork read_network(std::istream& in) {
  std::vector<NodeRecord> nodes;
  std::vector<ArcRecord> arcs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string tag;
    if (!(fields >> tag)) continue;
    if (tag == "N") {
      NodeRecord node;
      if (!(fields >> node.id >> node.x_m >> node.y_m)) {
        throw std::invalid_argument("network line " + std::to_string(line_no) +
                                    ": expected `N <id> <x_m> <y_m>`");
      }
      nodes.push_back(node);
    } else if (tag == "E") {
      ArcRecord arc;
      if (!(fields >> arc.from >> arc.to >> arc.seconds)) {
        throw std::invalid_argument("network line " + std::to_string(line_no) +
                                    ": expected `E <from> <to> <seconds>`");
      }
      arcs.push_back(arc);
    } else {
      throw std::invalid_argument("network line " + std::to_string(line_no) +
                                  ": unknown record type `" + tag + "`");
    }
    std::string extra;
    if (fields >> extra) {
      throw std::invalid_argument("network line " + std::to_string(line_no) +
                                  ": trailing fields");
    }
  }
  return load_network(nodes, arcs);
}

RoadNetwork read_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file " + path);
  try {
    return read_network(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_network(std::ostream& out, std::span<const NodeRecord> nodes,
                   std::span<const ArcRecord> arcs) {
  for (const auto& n : nodes) out << "N " << n.id << ' ' << n.x_m << ' ' << n.y_m << '\n';
  for (const auto& a : arcs) out << "E " << a.from << ' ' << a.to << ' ' << a.seconds << '\n';
}

std::pair<std::vector<NodeRecord>, std::vector<ArcRecord>> grid_records(const GridSpec& spec) {
  if (spec.side < 2) throw std::invalid_argument("grid side must be at least 2");
  std::vector<NodeRecord> nodes;
  std::vector<ArcRecord> arcs;
  const auto id = [&](int row, int col) { return static_cast<std::int64_t>(row) * spec.side + col; };
  for (int row = 0; row < spec.side; ++row) {
    for (int col = 0; col < spec.side; ++col) {
      nodes.push_back({id(row, col), col * spec.spacing_m, row * spec.spacing_m});
      if (col + 1 < spec.side) {
        arcs.push_back({id(row, col), id(row, col + 1), spec.arc_seconds});
        arcs.push_back({id(row, col + 1), id(row, col), spec.arc_seconds});
      }
      if (row + 1 < spec.side) {
        arcs.push_back({id(row, col), id(row + 1, col), spec.arc_seconds});
        arcs.push_back({id(row + 1, col), id(row, col), spec.arc_seconds});
      }
    }
  }
  return {std::move(nodes), std::move(arcs)};
}

RoadNetwork make_grid(const GridSpec& spec) {
  const auto [nodes, arcs] = grid_records(spec);
  return load_network(nodes, arcs);
}

std::vector<std::uint32_t> neighbors_within(const RoadNetwork& net, LocationId center,
                                            double radius_seconds,
                                            std::span<const Located> candidates,
                                            std::optional<std::uint32_t> self_id) {
  if (!(radius_seconds >= 0.0)) {
    throw std::invalid_argument("neighbors_within: radius must be non-negative");
  }
  std::vector<std::uint32_t> out;
  for (const auto& c : candidates) {
    if (self_id && c.id == *self_id) continue;
    if (net.travel_time(center, c.location) <= radius_seconds) out.push_back(c.id);
  }
  return out;
}

}  // namespace ridepool
