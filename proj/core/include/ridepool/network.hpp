#pragma once

#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ridepool {

/// Dense index of a location inside a loaded RoadNetwork.
struct LocationId {
  std::uint32_t index = 0;

  friend constexpr auto operator<=>(LocationId, LocationId) = default;
};

struct NodeRecord {
  std::int64_t id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
};

struct ArcRecord {
  std::int64_t from = 0;
  std::int64_t to = 0;
  double seconds = 0.0;
};

inline constexpr double kInfiniteRadius = std::numeric_limits<double>::infinity();

/// Directed road graph restricted to its largest strongly connected
/// component, with all-pairs shortest travel times precomputed.
///
/// Immutable after construction. Every query is a table lookup, so a single
/// instance can be shared read-only between simulator threads.
class RoadNetwork {
 public:
  std::size_t size() const { return external_ids_.size(); }

  double travel_time(LocationId from, LocationId to) const;
  /// Travel time between two locations given by their file ids.
  double travel_time_by_id(std::int64_t from, std::int64_t to) const;

  /// Length in meters of the shortest-time path (sum of straight arc lengths).
  double path_distance(LocationId from, LocationId to) const;

  /// First location after `from` on the shortest-time path to `to`;
  /// returns `to` itself when the two coincide.
  LocationId next_hop(LocationId from, LocationId to) const;

  std::optional<LocationId> find(std::int64_t external_id) const;
  LocationId at(std::int64_t external_id) const;  // throws std::out_of_range
  std::int64_t external_id(LocationId loc) const;

  double x(LocationId loc) const { return xs_.at(loc.index); }
  double y(LocationId loc) const { return ys_.at(loc.index); }

  /// Coarse spatial zone: the bounding box is cut into `per_side` x `per_side`
  /// cells. Zones are numbered row-major from the minimum corner.
  int zone_of(LocationId loc, int per_side) const;

  std::vector<LocationId> locations() const;

 private:
  friend RoadNetwork load_network(std::span<const NodeRecord>, std::span<const ArcRecord>);

  std::size_t cell(LocationId a, LocationId b) const;
  void check(LocationId loc) const;

  std::vector<std::int64_t> external_ids_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> tt_;
  std::vector<double> dist_;
  std::vector<std::uint32_t> next_;
  double min_x_ = 0.0, min_y_ = 0.0, max_x_ = 0.0, max_y_ = 0.0;
};

/// Builds a network from node/arc records, keeping only the largest strongly
/// connected component (ties resolved toward the component holding the
/// smallest node id). Throws std::invalid_argument on malformed input.
RoadNetwork load_network(std::span<const NodeRecord> nodes, std::span<const ArcRecord> arcs);

/// Parses the plain-text network format:
///   N <id> <x_m> <y_m>
///   E <from> <to> <seconds>
/// Blank lines and `#` comments are ignored.
RoadNetwork read_network(std::istream& in);
RoadNetwork read_network_file(const std::string& path);

void write_network(std::ostream& out, std::span<const NodeRecord> nodes,
                   std::span<const ArcRecord> arcs);

struct GridSpec {
  int side = 10;
  double arc_seconds = 30.0;
  double spacing_m = 250.0;
};

/// side x side grid with bidirectional arcs of uniform travel time.
/// Node ids are row * side + col.
std::pair<std::vector<NodeRecord>, std::vector<ArcRecord>> grid_records(const GridSpec& spec);
RoadNetwork make_grid(const GridSpec& spec);

/// An entity placed on the network (a vehicle, a request origin, ...).
struct Located {
  std::uint32_t id = 0;
  LocationId location;
};

/// Ids of the candidates whose location is within `radius_seconds` of
/// `center`, excluding `self_id`. Candidate order is preserved.
std::vector<std::uint32_t> neighbors_within(const RoadNetwork& net, LocationId center,
                                            double radius_seconds,
                                            std::span<const Located> candidates,
                                            std::optional<std::uint32_t> self_id = std::nullopt);

}  // namespace ridepool
