#pragma once

#include "tractequity/data_model.hpp"
#include "tractequity/io.hpp"
#include "tractequity/spatial_index.hpp"
#include "tractequity/types.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tractequity {

using NodeId = std::int64_t;

struct Node {
  NodeId id = 0;
  Point position = Point::Zero();
};

/// One row of the edge file. A missing speed falls back to the road-class table.
struct EdgeInput {
  NodeId u = 0;
  NodeId v = 0;
  double length_m = 0.0;
  std::optional<double> speed_ms;
  std::string road_class;
  bool oneway = false;
};

struct Edge {
  std::size_t u = 0;  // node index
  std::size_t v = 0;
  double length_m = 0.0;
  double speed_ms = 0.0;
  std::string road_class;
  bool oneway = false;

  double travel_time() const { return length_m / speed_ms; }
};

/// Directed traversal of an edge; two-way edges contribute two arcs.
struct Arc {
  std::size_t to = 0;
  std::size_t edge = 0;
  double time = 0.0;
};

/// Free-flow speeds (m/s) by road class.
using SpeedTable = std::map<std::string, double>;
SpeedTable default_speed_table();

/// Street graph. Nodes are held in ascending id order, so comparing node
/// indices compares node ids.
class Graph {
 public:
  Graph() = default;
  Graph(std::vector<Node> nodes, const std::vector<EdgeInput>& edges,
        const SpeedTable& speeds = default_speed_table());

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Arc>& out_arcs(std::size_t u) const { return out_[u]; }
  const std::vector<Arc>& in_arcs(std::size_t v) const { return in_[v]; }

  std::size_t node_index(NodeId id) const;
  std::optional<std::size_t> find_node(NodeId id) const;
  /// Closest node to `p` (lowest id on ties).
  std::size_t nearest_node(const Point& p) const;

  /// Copy with every speed multiplied by `factor`.
  Graph with_scaled_speeds(double factor) const;

 private:
  void index_arcs();

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Arc>> out_;
  std::vector<std::vector<Arc>> in_;
  KdTree node_index_;
};

/// Nodes file: id,x,y. Edges file: u,v,length_m,speed_ms,class,oneway.
Graph build_graph(const std::filesystem::path& nodes_path, const std::filesystem::path& edges_path,
                  const SpeedTable& speeds = default_speed_table());
Graph build_graph(const CsvTable& nodes, const CsvTable& edges,
                  const SpeedTable& speeds = default_speed_table());

struct Route {
  std::size_t origin = 0;
  std::size_t destination = 0;
  std::vector<std::size_t> nodes;  // origin ... destination
  std::vector<std::size_t> edges;
  double total_time = 0.0;
  double total_length = 0.0;
};

/// Single-source free-flow travel times. Routes extracted from the tree are
/// minimal in time; among equal-time routes the lexicographically smallest
/// node-id sequence wins.
class ShortestPathTree {
 public:
  ShortestPathTree(const Graph& graph, std::size_t origin);

  std::size_t origin() const { return origin_; }
  double time_to(std::size_t node) const { return dist_[node]; }
  bool reachable(std::size_t node) const { return std::isfinite(dist_[node]); }
  std::optional<Route> route_to(std::size_t destination) const;

 private:
  const Graph* graph_;
  std::size_t origin_;
  std::vector<double> dist_;
};

/// Nullopt when the destination cannot be reached.
std::optional<Route> shortest_path(const Graph& graph, std::size_t origin, std::size_t destination);

enum class Attribution { Midpoint, Split };
Attribution parse_attribution(std::string_view s);

inline constexpr const char* kOutsideZone = "__outside__";

struct EdgeShare {
  std::size_t tract = kNoIndex;  // kNoIndex: outside every tract
  double meters = 0.0;
};

/// Per-edge attribution of length to tracts.
struct EdgeTractMap {
  Attribution mode = Attribution::Midpoint;
  std::vector<std::vector<EdgeShare>> shares;  // indexed by edge
  std::vector<std::string> tract_ids;
  std::vector<std::size_t> uncovered_edges;  // edges with any length outside all tracts
};

EdgeTractMap build_edge_tract_map(const Graph& graph, const TractSet& tracts, Attribution mode);

/// Per-tract meters along a route, as (tract index, meters) in ascending
/// tract index, kNoIndex (outside) last.
std::vector<EdgeShare> route_tract_meters(const Route& route, const EdgeTractMap& map);

/// Same as route_tract_meters keyed by tract_id; outside length under kOutsideZone.
std::map<std::string, double> route_tract_distances(const Route& route, const EdgeTractMap& map);

}  // namespace tractequity
