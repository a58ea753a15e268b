#include "tractequity/network.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <unordered_map>

namespace tractequity {

namespace {

NodeId parse_node_id(const std::string& cell, const std::string& where) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": node id '" + cell + "' is not an integer");
  }
}

double parse_required(const std::string& cell, const std::string& where) {
  auto v = parse_cell(cell);
  if (!v || std::isnan(*v)) throw ParseError(where + ": expected a number, found '" + cell + "'");
  return *v;
}

bool parse_flag(const std::string& cell, const std::string& where) {
  if (cell.empty() || cell == "0" || cell == "false" || cell == "False" || cell == "no") return false;
  if (cell == "1" || cell == "true" || cell == "True" || cell == "yes") return true;
  throw ParseError(where + ": oneway flag '" + cell + "' not recognized");
}

}  // namespace

SpeedTable default_speed_table() {
  // Free-flow defaults: motorway 65 mph, trunk 55, primary 40, secondary 35,
  // tertiary and residential 30/25; "highway"/"local" for synthetic lattices.
  return {{"motorway", 29.06}, {"trunk", 24.59}, {"primary", 17.88},  {"secondary", 15.65},
          {"tertiary", 13.41}, {"residential", 11.18}, {"highway", 29.06}, {"local", 13.9}};
}

// ---------------------------------------------------------------------------

Graph::Graph(std::vector<Node> nodes, const std::vector<EdgeInput>& edges,
             const SpeedTable& speeds)
    : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (nodes_[i].id == nodes_[i - 1].id)
      throw ValidationError("duplicate node id " + std::to_string(nodes_[i].id));

  std::vector<std::string> orphans;
  edges_.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const EdgeInput& in = edges[e];
    const std::string name = "edge " + std::to_string(e) + " (" + std::to_string(in.u) + "->" +
                             std::to_string(in.v) + ")";
    const auto u = find_node(in.u), v = find_node(in.v);
    if (!u || !v) {
      orphans.push_back(name);
      continue;
    }
    double speed = 0.0;
    if (in.speed_ms) {
      speed = *in.speed_ms;
    } else if (auto it = speeds.find(in.road_class); it != speeds.end()) {
      speed = it->second;
    } else {
      throw ValidationError(name + ": no speed and no default for class '" + in.road_class + "'");
    }
    if (!(in.length_m > 0.0) || !std::isfinite(in.length_m))
      throw ValidationError(name + ": length must be positive, got " + format_number(in.length_m));
    if (!(speed > 0.0) || !std::isfinite(speed))
      throw ValidationError(name + ": speed must be positive, got " + format_number(speed));
    edges_.push_back(Edge{*u, *v, in.length_m, speed, in.road_class, in.oneway});
  }
  if (!orphans.empty()) {
    std::string list;
    for (const auto& o : orphans) list += (list.empty() ? "" : "; ") + o;
    throw ValidationError(std::to_string(orphans.size()) + " edge(s) reference missing nodes: " + list);
  }

  PointMatrix pts(static_cast<Eigen::Index>(nodes_.size()), 2);
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    pts.row(static_cast<Eigen::Index>(i)) = nodes_[i].position.transpose();
  node_index_ = KdTree(std::move(pts));
  index_arcs();
}

void Graph::index_arcs() {
  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& ed = edges_[e];
    const double t = ed.travel_time();
    out_[ed.u].push_back({ed.v, e, t});
    in_[ed.v].push_back({ed.u, e, t});
    if (!ed.oneway) {
      out_[ed.v].push_back({ed.u, e, t});
      in_[ed.u].push_back({ed.v, e, t});
    }
  }
  auto by_target = [](const Arc& a, const Arc& b) {
    return a.to < b.to || (a.to == b.to && a.edge < b.edge);
  };
  for (auto& arcs : out_) std::sort(arcs.begin(), arcs.end(), by_target);
  for (auto& arcs : in_) std::sort(arcs.begin(), arcs.end(), by_target);
}

std::optional<std::size_t> Graph::find_node(NodeId id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                             [](const Node& n, NodeId v) { return n.id < v; });
  if (it == nodes_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::size_t Graph::node_index(NodeId id) const {
  if (auto i = find_node(id)) return *i;
  throw ValidationError("unknown node id " + std::to_string(id));
}

std::size_t Graph::nearest_node(const Point& p) const { return node_index_.nearest(p).index; }

Graph Graph::with_scaled_speeds(double factor) const {
  Graph g = *this;
  for (auto& e : g.edges_) e.speed_ms *= factor;
  g.index_arcs();
  return g;
}

Graph build_graph(const CsvTable& nodes, const CsvTable& edges, const SpeedTable& speeds) {
  const std::size_t nid = nodes.column("id"), nx = nodes.column("x"), ny = nodes.column("y");
  std::vector<Node> ns;
  for (std::size_t r = 0; r < nodes.rows.size(); ++r) {
    const auto& row = nodes.rows[r];
    const std::string where = "nodes line " + std::to_string(nodes.line_numbers[r]);
    ns.push_back({parse_node_id(row[nid], where),
                  Point(parse_required(row[nx], where), parse_required(row[ny], where))});
  }

  const std::size_t eu = edges.column("u"), ev = edges.column("v"), el = edges.column("length_m");
  const auto es = edges.find("speed_ms"), ec = edges.find("class"), eo = edges.find("oneway");
  std::vector<EdgeInput> es_in;
  for (std::size_t r = 0; r < edges.rows.size(); ++r) {
    const auto& row = edges.rows[r];
    const std::string where = "edges line " + std::to_string(edges.line_numbers[r]);
    EdgeInput in;
    in.u = parse_node_id(row[eu], where);
    in.v = parse_node_id(row[ev], where);
    in.length_m = parse_required(row[el], where);
    if (es && !row[*es].empty()) in.speed_ms = parse_required(row[*es], where);
    if (ec) in.road_class = row[*ec];
    if (eo) in.oneway = parse_flag(row[*eo], where);
    es_in.push_back(std::move(in));
  }
  return Graph(std::move(ns), es_in, speeds);
}

Graph build_graph(const std::filesystem::path& nodes_path, const std::filesystem::path& edges_path,
                  const SpeedTable& speeds) {
  return build_graph(read_csv(nodes_path), read_csv(edges_path), speeds);
}

// ---------------------------------------------------------------------------

ShortestPathTree::ShortestPathTree(const Graph& graph, std::size_t origin)
    : graph_(&graph), origin_(origin), dist_(graph.node_count(), kInf) {
  if (origin >= graph.node_count()) throw RangeError("shortest path: origin out of range");
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist_[origin] = 0.0;
  queue.emplace(0.0, origin);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist_[u]) continue;
    for (const Arc& a : graph.out_arcs(u)) {
      const double nd = d + a.time;
      if (nd < dist_[a.to]) {
        dist_[a.to] = nd;
        queue.emplace(nd, a.to);
      }
    }
  }
}

std::optional<Route> ShortestPathTree::route_to(std::size_t destination) const {
  const Graph& g = *graph_;
  if (destination >= g.node_count()) throw RangeError("shortest path: destination out of range");
  if (!reachable(destination)) return std::nullopt;

  Route route;
  route.origin = origin_;
  route.destination = destination;
  route.nodes.push_back(origin_);
  if (destination == origin_) return route;

  auto tight = [&](std::size_t from, const Arc& a) {
    return std::isfinite(dist_[from]) && dist_[from] + a.time == dist_[a.to];
  };

  // Nodes from which the destination is reachable along tight arcs.
  std::vector<char> on_path(g.node_count(), 0);
  std::vector<std::size_t> stack{destination};
  on_path[destination] = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (const Arc& a : g.in_arcs(v)) {
      // in-arc a: a.to is the tail node
      const Arc forward{v, a.edge, a.time};
      if (!on_path[a.to] && tight(a.to, forward)) {
        on_path[a.to] = 1;
        stack.push_back(a.to);
      }
    }
  }

  // Greedy walk: smallest next node id, then smallest edge index.
  std::vector<char> visited(g.node_count(), 0);
  std::size_t u = origin_;
  visited[u] = 1;
  while (u != destination) {
    const Arc* next = nullptr;
    for (const Arc& a : g.out_arcs(u)) {
      if (on_path[a.to] && tight(u, a)) {
        next = &a;
        break;
      }
    }
    if (!next || visited[next->to])
      throw ConsistencyError("shortest path: tight-arc walk failed to reach destination");
    route.total_time += next->time;
    route.total_length += g.edge(next->edge).length_m;
    route.edges.push_back(next->edge);
    route.nodes.push_back(next->to);
    u = next->to;
    visited[u] = 1;
  }
  return route;
}

std::optional<Route> shortest_path(const Graph& graph, std::size_t origin, std::size_t destination) {
  return ShortestPathTree(graph, origin).route_to(destination);
}

// ---------------------------------------------------------------------------

Attribution parse_attribution(std::string_view s) {
  if (s == "midpoint") return Attribution::Midpoint;
  if (s == "split") return Attribution::Split;
  throw ValidationError("unknown attribution mode '" + std::string(s) + "'");
}

EdgeTractMap build_edge_tract_map(const Graph& graph, const TractSet& tracts, Attribution mode) {
  EdgeTractMap map;
  map.mode = mode;
  map.tract_ids = tracts.ids();
  map.shares.resize(graph.edge_count());

  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const Edge& ed = graph.edge(e);
    const Point a = graph.node(ed.u).position;
    const Point b = graph.node(ed.v).position;
    auto& shares = map.shares[e];

    if (mode == Attribution::Midpoint) {
      shares.push_back({tracts.locate(0.5 * (a + b)), ed.length_m});
    } else {
      BBox seg;
      seg.extend(a);
      seg.extend(b);
      std::vector<double> ts{0.0, 1.0};
      for (std::size_t t = 0; t < tracts.size(); ++t) {
        if (!tracts.polygon(t).bbox().overlaps(seg)) continue;
        auto cuts = boundary_crossings(tracts.polygon(t), a, b);
        ts.insert(ts.end(), cuts.begin(), cuts.end());
      }
      std::sort(ts.begin(), ts.end());
      ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
      double assigned = 0.0;
      for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const std::size_t zone = tracts.locate(a + 0.5 * (ts[i] + ts[i + 1]) * (b - a));
        const bool last = i + 2 == ts.size();
        const double meters = last ? ed.length_m - assigned : (ts[i + 1] - ts[i]) * ed.length_m;
        assigned += meters;
        if (!shares.empty() && shares.back().tract == zone) shares.back().meters += meters;
        else shares.push_back({zone, meters});
      }
    }
    if (std::any_of(shares.begin(), shares.end(), [](const EdgeShare& s) { return s.tract == kNoIndex; }))
      map.uncovered_edges.push_back(e);
  }
  return map;
}

std::vector<EdgeShare> route_tract_meters(const Route& route, const EdgeTractMap& map) {
  std::map<std::size_t, double> acc;
  for (std::size_t e : route.edges) {
    if (e >= map.shares.size() || map.shares[e].empty())
      throw ConsistencyError("route edge " + std::to_string(e) + " has no tract attribution");
    for (const auto& s : map.shares[e]) acc[s.tract] += s.meters;
  }
  std::vector<EdgeShare> out;
  out.reserve(acc.size());
  for (const auto& [t, m] : acc) out.push_back({t, m});
  return out;
}

std::map<std::string, double> route_tract_distances(const Route& route, const EdgeTractMap& map) {
  std::map<std::string, double> out;
  for (const auto& s : route_tract_meters(route, map))
    out[s.tract == kNoIndex ? std::string(kOutsideZone) : map.tract_ids[s.tract]] += s.meters;
  return out;
}

}  // namespace tractequity
