#include "doctest.h"

#include "helpers.hpp"
#include "oracles.hpp"
#include "tractequity/network.hpp"

#include <numeric>
#include <random>

using namespace tractequity;

namespace {

Graph diamond() {
  // A=1, B=2, C=3, D=4; unit speed so time equals length.
  std::vector<Node> nodes{{1, {0, 0}}, {2, {1, 1}}, {3, {1, -1}}, {4, {2, 0}}};
  std::vector<EdgeInput> edges{{1, 2, 2, 1.0, "", true}, {2, 4, 2, 1.0, "", true},
                               {1, 3, 1, 1.0, "", true}, {3, 4, 5, 1.0, "", true}};
  return Graph(nodes, edges);
}

Graph random_graph(std::mt19937_64& rng, bool integer_times) {
  std::uniform_int_distribution<int> count(2, 10);
  const int n = count(rng);
  std::vector<Node> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back({static_cast<NodeId>(100 - 7 * i), Point(i, i % 3)});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> small(1, 4);
  std::vector<EdgeInput> edges;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b || u(rng) > 0.35) continue;
      const double len = integer_times ? small(rng) : 0.1 + 10.0 * u(rng);
      edges.push_back({nodes[a].id, nodes[b].id, len, 1.0, "", u(rng) < 0.5});
    }
  return Graph(nodes, edges);
}

}  // namespace

TEST_SUITE("network") {
  TEST_CASE("graph construction from files") {
    const CsvTable nodes = parse_csv("id,x,y\n1,0,0\n2,100,0\n");
    const Graph g = build_graph(nodes, parse_csv("u,v,length_m,speed_ms\n1,2,100,10\n"));
    CHECK(g.edge(0).travel_time() == doctest::Approx(10.0));

    CHECK_THROWS_AS(build_graph(nodes, parse_csv("u,v,length_m,speed_ms\n1,3,100,10\n")), ValidationError);
    const Graph d = build_graph(nodes, parse_csv("u,v,length_m,speed_ms,class\n1,2,139,,local\n"));
    CHECK(d.edge(0).speed_ms == doctest::Approx(13.9));
    CHECK(d.edge(0).travel_time() == doctest::Approx(10.0));
    try {
      build_graph(nodes, parse_csv("u,v,length_m,speed_ms\n1,2,100,10\n2,1,0,10\n"));
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("edge") != std::string::npos);
    }
    CHECK_THROWS_AS(build_graph(nodes, parse_csv("u,v,length_m,speed_ms\n1,2,100,-1\n")), ValidationError);
  }

  TEST_CASE("diamond and trivial routes") {
    const Graph g = diamond();
    const auto r = shortest_path(g, 0, 3);
    REQUIRE(r);
    CHECK(r->total_time == 4.0);
    CHECK(r->nodes == std::vector<std::size_t>{0, 1, 3});
    const auto self = shortest_path(g, 2, 2);
    REQUIRE(self);
    CHECK(self->edges.empty());
    CHECK(self->total_time == 0.0);
    CHECK(self->total_length == 0.0);
    CHECK_FALSE(shortest_path(g, 3, 0).has_value());
  }

  TEST_CASE("routes equal exhaustive enumeration, including tie-break") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 300; ++trial) {
      const bool ints = trial % 2 == 0;
      const Graph g = random_graph(rng, ints);
      for (std::size_t o = 0; o < g.node_count(); ++o) {
        const ShortestPathTree tree(g, o);
        for (std::size_t d = 0; d < g.node_count(); ++d) {
          const auto brute = oracle::enumerate_paths(g, o, d);
          const auto r = tree.route_to(d);
          CHECK(r.has_value() == std::isfinite(brute.time));
          if (!r) continue;
          CHECK(r->total_time == brute.time);
          CHECK(r->nodes == brute.nodes);
          double t = 0.0, len = 0.0;
          std::size_t at = o;
          for (std::size_t e : r->edges) {
            const Edge& ed = g.edge(e);
            CHECK((ed.u == at || (!ed.oneway && ed.v == at)));
            at = ed.u == at ? ed.v : ed.u;
            t += ed.travel_time();
            len += ed.length_m;
          }
          CHECK(at == d);
          CHECK(r->total_length == doctest::Approx(len));
        }
      }
    }
  }

  TEST_CASE("uniform speed scaling keeps the route") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
      const Graph g = random_graph(rng, false);
      const Graph fast = g.with_scaled_speeds(4.0);
      for (std::size_t d = 0; d < g.node_count(); ++d) {
        const auto a = shortest_path(g, 0, d), b = shortest_path(fast, 0, d);
        REQUIRE(a.has_value() == b.has_value());
        if (!a) continue;
        CHECK(a->edges == b->edges);
        CHECK(b->total_time == doctest::Approx(a->total_time / 4.0));
      }
    }
  }

  TEST_CASE("edge attribution: midpoint and split") {
    // Two tracts split at x=400; a 1000 m edge along y=500.
    std::vector<Polygon> polys{Polygon::rectangle(Point(0, 0), Point(400, 1000)),
                               Polygon::rectangle(Point(400, 0), Point(1000, 1000))};
    const TractSet t({"L", "R"}, polys, {"population", "commuters", "group_share"}, Matrix::Constant(2, 3, 0.5));
    const Graph g({{1, {0, 500}}, {2, {1000, 500}}}, {{1, 2, 1000, 10.0, "", false}});

    const EdgeTractMap split = build_edge_tract_map(g, t, Attribution::Split);
    REQUIRE(split.shares[0].size() == 2);
    double l = 0, r = 0;
    for (const auto& s : split.shares[0]) (s.tract == 0 ? l : r) += s.meters;
    CHECK(l == doctest::Approx(400.0));
    CHECK(r == doctest::Approx(600.0));

    const EdgeTractMap mid = build_edge_tract_map(g, t, Attribution::Midpoint);
    REQUIRE(mid.shares[0].size() == 1);
    CHECK(mid.shares[0][0].tract == 1);
    CHECK(mid.shares[0][0].meters == 1000.0);

    const TractSet one({"all"}, {Polygon::rectangle(Point(-1, -1), Point(2000, 2000))},
                       {"population", "commuters", "group_share"}, Matrix::Constant(1, 3, 0.5));
    for (auto mode : {Attribution::Midpoint, Attribution::Split}) {
      const EdgeTractMap m = build_edge_tract_map(g, one, mode);
      REQUIRE(m.shares[0].size() == 1);
      CHECK(m.shares[0][0].meters == doctest::Approx(1000.0));
      const auto route = shortest_path(g, 0, 1);
      const auto dist = route_tract_distances(*route, m);
      CHECK(dist.size() == 1);
      CHECK(dist.at("all") == doctest::Approx(route->total_length));
    }
  }

  TEST_CASE("two-edge route across two tracts and outside length") {
    std::vector<Polygon> polys{Polygon::rectangle(Point(0, -10), Point(300, 10)),
                               Polygon::rectangle(Point(300, -10), Point(1000, 10))};
    const TractSet t({"t1", "t2"}, polys, {"population", "commuters", "group_share"}, Matrix::Constant(2, 3, 0.5));
    const Graph g({{1, {0, 0}}, {2, {300, 0}}, {3, {1000, 0}}, {4, {1000, 500}}},
                  {{1, 2, 300, 10.0, "", false}, {2, 3, 700, 10.0, "", false}, {3, 4, 500, 10.0, "", false}});
    const EdgeTractMap m = build_edge_tract_map(g, t, Attribution::Midpoint);
    const auto d = route_tract_distances(*shortest_path(g, 0, 2), m);
    CHECK(d.at("t1") == 300.0);
    CHECK(d.at("t2") == 700.0);
    const auto out = route_tract_distances(*shortest_path(g, 0, 3), m);
    CHECK(out.at(kOutsideZone) == 500.0);
    CHECK_FALSE(m.uncovered_edges.empty());

    EdgeTractMap broken = m;
    broken.shares[1].clear();
    CHECK_THROWS_AS(route_tract_meters(*shortest_path(g, 0, 2), broken), ConsistencyError);
  }

  TEST_CASE("conservation on random routes over a jittered grid") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> jitter(-180.0, 180.0);
    const TractSet t = testutil::grid(6, 6);
    std::vector<Node> nodes;
    for (int r = 0; r <= 12; ++r)
      for (int c = 0; c <= 12; ++c)
        nodes.push_back({r * 13 + c, Point(c * 500.0 + jitter(rng) * (c > 0 && c < 12),
                                           r * 500.0 + jitter(rng) * (r > 0 && r < 12))});
    std::vector<EdgeInput> edges;
    for (int r = 0; r <= 12; ++r)
      for (int c = 0; c <= 12; ++c) {
        const auto& a = nodes[static_cast<std::size_t>(r * 13 + c)];
        for (auto [dr, dc] : {std::pair{0, 1}, std::pair{1, 0}}) {
          if (r + dr > 12 || c + dc > 12) continue;
          const auto& b = nodes[static_cast<std::size_t>((r + dr) * 13 + c + dc)];
          edges.push_back({a.id, b.id, (a.position - b.position).norm(), 13.9, "", false});
        }
      }
    const Graph g(nodes, edges);
    for (auto mode : {Attribution::Midpoint, Attribution::Split}) {
      const EdgeTractMap m = build_edge_tract_map(g, t, mode);
      for (std::size_t e = 0; e < g.edge_count(); ++e) {
        double s = 0.0;
        for (const auto& sh : m.shares[e]) s += sh.meters;
        CHECK(std::abs(s - g.edge(e).length_m) <= 1e-9 * g.edge(e).length_m);
      }
      for (std::size_t o = 0; o < g.node_count(); o += 17) {
        const ShortestPathTree tree(g, o);
        for (std::size_t d = 0; d < g.node_count(); d += 11) {
          const auto r = tree.route_to(d);
          double s = 0.0;
          for (const auto& sh : route_tract_meters(*r, m)) s += sh.meters;
          CHECK(std::abs(s - r->total_length) <= 1e-9 * std::max(1.0, r->total_length));
        }
      }
    }
  }
}
