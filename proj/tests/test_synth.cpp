#include "doctest.h"

#include "helpers.hpp"
#include "tractequity/ols.hpp"
#include "tractequity/synth.hpp"

using namespace tractequity;

TEST_SUITE("synth") {
  TEST_CASE("2x2 noiseless scenario reproduces y from the surfaces") {
    ScenarioSpec s;
    s.rows = s.cols = 2;
    s.coefficients = {Surface::constant(1.0), Surface::constant(2.0)};
    const Scenario sc = generate(s);
    CHECK(sc.tracts.size() == 4);
    CHECK(sc.graph.node_count() == 9);
    CHECK(sc.graph.edge_count() == 12);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(sc.design.y[i] == 1.0 + 2.0 * sc.design.X(i, 1));
  }

  TEST_CASE("step surface ground truth follows the centroid") {
    ScenarioSpec s;
    s.rows = 3;
    s.cols = 4;
    s.coefficients = {Surface::constant(0.0), Surface::step(1.0, 3.0)};
    const Scenario sc = generate(s);
    for (std::size_t i = 0; i < sc.tracts.size(); ++i) {
      const bool west = sc.tracts.centroid(i).x() < 2000.0;
      CHECK(sc.true_coefficients(static_cast<Eigen::Index>(i), 1) == (west ? 1.0 : 3.0));
    }
    CHECK(Surface::gradient(0.0, 10.0).at(0.25) == doctest::Approx(2.5));
  }

  TEST_CASE("same spec and seed give identical files") {
    ScenarioSpec s;
    s.rows = 4;
    s.cols = 5;
    s.noise_sigma = 0.5;
    s.highway_row = 2;
    s.seed = 77;
    const auto a = testutil::scratch("synth_a"), b = testutil::scratch("synth_b");
    write_scenario(generate(s), s, a);
    write_scenario(generate(s), s, b);
    for (const char* f : {"tracts.geojson", "attributes.csv", "nodes.csv", "edges.csv", "od.csv",
                          "highways.geojson", "truth.csv", "config.json"})
      CHECK(testutil::slurp(a / f) == testutil::slurp(b / f));
    s.seed = 78;
    write_scenario(generate(s), s, b);
    CHECK(testutil::slurp(a / "attributes.csv") != testutil::slurp(b / "attributes.csv"));
  }

  TEST_CASE("written files load back through the regular readers") {
    ScenarioSpec s;
    s.rows = 3;
    s.cols = 3;
    s.highway_row = 1;
    const Scenario sc = generate(s);
    const auto dir = testutil::scratch("synth_load");
    write_scenario(sc, s, dir);
    const TractLoad load = load_tracts(dir / "tracts.geojson", dir / "attributes.csv");
    CHECK(load.dropped.empty());
    CHECK(load.tracts.ids() == sc.tracts.ids());
    CHECK(load.tracts.attributes() == sc.tracts.attributes());
    const Graph g = build_graph(dir / "nodes.csv", dir / "edges.csv");
    CHECK(g.edge_count() == sc.graph.edge_count());
    CHECK(load_od(dir / "od.csv", load.tracts).pairs.size() == sc.od.pairs.size());
    const HighwayNetworkGeom hw = load_highways(dir / "highways.geojson");
    CHECK(hw.labels() == std::vector<std::string>{"H-1"});
  }

  TEST_CASE("constant-coefficient scenario is recovered by OLS") {
    ScenarioSpec s;
    s.rows = s.cols = 6;
    s.coefficients = {Surface::constant(-0.5), Surface::constant(2.0), Surface::constant(0.25)};
    const OlsFit f = fit_ols(generate(s).design);
    CHECK(std::abs(f.coefficients[0] + 0.5) < 1e-8);
    CHECK(std::abs(f.coefficients[1] - 2.0) < 1e-8);
    CHECK(std::abs(f.coefficients[2] - 0.25) < 1e-8);
  }

  TEST_CASE("invalid specs are rejected") {
    ScenarioSpec s;
    s.rows = 1;
    CHECK_THROWS_AS(generate(s), ValidationError);
    s.rows = 3;
    s.noise_sigma = -1;
    CHECK_THROWS_AS(generate(s), ValidationError);
    CHECK_THROWS_AS(scenario_from_json(Json::parse(R"({"coefficients":[{"family":"wavy"}]})")), ValidationError);
  }
}
