#include "doctest.h"

#include "helpers.hpp"
#include "tractequity/pipeline.hpp"
#include "tractequity/synth.hpp"

using namespace tractequity;
namespace fs = std::filesystem;

namespace {

fs::path scenario_dir(const std::string& name, AssignmentMode mode = AssignmentMode::Fractional) {
  ScenarioSpec s;
  s.rows = s.cols = 6;
  s.noise_sigma = 0.1;
  s.coefficients = {Surface::constant(1.0), Surface::gradient(1.0, 2.0)};
  s.highway_row = 3;
  s.od_density = 0.2;
  const fs::path dir = testutil::scratch(name);
  write_scenario(generate(s), s, dir);
  if (mode == AssignmentMode::Bernoulli) {
    Json cfg = read_json(dir / "config.json");
    cfg["simulation"]["mode"] = "bernoulli";
    write_text_file(dir / "config.json", cfg.dump(2));
  }
  return dir;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("synthetic config runs end to end") {
    const fs::path dir = scenario_dir("pipe_happy");
    const RunResult r = run(load_run_config(dir / "config.json"));
    for (const char* f : {"ols_ols.csv", "gwr_gwr_tracts.csv", "gwr_gwr_tracts.geojson", "gwr_gwr_summary.csv",
                          "gwr_gwr_bandwidth.csv", "traversal.csv", "equity.csv", "equity.geojson",
                          "equity_summary.csv", "equity.svg", "report.txt"}) {
      CHECK(fs::exists(dir / "out" / f));
    }
    CHECK_FALSE(fs::exists(dir / "out" / "PARTIAL"));
    const std::string stamp = "# tractequity 0.1.0 config=";
    CHECK(testutil::slurp(dir / "out" / "ols_ols.csv").rfind(stamp, 0) == 0);
    CHECK(testutil::slurp(dir / "out" / "report.txt").rfind(stamp, 0) == 0);
    CHECK(read_json(dir / "out" / "equity.geojson")["metadata"].contains("config_hash"));
    CHECK(r.artifacts.size() >= 11);
  }

  TEST_CASE("missing column fails validation before any model output") {
    const fs::path dir = scenario_dir("pipe_missing");
    Json cfg = read_json(dir / "config.json");
    cfg["variables"][1]["column"] = "not_there";
    const RunConfig c = parse_run_config(cfg, dir);
    try {
      run(c);
      FAIL("expected a stage error");
    } catch (const StageError& e) {
      CHECK(e.stage == "validate");
      CHECK(std::string(e.what()).find("not_there") != std::string::npos);
    }
    CHECK(fs::exists(dir / "out" / "PARTIAL"));
    CHECK_FALSE(fs::exists(dir / "out" / "design_ols.csv"));
  }

  TEST_CASE("config errors") {
    const fs::path dir = scenario_dir("pipe_cfg");
    Json cfg = read_json(dir / "config.json");
    Json bad = cfg;
    bad["equity"].erase("group");
    CHECK_THROWS_AS(parse_run_config(bad, dir), ValidationError);
    bad = cfg;
    bad["models"] = Json::array({"model9"});
    CHECK_THROWS_AS(parse_run_config(bad, dir), ValidationError);
    bad = cfg;
    bad["inputs"].erase("od");
    CHECK_THROWS_AS(parse_run_config(bad, dir), ValidationError);
    bad = cfg;
    bad["equity"]["corridors"] = Json::array({"I-10"});
    CHECK_THROWS_AS(run(parse_run_config(bad, dir)), StageError);

    Json w = cfg;
    w["workers"] = 8;
    w["output_dir"] = "elsewhere";
    CHECK(config_hash(w) == config_hash(cfg));
    w["gwr"]["search"] = "exhaustive";
    CHECK(config_hash(w) != config_hash(cfg));
  }

  TEST_CASE("presets expand to the documented control lists") {
    CHECK(control_preset("limited").size() == 4);
    CHECK(control_preset("full").size() == 11);
    CHECK(control_preset("none").empty());
    CHECK(control_preset("full", Json{{"vkt", "x"}, {"prop_white", "pw"}})[0].column == "pw");
    const fs::path dir = scenario_dir("pipe_presets");
    Json cfg = read_json(dir / "config.json");
    cfg.erase("variables");
    cfg["models"] = Json::array({"model1", "model4", Json{{"name", "bare"}, {"controls", Json::array()}}});
    const RunConfig c = parse_run_config(cfg, dir);
    REQUIRE(c.models.size() == 3);
    CHECK(c.models[0].estimator == Estimator::Ols);
    CHECK(c.models[0].variables.size() == 6);
    CHECK(c.models[1].estimator == Estimator::Gwr);
    CHECK(c.models[1].variables.size() == 13);
    CHECK(c.models[2].variables.size() == 2);
    CHECK(c.models[0].variables[0].column == "pm25");
    CHECK(c.models[0].variables[1].display_name() == "VKT (log)");
  }

  TEST_CASE("traversal artifact reads back") {
    const fs::path dir = scenario_dir("pipe_traversal");
    run(load_run_config(dir / "config.json"));
    const Ingested in = ingest({dir / "tracts.geojson", dir / "attributes.csv", {}, {}, {}, {}}, {});
    const TraversalTable t = read_traversal_csv(dir / "out" / "traversal.csv", in.tracts);
    CHECK(traversal_csv(t, load_run_config(dir / "config.json").stamp) ==
          testutil::slurp(dir / "out" / "traversal.csv"));
  }

  TEST_CASE("repeated and multi-worker runs are byte identical") {
    const fs::path dir = scenario_dir("pipe_determinism", AssignmentMode::Bernoulli);
    RunConfig c = load_run_config(dir / "config.json");
    c.output_dir = dir / "a";
    c.workers = 1;
    const RunResult a = run(c);
    c.output_dir = dir / "b";
    c.workers = 6;
    run(c);
    for (const auto& p : a.artifacts)
      CHECK_MESSAGE(testutil::slurp(p) == testutil::slurp(dir / "b" / p.filename()), p.filename().string());
  }
}
