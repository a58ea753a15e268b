#include "tractequity/commute.hpp"
#include "tractequity/data_model.hpp"
#include "tractequity/equity.hpp"
#include "tractequity/gwr.hpp"
#include "tractequity/network.hpp"
#include "tractequity/ols.hpp"
#include "tractequity/pipeline.hpp"
#include "tractequity/report.hpp"
#include "tractequity/synth.hpp"
#include "tractequity/version.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>

using namespace tractequity;
namespace fs = std::filesystem;

namespace {

struct DataFlags {
  std::string tracts, attributes, highways;
  std::string id_column = "tract_id", population = "population", commuters = "commuters",
              group_share = "group_share";

  void add(CLI::App* app, bool need_highways = false) {
    app->add_option("--tracts", tracts, "Tract GeoJSON FeatureCollection")->required();
    app->add_option("--attributes", attributes, "Tract attribute table")->required();
    auto* h = app->add_option("--highways", highways, "Highway GeoJSON");
    if (need_highways) h->required();
    app->add_option("--id-column", id_column);
    app->add_option("--population-column", population);
    app->add_option("--commuters-column", commuters);
    app->add_option("--group-share-column", group_share);
  }
  InputPaths paths() const {
    InputPaths p;
    p.tracts = tracts;
    p.attributes = attributes;
    if (!highways.empty()) p.highways = fs::path(highways);
    return p;
  }
  TractColumns columns() const { return {id_column, population, commuters, group_share}; }
  Ingested load() const {
    Ingested in = ingest(paths(), columns());
    for (const auto& d : in.dropped) std::cerr << "dropped: " << d << '\n';
    return in;
  }
};

struct DesignFlags {
  std::string response;
  std::vector<std::string> predictors;

  void add(CLI::App* app) {
    app->add_option("--response", response, "Response column, optionally COLUMN:log")->required();
    app->add_option("--predictor", predictors, "Predictor column, optionally COLUMN:log (repeatable)");
  }
  static TransformSpec parse(const std::string& s, Role role) {
    TransformSpec t;
    t.role = role;
    const auto colon = s.rfind(':');
    if (colon != std::string::npos && s.substr(colon + 1) == "log") {
      t.column = s.substr(0, colon);
      t.transform = Transform::Log;
    } else {
      t.column = s;
    }
    return t;
  }
  std::vector<TransformSpec> spec() const {
    std::vector<TransformSpec> v{parse(response, Role::Response)};
    for (const auto& p : predictors) v.push_back(parse(p, Role::Predictor));
    return v;
  }
};

void emit(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-") std::cout << content;
  else write_text_file(out, content);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial equity analysis toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::string stage;

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Load and validate tracts; print a per-tract summary");
  DataFlags ingest_data;
  ingest_data.add(ingest_cmd);
  std::string ingest_out;
  ingest_cmd->add_option("--out", ingest_out, "Output CSV (default stdout)");
  ingest_cmd->callback([&] {
    stage = "ingest";
    const Ingested in = ingest_data.load();
    std::ostringstream out;
    out << csv_header_comment({}) << "tract_id,centroid_x,centroid_y,area_m2,population,commuters,group_share";
    const bool hw = in.highways.has_value();
    if (hw) out << ",dist_highway_km";
    out << '\n';
    const Vector dist = hw ? in.tracts.attribute("dist_highway_km") : Vector();
    for (std::size_t i = 0; i < in.tracts.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const Point c = in.tracts.centroid(i);
      out << csv_escape(in.tracts.id(i)) << ',' << format_number(c.x()) << ',' << format_number(c.y())
          << ',' << format_number(in.tracts.polygon(i).area()) << ','
          << format_number(in.tracts.population()[r]) << ',' << format_number(in.tracts.commuters()[r])
          << ',' << format_number(in.tracts.group_share()[r]);
      if (hw) out << ',' << format_number(dist[r]);
      out << '\n';
    }
    emit(ingest_out, out.str());
    std::cerr << in.tracts.size() << " tracts, " << in.dropped.size() << " dropped\n";
  });

  // ols
  auto* ols_cmd = app.add_subcommand("ols", "Global least squares with HC1 standard errors");
  DataFlags ols_data;
  DesignFlags ols_design;
  ols_data.add(ols_cmd);
  ols_design.add(ols_cmd);
  std::string ols_out;
  bool ols_table = false;
  ols_cmd->add_option("--out", ols_out, "Output CSV (default stdout)");
  ols_cmd->add_flag("--table", ols_table, "Print the formatted table instead of CSV");
  ols_cmd->callback([&] {
    stage = "ols";
    const Ingested in = ols_data.load();
    const OlsFit fit = fit_ols(build_design(in.tracts, ols_design.spec()));
    if (ols_table) emit(ols_out, format_regression_table({{"ols", fit, std::nullopt}}));
    else emit(ols_out, ols_csv(fit, {}));
  });

  // gwr
  auto* gwr_cmd = app.add_subcommand("gwr", "Geographically weighted regression with AICc bandwidth");
  DataFlags gwr_data;
  DesignFlags gwr_design;
  gwr_data.add(gwr_cmd);
  gwr_design.add(gwr_cmd);
  std::string kernel = "gaussian", search = "golden", fitted = "leave_in", gwr_dir = "gwr_out";
  std::size_t k_min = 0, k_max = 0, k_fixed = 0;
  double bw_scale = 1.0;
  unsigned gwr_workers = 1;
  gwr_cmd->add_option("--kernel", kernel)->check(CLI::IsMember({"gaussian"}));
  gwr_cmd->add_option("--k-min", k_min, "Smallest neighbor count (default predictors + 2)");
  gwr_cmd->add_option("--k-max", k_max, "Largest neighbor count (default n)");
  gwr_cmd->add_option("--k", k_fixed, "Fixed neighbor count; skips the search");
  gwr_cmd->add_option("--search", search)->check(CLI::IsMember({"golden", "exhaustive"}));
  gwr_cmd->add_option("--fitted", fitted, "Fitted values entering AICc")
      ->check(CLI::IsMember({"leave_in", "leave_one_out"}));
  gwr_cmd->add_option("--bandwidth-scale", bw_scale);
  gwr_cmd->add_option("--workers", gwr_workers);
  gwr_cmd->add_option("--out-dir", gwr_dir);
  gwr_cmd->callback([&] {
    stage = "gwr";
    const Ingested in = gwr_data.load();
    const DesignData design = build_design(in.tracts, gwr_design.spec());
    const NeighborDistances distances(design, in.tracts);
    KernelSpec k;
    k.bandwidth_scale = bw_scale;
    k.fitted = fitted == "leave_in" ? FittedValues::LeaveIn : FittedValues::LeaveOneOut;
    const RunStamp stamp;
    if (k_fixed > 0) {
      k.neighbors_k = k_fixed;
    } else {
      const auto n = static_cast<std::size_t>(design.n());
      const BandwidthSelection sel = select_bandwidth(
          design, distances, k_min ? k_min : static_cast<std::size_t>(design.X.cols()) + 1,
          k_max ? k_max : n,
          {search == "golden" ? SearchMode::Golden : SearchMode::Exhaustive, k.fitted, gwr_workers});
      write_text_file(fs::path(gwr_dir) / "gwr_bandwidth.csv", bandwidth_csv(sel, stamp));
      k.neighbors_k = sel.neighbors_k;
    }
    const GwrFit fit = fit_gwr(design, distances, k, gwr_workers);
    for (const auto& w : fit.warnings) std::cerr << "warning: " << w << '\n';
    const GwrSummary summary = summarize_gwr(fit);
    write_text_file(fs::path(gwr_dir) / "gwr_tracts.csv", gwr_tracts_csv(fit, stamp));
    write_text_file(fs::path(gwr_dir) / "gwr_tracts.geojson", gwr_tracts_geojson(fit, in.tracts, stamp));
    write_text_file(fs::path(gwr_dir) / "gwr_summary.csv", gwr_summary_csv(summary, stamp));
    std::cout << "neighbors_k=" << fit.neighbors_k << " aicc=" << format_number(fit.aicc)
              << " trace_S=" << format_number(fit.trace_S) << '\n'
              << format_regression_table({{"gwr", std::nullopt, summary}});
  });

  // route
  auto* route_cmd = app.add_subcommand("route", "Shortest free-flow route between two nodes");
  std::string nodes_path, edges_path, route_tracts, route_attrs, attribution = "midpoint";
  NodeId from = 0, to = 0;
  route_cmd->add_option("--nodes", nodes_path)->required();
  route_cmd->add_option("--edges", edges_path)->required();
  route_cmd->add_option("--from", from)->required();
  route_cmd->add_option("--to", to)->required();
  route_cmd->add_option("--tracts", route_tracts);
  route_cmd->add_option("--attributes", route_attrs);
  route_cmd->add_option("--attribution", attribution)->check(CLI::IsMember({"midpoint", "split"}));
  route_cmd->callback([&] {
    stage = "route";
    const Graph g = build_graph(nodes_path, edges_path);
    const auto r = shortest_path(g, g.node_index(from), g.node_index(to));
    if (!r) {
      std::cout << "no route from " << from << " to " << to << '\n';
      return;
    }
    std::cout << "time_s=" << format_number(r->total_time) << " length_m=" << format_number(r->total_length)
              << '\n';
    std::cout << "nodes:";
    for (auto n : r->nodes) std::cout << ' ' << g.node(n).id;
    std::cout << "\nedges:\n";
    for (auto e : r->edges) {
      const Edge& ed = g.edge(e);
      std::cout << "  " << e << ' ' << g.node(ed.u).id << "-" << g.node(ed.v).id << ' '
                << format_number(ed.length_m) << " m\n";
    }
    if (!route_tracts.empty()) {
      const TractSet tracts = load_tracts(route_tracts, route_attrs).tracts;
      const EdgeTractMap map = build_edge_tract_map(g, tracts, parse_attribution(attribution));
      std::cout << "tract distances:\n";
      for (const auto& [id, m] : route_tract_distances(*r, map))
        std::cout << "  " << id << ' ' << format_number(m) << " m\n";
    }
  });

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Commute simulation: per-tract traversal by group");
  DataFlags sim_data;
  sim_data.add(sim_cmd);
  std::string sim_nodes, sim_edges, sim_od, mode = "fractional", sim_attr = "midpoint", drive_col, sim_out;
  std::uint64_t seed = 0;
  bool exclude_home = false;
  unsigned sim_workers = 1;
  sim_cmd->add_option("--nodes", sim_nodes)->required();
  sim_cmd->add_option("--edges", sim_edges)->required();
  sim_cmd->add_option("--od", sim_od)->required();
  sim_cmd->add_option("--mode", mode)->check(CLI::IsMember({"bernoulli", "fractional"}));
  sim_cmd->add_option("--seed", seed);
  sim_cmd->add_flag("--exclude-home-tract", exclude_home,
                    "Report the home-excluded distance in the D_km column");
  sim_cmd->add_option("--attribution", sim_attr)->check(CLI::IsMember({"midpoint", "split"}));
  sim_cmd->add_option("--drive-share-column", drive_col);
  sim_cmd->add_option("--workers", sim_workers);
  sim_cmd->add_option("--out", sim_out, "Output CSV (default stdout)");
  sim_cmd->callback([&] {
    stage = "simulate";
    const Ingested in = sim_data.load();
    const Graph g = build_graph(sim_nodes, sim_edges);
    const EdgeTractMap map = build_edge_tract_map(g, in.tracts, parse_attribution(sim_attr));
    const ODTable od = load_od(sim_od, in.tracts);
    for (const auto& d : od.dropped) std::cerr << "dropped: " << d << '\n';
    TripAssignment trips = assign_groups(od, in.tracts, parse_assignment_mode(mode), seed);
    if (!drive_col.empty()) trips = scale_by_drive_share(std::move(trips), in.tracts.attribute(drive_col));
    TraversalTable t = simulate(in.tracts, g, map, trips, {sim_workers});
    for (const auto& w : t.warnings) std::cerr << "warning: " << w << '\n';
    if (exclude_home) t.distance_km = t.distance_km_excl_home;
    emit(sim_out, traversal_csv(t, {"none", seed}));
  });

  // equity
  auto* eq_cmd = app.add_subcommand("equity", "Inequity index and weighted subset means");
  DataFlags eq_data;
  eq_data.add(eq_cmd);
  std::string traversal_path, group, eq_dir = "equity_out";
  std::vector<std::string> corridors;
  double buffer = 0.0;
  bool eq_exclude_home = false, svg = false;
  eq_cmd->add_option("--traversal", traversal_path, "Traversal CSV from simulate")->required();
  eq_cmd->add_option("--group", group, "Group for the weighted means")->required();
  eq_cmd->add_option("--corridor", corridors, "Highway label for a corridor subset (repeatable)");
  eq_cmd->add_option("--buffer", buffer, "Corridor adjacency buffer in meters");
  eq_cmd->add_flag("--exclude-home-tract", eq_exclude_home);
  eq_cmd->add_flag("--svg", svg, "Also write a static SVG choropleth");
  eq_cmd->add_option("--out-dir", eq_dir);
  eq_cmd->callback([&] {
    stage = "equity";
    const Ingested in = eq_data.load();
    const TraversalTable t = read_traversal_csv(traversal_path, in.tracts);
    const InequityTable idx = inequity_index(t, eq_exclude_home);
    const RunStamp stamp;
    write_text_file(fs::path(eq_dir) / "equity.csv", equity_csv(idx, stamp));
    write_text_file(fs::path(eq_dir) / "equity.geojson", equity_geojson(idx, in.tracts, stamp));
    const auto means = summarize_equity(idx, in.tracts, in.highways ? &*in.highways : nullptr,
                                        corridors, group, buffer);
    write_text_file(fs::path(eq_dir) / "equity_summary.csv", equity_summary_csv(means, stamp));
    if (svg) write_text_file(fs::path(eq_dir) / "equity.svg", equity_svg(idx, in.tracts, group, stamp));
    std::cout << format_equity_summary(means);
  });

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic scenario in the standard input formats");
  std::string spec_path, synth_dir = "scenario";
  ScenarioSpec spec;
  int highway_row = -1;
  synth_cmd->add_option("--spec", spec_path, "Scenario JSON; flags below override it");
  auto* rows_opt = synth_cmd->add_option("--rows", spec.rows);
  auto* cols_opt = synth_cmd->add_option("--cols", spec.cols);
  auto* cell_opt = synth_cmd->add_option("--cell-size", spec.cell_size);
  auto* sigma_opt = synth_cmd->add_option("--sigma", spec.noise_sigma);
  auto* seed_opt = synth_cmd->add_option("--seed", spec.seed);
  synth_cmd->add_option("--highway-row", highway_row, "Node row carrying the synthetic highway");
  synth_cmd->add_option("--out-dir", synth_dir);
  synth_cmd->callback([&] {
    stage = "synth";
    ScenarioSpec s = spec;
    if (!spec_path.empty()) {
      s = scenario_from_json(read_json(spec_path));
      if (rows_opt->count()) s.rows = spec.rows;
      if (cols_opt->count()) s.cols = spec.cols;
      if (cell_opt->count()) s.cell_size = spec.cell_size;
      if (sigma_opt->count()) s.noise_sigma = spec.noise_sigma;
      if (seed_opt->count()) s.seed = spec.seed;
    }
    if (highway_row >= 0) s.highway_row = highway_row;
    write_scenario(generate(s), s, synth_dir);
    std::cout << "wrote " << s.rows * s.cols << " tracts to " << synth_dir << '\n';
  });

  // report
  auto* report_cmd = app.add_subcommand("report", "Format regression and equity artifacts");
  std::vector<std::string> artifacts;
  report_cmd->add_option("artifacts", artifacts, "ols_*.csv, gwr_*_summary.csv, equity_summary.csv")
      ->required();
  report_cmd->callback([&] {
    stage = "report";
    std::vector<fs::path> paths(artifacts.begin(), artifacts.end());
    std::cout << report(paths);
  });

  // run
  auto* run_cmd = app.add_subcommand("run", "Run every configured stage from a config file");
  std::string config_path, out_override;
  unsigned run_workers = 0;
  run_cmd->add_option("config", config_path, "Run config JSON")->required();
  run_cmd->add_option("--workers", run_workers, "Override the configured worker count");
  run_cmd->add_option("--output-dir", out_override);
  run_cmd->callback([&] {
    stage = "run";
    RunConfig cfg = load_run_config(config_path);
    if (run_workers > 0) cfg.workers = run_workers;
    if (!out_override.empty()) cfg.output_dir = out_override;
    const RunResult r = run(cfg, &std::cerr);
    for (const auto& a : r.artifacts) std::cout << a.string() << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << stage << ": " << e.what() << '\n';
    return 2;
  }
  return 0;
}
