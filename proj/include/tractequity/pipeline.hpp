#pragma once

#include "tractequity/commute.hpp"
#include "tractequity/data_model.hpp"
#include "tractequity/equity.hpp"
#include "tractequity/gwr.hpp"
#include "tractequity/io.hpp"
#include "tractequity/network.hpp"
#include "tractequity/ols.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tractequity {

/// Error raised by run(); the message is prefixed with the failing stage.
struct StageError : Error {
  StageError(std::string stage_name, const std::string& message)
      : Error(stage_name + ": " + message), stage(std::move(stage_name)) {}
  std::string stage;
};

enum class Estimator { Ols, Gwr };

struct ModelConfig {
  std::string name;
  Estimator estimator = Estimator::Ols;
  std::vector<TransformSpec> variables;  // response included
};

struct GwrConfig {
  std::optional<std::size_t> k_min, k_max;
  std::optional<std::size_t> neighbors_k;  // fixed k skips the search
  SearchMode search = SearchMode::Golden;
  FittedValues fitted = FittedValues::LeaveIn;
  double bandwidth_scale = 1.0;
};

struct SimulationConfig {
  AssignmentMode mode = AssignmentMode::Fractional;
  bool exclude_home_tract = false;
  Attribution attribution = Attribution::Midpoint;
  std::optional<std::string> drive_share_column;
  SpeedTable speeds = default_speed_table();
};

struct EquityConfig {
  std::string group;
  std::vector<std::string> corridors;
  double buffer_m = 0.0;
  bool svg = true;
};

struct InputPaths {
  std::filesystem::path tracts, attributes;
  std::optional<std::filesystem::path> highways, nodes, edges, od;
};

struct RunConfig {
  InputPaths inputs;
  TractColumns columns;
  std::string highway_distance_column = "dist_highway_km";
  std::vector<ModelConfig> models;
  GwrConfig gwr;
  std::optional<SimulationConfig> simulation;
  std::optional<EquityConfig> equity;
  std::filesystem::path output_dir = "out";
  unsigned workers = 1;
  RunStamp stamp;
};

/// Variable lists of the limited (basic) and full control sets, keyed by the
/// canonical column names. `column_map` renames canonical columns.
std::vector<TransformSpec> control_preset(std::string_view name, const Json& column_map = Json::object());

/// Relative paths resolve against `base_dir`. The stamp hash covers the whole
/// document except `workers` and `output_dir`.
RunConfig parse_run_config(const Json& config, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
std::string config_hash(const Json& config);

struct RunResult {
  std::vector<std::filesystem::path> artifacts;
  std::vector<std::string> warnings;
};

/// Executes ingest, models, simulation, equity and report in order. On a
/// stage failure a PARTIAL marker is written to the output directory and a
/// StageError is thrown.
RunResult run(const RunConfig& config, std::ostream* log = nullptr);

// Stage building blocks shared with the CLI subcommands.

/// Loads tracts and, when given, highways; derives the highway distance
/// column when it is absent from the attributes.
struct Ingested {
  TractSet tracts;
  std::optional<HighwayNetworkGeom> highways;
  std::vector<std::string> dropped;
};
Ingested ingest(const InputPaths& inputs, const TractColumns& columns,
                const std::string& highway_distance_column = "dist_highway_km");

std::string design_csv(const DesignData& data, const RunStamp& stamp);
std::string gwr_tracts_csv(const GwrFit& fit, const RunStamp& stamp);
std::string gwr_tracts_geojson(const GwrFit& fit, const TractSet& tracts, const RunStamp& stamp);
std::string bandwidth_csv(const BandwidthSelection& selection, const RunStamp& stamp);

std::string traversal_csv(const TraversalTable& table, const RunStamp& stamp);
TraversalTable read_traversal_csv(const std::filesystem::path& path, const TractSet& tracts);

std::string equity_csv(const InequityTable& index, const RunStamp& stamp);
std::string equity_geojson(const InequityTable& index, const TractSet& tracts, const RunStamp& stamp);
/// Choropleth of one group's index with equal-interval bins symmetric about 0.
std::string equity_svg(const InequityTable& index, const TractSet& tracts, std::string_view group,
                       const RunStamp& stamp);

}  // namespace tractequity
