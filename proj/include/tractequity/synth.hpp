#pragma once

#include "tractequity/commute.hpp"
#include "tractequity/data_model.hpp"
#include "tractequity/io.hpp"
#include "tractequity/network.hpp"
#include "tractequity/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tractequity {

enum class SurfaceFamily { Constant, Step, LinearGradient };

/// Scalar field over the grid, parameterized by the west-east fraction u in
/// [0,1] of a point: constant `a`; step `a` for u < split, `b` otherwise;
/// gradient from `a` at the west edge to `b` at the east edge.
struct Surface {
  SurfaceFamily family = SurfaceFamily::Constant;
  double a = 0.0;
  double b = 0.0;
  double split = 0.5;

  static Surface constant(double v) { return {SurfaceFamily::Constant, v, v, 0.5}; }
  static Surface step(double west, double east, double split = 0.5) {
    return {SurfaceFamily::Step, west, east, split};
  }
  static Surface gradient(double west, double east) {
    return {SurfaceFamily::LinearGradient, west, east, 0.5};
  }
  double at(double u) const;
};

struct ScenarioSpec {
  int rows = 10;
  int cols = 10;
  double cell_size = 1000.0;  // meters
  std::vector<Surface> coefficients{Surface::constant(1.0), Surface::constant(2.0)};
  double noise_sigma = 0.0;
  Surface group_share = Surface::gradient(0.2, 0.8);
  Surface drive_share = Surface::constant(0.8);
  double od_density = 0.1;  // chance a (home, work) pair carries workers
  int max_workers = 20;
  std::optional<int> highway_row;  // node row carrying the fast corridor
  std::string highway_label = "H-1";
  double highway_speed = 29.06;
  double local_speed = 13.9;
  std::uint64_t seed = 1;

  void validate() const;
};

ScenarioSpec scenario_from_json(const Json& j);
Json scenario_to_json(const ScenarioSpec& spec);

struct Scenario {
  TractSet tracts;
  DesignData design;
  std::vector<TransformSpec> design_spec;
  Graph graph;
  std::vector<Node> nodes;
  std::vector<EdgeInput> edges;
  EdgeTractMap edge_map;
  ODTable od;
  HighwayNetworkGeom highways;
  Matrix true_coefficients;  // tracts × terms, evaluated at centroids
};

/// Square-cell grid with a corner lattice street graph; response built from
/// the coefficient surfaces plus N(0, sigma²) noise from the seeded generator.
Scenario generate(const ScenarioSpec& spec);

/// Writes tracts.geojson, attributes.csv, nodes.csv, edges.csv, od.csv,
/// highways.geojson, truth.csv and a ready-to-run config.json.
void write_scenario(const Scenario& scenario, const ScenarioSpec& spec,
                    const std::filesystem::path& dir);

std::string tracts_geojson(const TractSet& tracts, const std::vector<std::string>& columns,
                           const Json& metadata = Json::object());

}  // namespace tractequity
