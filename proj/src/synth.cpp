#include "tractequity/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace tractequity {

double Surface::at(double u) const {
  switch (family) {
    case SurfaceFamily::Constant: return a;
    case SurfaceFamily::Step: return u < split ? a : b;
    case SurfaceFamily::LinearGradient: return a + (b - a) * u;
  }
  return a;
}

void ScenarioSpec::validate() const {
  if (rows < 2 || cols < 2) throw ValidationError("scenario grid must be at least 2x2");
  if (!(cell_size > 0.0)) throw ValidationError("scenario cell size must be positive");
  if (!(noise_sigma >= 0.0)) throw ValidationError("scenario noise sigma must be >= 0");
  if (coefficients.empty()) throw ValidationError("scenario needs at least an intercept surface");
  if (od_density < 0.0 || od_density > 1.0) throw ValidationError("od_density outside [0, 1]");
  if (max_workers < 1) throw ValidationError("max_workers must be >= 1");
  if (highway_row && (*highway_row < 0 || *highway_row > rows))
    throw ValidationError("highway_row outside the node lattice");
}

namespace {

SurfaceFamily parse_family(const std::string& s) {
  if (s == "constant") return SurfaceFamily::Constant;
  if (s == "step") return SurfaceFamily::Step;
  if (s == "linear_gradient" || s == "gradient") return SurfaceFamily::LinearGradient;
  throw ValidationError("unknown surface family '" + s + "'");
}

std::string family_name(SurfaceFamily f) {
  switch (f) {
    case SurfaceFamily::Constant: return "constant";
    case SurfaceFamily::Step: return "step";
    case SurfaceFamily::LinearGradient: return "linear_gradient";
  }
  return "constant";
}

Surface surface_from_json(const Json& j) {
  if (j.is_number()) return Surface::constant(j.get<double>());
  Surface s;
  s.family = parse_family(j.value("family", "constant"));
  s.a = j.value("a", 0.0);
  s.b = j.value("b", s.a);
  s.split = j.value("split", 0.5);
  return s;
}

Json surface_to_json(const Surface& s) {
  return Json{{"family", family_name(s.family)}, {"a", s.a}, {"b", s.b}, {"split", s.split}};
}

std::string tract_name(int index, int count) {
  const int width = std::max(4, static_cast<int>(std::to_string(count).size()));
  std::string digits = std::to_string(index);
  return "T" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

Json ring_json(const Ring& ring) {
  Json coords = Json::array();
  for (const auto& p : ring) coords.push_back({p.x(), p.y()});
  if (!ring.empty()) coords.push_back({ring.front().x(), ring.front().y()});
  return coords;
}

}  // namespace

ScenarioSpec scenario_from_json(const Json& j) {
  ScenarioSpec s;
  s.rows = j.value("rows", s.rows);
  s.cols = j.value("cols", s.cols);
  s.cell_size = j.value("cell_size", s.cell_size);
  if (j.contains("coefficients")) {
    s.coefficients.clear();
    for (const auto& c : j.at("coefficients")) s.coefficients.push_back(surface_from_json(c));
  }
  s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
  if (j.contains("group_share")) s.group_share = surface_from_json(j.at("group_share"));
  if (j.contains("drive_share")) s.drive_share = surface_from_json(j.at("drive_share"));
  s.od_density = j.value("od_density", s.od_density);
  s.max_workers = j.value("max_workers", s.max_workers);
  if (j.contains("highway_row") && !j.at("highway_row").is_null())
    s.highway_row = j.at("highway_row").get<int>();
  s.highway_label = j.value("highway_label", s.highway_label);
  s.highway_speed = j.value("highway_speed", s.highway_speed);
  s.local_speed = j.value("local_speed", s.local_speed);
  s.seed = j.value("seed", s.seed);
  s.validate();
  return s;
}

Json scenario_to_json(const ScenarioSpec& s) {
  Json j;
  j["rows"] = s.rows;
  j["cols"] = s.cols;
  j["cell_size"] = s.cell_size;
  j["coefficients"] = Json::array();
  for (const auto& c : s.coefficients) j["coefficients"].push_back(surface_to_json(c));
  j["noise_sigma"] = s.noise_sigma;
  j["group_share"] = surface_to_json(s.group_share);
  j["drive_share"] = surface_to_json(s.drive_share);
  j["od_density"] = s.od_density;
  j["max_workers"] = s.max_workers;
  j["highway_row"] = s.highway_row ? Json(*s.highway_row) : Json(nullptr);
  j["highway_label"] = s.highway_label;
  j["highway_speed"] = s.highway_speed;
  j["local_speed"] = s.local_speed;
  j["seed"] = s.seed;
  return j;
}

Scenario generate(const ScenarioSpec& spec) {
  spec.validate();
  const int rows = spec.rows, cols = spec.cols, n = rows * cols;
  const auto p = static_cast<Eigen::Index>(spec.coefficients.size());
  const double width = cols * spec.cell_size;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Tracts, row-major from the south-west corner.
  std::vector<std::string> ids;
  std::vector<Polygon> polys;
  std::vector<double> u(static_cast<std::size_t>(n));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int i = r * cols + c;
      ids.push_back(tract_name(i, n));
      const Point lo(c * spec.cell_size, r * spec.cell_size);
      polys.push_back(Polygon::rectangle(lo, lo + Point(spec.cell_size, spec.cell_size)));
      u[static_cast<std::size_t>(i)] = (c + 0.5) * spec.cell_size / width;
    }

  Matrix X(n, p);
  X.col(0).setOnes();
  for (int i = 0; i < n; ++i)
    for (Eigen::Index k = 1; k < p; ++k) X(i, k) = normal(rng);

  Scenario sc;
  sc.true_coefficients.resize(n, p);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < p; ++k)
      sc.true_coefficients(i, k) = spec.coefficients[static_cast<std::size_t>(k)].at(u[static_cast<std::size_t>(i)]);
    y[i] = X.row(i).dot(sc.true_coefficients.row(i));
  }
  if (spec.noise_sigma > 0.0)
    for (int i = 0; i < n; ++i) y[i] += spec.noise_sigma * normal(rng);

  std::uniform_int_distribution<int> population(500, 5000);
  Vector pop(n), share(n), drive(n), commuters = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    pop[i] = population(rng);
    share[i] = std::clamp(spec.group_share.at(u[static_cast<std::size_t>(i)]), 0.0, 1.0);
    drive[i] = std::clamp(spec.drive_share.at(u[static_cast<std::size_t>(i)]), 0.0, 1.0);
  }

  std::bernoulli_distribution has_flow(spec.od_density);
  std::uniform_int_distribution<int> flow(1, spec.max_workers);
  std::vector<OdPair> pairs;
  for (int h = 0; h < n; ++h)
    for (int w = 0; w < n; ++w) {
      if (h == w) continue;
      if (!has_flow(rng)) continue;
      const int count = flow(rng);
      pairs.push_back({static_cast<std::size_t>(h), static_cast<std::size_t>(w), count});
      commuters[h] += count;
    }

  std::vector<std::string> names{"y"};
  for (Eigen::Index k = 1; k < p; ++k) names.push_back("x" + std::to_string(k));
  for (const char* extra : {"population", "commuters", "group_share", "drive_share"}) names.push_back(extra);
  Matrix attrs(n, static_cast<Eigen::Index>(names.size()));
  attrs.col(0) = y;
  for (Eigen::Index k = 1; k < p; ++k) attrs.col(k) = X.col(k);
  attrs.col(p) = pop;
  attrs.col(p + 1) = commuters;
  attrs.col(p + 2) = share;
  attrs.col(p + 3) = drive;
  sc.tracts = TractSet(ids, polys, names, attrs);

  sc.design_spec.push_back({"y", Transform::Identity, Role::Response, ""});
  for (Eigen::Index k = 1; k < p; ++k)
    sc.design_spec.push_back({"x" + std::to_string(k), Transform::Identity, Role::Predictor, ""});
  sc.design = build_design(sc.tracts, sc.design_spec);

  // Corner lattice, node id = 1 + r*(cols+1) + c.
  auto node_id = [&](int r, int c) { return static_cast<NodeId>(1 + r * (cols + 1) + c); };
  for (int r = 0; r <= rows; ++r)
    for (int c = 0; c <= cols; ++c)
      sc.nodes.push_back({node_id(r, c), Point(c * spec.cell_size, r * spec.cell_size)});
  for (int r = 0; r <= rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const bool fast = spec.highway_row && *spec.highway_row == r;
      sc.edges.push_back({node_id(r, c), node_id(r, c + 1), spec.cell_size,
                          fast ? spec.highway_speed : spec.local_speed, fast ? "highway" : "local",
                          false});
    }
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c <= cols; ++c)
      sc.edges.push_back({node_id(r, c), node_id(r + 1, c), spec.cell_size, spec.local_speed,
                          "local", false});
  sc.graph = Graph(sc.nodes, sc.edges);
  sc.edge_map = build_edge_tract_map(sc.graph, sc.tracts, Attribution::Midpoint);

  // Pairs were generated in (home, work) index order, which is id order.
  sc.od.pairs = std::move(pairs);

  if (spec.highway_row) {
    const double yh = *spec.highway_row * spec.cell_size;
    sc.highways.polylines.push_back(
        {Polyline{Point(0.0, yh), Point(width, yh)}, HighwayClass::Interstate, spec.highway_label});
  }
  return sc;
}

std::string tracts_geojson(const TractSet& tracts, const std::vector<std::string>& columns,
                           const Json& metadata) {
  Json fc;
  fc["type"] = "FeatureCollection";
  if (!metadata.empty()) fc["metadata"] = metadata;
  fc["features"] = Json::array();
  std::vector<Vector> values;
  for (const auto& c : columns) values.push_back(tracts.attribute(c));
  for (std::size_t i = 0; i < tracts.size(); ++i) {
    Json feat;
    feat["type"] = "Feature";
    feat["properties"]["tract_id"] = tracts.id(i);
    for (std::size_t c = 0; c < columns.size(); ++c)
      feat["properties"][columns[c]] = values[c][static_cast<Eigen::Index>(i)];
    Json rings = Json::array();
    for (const auto& ring : tracts.polygon(i).rings()) rings.push_back(ring_json(ring));
    feat["geometry"] = Json{{"type", "Polygon"}, {"coordinates", rings}};
    fc["features"].push_back(std::move(feat));
  }
  return fc.dump(1) + "\n";
}

void write_scenario(const Scenario& sc, const ScenarioSpec& spec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const TractSet& t = sc.tracts;
  write_text_file(dir / "tracts.geojson", tracts_geojson(t, {}));

  std::ostringstream attrs;
  attrs << "tract_id";
  for (const auto& name : t.attribute_names()) attrs << ',' << name;
  attrs << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    attrs << t.id(i);
    for (Eigen::Index c = 0; c < t.attributes().cols(); ++c)
      attrs << ',' << format_number(t.attributes()(static_cast<Eigen::Index>(i), c));
    attrs << '\n';
  }
  write_text_file(dir / "attributes.csv", attrs.str());

  std::ostringstream nodes;
  nodes << "id,x,y\n";
  for (const auto& nd : sc.nodes)
    nodes << nd.id << ',' << format_number(nd.position.x()) << ',' << format_number(nd.position.y()) << '\n';
  write_text_file(dir / "nodes.csv", nodes.str());

  std::ostringstream edges;
  edges << "u,v,length_m,speed_ms,class,oneway\n";
  for (const auto& e : sc.edges)
    edges << e.u << ',' << e.v << ',' << format_number(e.length_m) << ','
          << (e.speed_ms ? format_number(*e.speed_ms) : std::string()) << ',' << e.road_class << ','
          << (e.oneway ? 1 : 0) << '\n';
  write_text_file(dir / "edges.csv", edges.str());

  std::ostringstream od;
  od << "home,work,count\n";
  for (const auto& pr : sc.od.pairs) od << t.id(pr.home) << ',' << t.id(pr.work) << ',' << pr.workers << '\n';
  write_text_file(dir / "od.csv", od.str());

  Json hw;
  hw["type"] = "FeatureCollection";
  hw["features"] = Json::array();
  for (const auto& h : sc.highways.polylines) {
    Json coords = Json::array();
    for (const auto& p : h.line) coords.push_back({p.x(), p.y()});
    hw["features"].push_back(Json{{"type", "Feature"},
                                  {"properties", {{"class", to_string(h.cls)}, {"label", h.label}}},
                                  {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}});
  }
  write_text_file(dir / "highways.geojson", hw.dump(1) + "\n");

  std::ostringstream truth;
  truth << "tract_id";
  for (const auto& name : sc.design.column_names) truth << ',' << csv_escape("beta_" + name);
  truth << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    truth << t.id(i);
    for (Eigen::Index k = 0; k < sc.true_coefficients.cols(); ++k)
      truth << ',' << format_number(sc.true_coefficients(static_cast<Eigen::Index>(i), k));
    truth << '\n';
  }
  write_text_file(dir / "truth.csv", truth.str());

  Json cfg;
  cfg["inputs"] = {{"tracts", "tracts.geojson"}, {"attributes", "attributes.csv"},
                   {"nodes", "nodes.csv"},       {"edges", "edges.csv"},
                   {"od", "od.csv"}};
  if (!sc.highways.polylines.empty()) cfg["inputs"]["highways"] = "highways.geojson";
  cfg["variables"] = Json::array();
  for (const auto& s : sc.design_spec)
    cfg["variables"].push_back({{"column", s.column},
                                {"transform", "identity"},
                                {"role", s.role == Role::Response ? "response" : "predictor"}});
  const auto p = static_cast<std::size_t>(sc.design.X.cols());
  cfg["models"] = Json::array({Json{{"name", "ols"}, {"estimator", "ols"}},
                               Json{{"name", "gwr"}, {"estimator", "gwr"}}});
  cfg["gwr"] = {{"k_min", p + 1}, {"k_max", t.size()}, {"search", "golden"}};
  cfg["simulation"] = {{"mode", "fractional"}, {"seed", spec.seed}, {"attribution", "midpoint"},
                       {"drive_share_column", "drive_share"}};
  cfg["equity"] = {{"group", "White"}};
  if (!sc.highways.polylines.empty()) cfg["equity"]["corridors"] = {spec.highway_label};
  cfg["output_dir"] = "out";
  cfg["scenario"] = scenario_to_json(spec);
  write_text_file(dir / "config.json", cfg.dump(2) + "\n");
}

}  // namespace tractequity
