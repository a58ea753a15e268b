#include "tractequity/pipeline.hpp"

#include "tractequity/report.hpp"
#include "tractequity/version.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace tractequity {

namespace fs = std::filesystem;

namespace {

struct PresetEntry {
  const char* column;
  Transform transform;
  const char* label;
};

constexpr std::array<PresetEntry, 4> kLimitedControls{{
    {"prop_white", Transform::Identity, "Proportion White"},
    {"median_hh_income", Transform::Identity, "Median household income"},
    {"truck_volume", Transform::Log, "Truck traffic volume (log)"},
    {"dist_highway_km", Transform::Identity, "Distance to highway"},
}};

constexpr std::array<PresetEntry, 7> kExtraControls{{
    {"intersection_density", Transform::Identity, "Intersection density"},
    {"grade_mean", Transform::Log, "Grade mean (log)"},
    {"prop_single_family", Transform::Identity, "Prop single-family"},
    {"median_rooms", Transform::Identity, "Median rooms per home"},
    {"mean_hh_size", Transform::Identity, "Mean household size"},
    {"pop_density", Transform::Log, "Population density (log)"},
    {"median_home_value", Transform::Log, "Median home value (log)"},
}};

std::string mapped(const Json& column_map, const std::string& canonical) {
  if (column_map.contains(canonical)) return column_map.at(canonical).get<std::string>();
  return canonical;
}

TransformSpec variable_from_json(const Json& j, Role default_role) {
  TransformSpec s;
  if (j.is_string()) {
    s.column = j.get<std::string>();
    s.role = default_role;
    return s;
  }
  s.column = j.at("column").get<std::string>();
  s.transform = parse_transform(j.value("transform", "identity"));
  s.role = j.contains("role") ? parse_role(j.at("role").get<std::string>()) : default_role;
  s.label = j.value("label", "");
  return s;
}

std::vector<TransformSpec> controls_from_json(const Json& controls, const Json& column_map) {
  if (controls.is_string()) return control_preset(controls.get<std::string>(), column_map);
  std::vector<TransformSpec> out;
  for (const auto& c : controls) out.push_back(variable_from_json(c, Role::Predictor));
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::optional<fs::path> optional_path(const Json& inputs, const char* key, const fs::path& base) {
  if (!inputs.contains(key) || inputs.at(key).is_null()) return std::nullopt;
  return resolve(base, inputs.at(key).get<std::string>());
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  return s;
}

Json polygon_geometry(const Polygon& poly) {
  Json rings = Json::array();
  for (const auto& ring : poly.rings()) {
    Json coords = Json::array();
    for (const auto& p : ring) coords.push_back({p.x(), p.y()});
    if (!ring.empty()) coords.push_back({ring.front().x(), ring.front().y()});
    rings.push_back(std::move(coords));
  }
  // Outer rings are CCW and holes CW, so each CCW ring opens a new part.
  Json parts = Json::array();
  for (std::size_t r = 0; r < poly.rings().size(); ++r) {
    if (signed_area(poly.rings()[r]) > 0.0 || parts.empty()) parts.push_back(Json::array());
    parts.back().push_back(rings[r]);
  }
  if (parts.size() == 1) return Json{{"type", "Polygon"}, {"coordinates", parts[0]}};
  return Json{{"type", "MultiPolygon"}, {"coordinates", parts}};
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::vector<TransformSpec> control_preset(std::string_view name, const Json& column_map) {
  std::vector<TransformSpec> out;
  auto add = [&](const PresetEntry& e) {
    out.push_back({mapped(column_map, e.column), e.transform, Role::Predictor, e.label});
  };
  if (name == "limited") {
    for (const auto& e : kLimitedControls) add(e);
  } else if (name == "full") {
    for (const auto& e : kLimitedControls) add(e);
    for (const auto& e : kExtraControls) add(e);
  } else if (name == "none") {
  } else {
    throw ValidationError("unknown control set '" + std::string(name) + "' (limited, full, none)");
  }
  return out;
}

std::string config_hash(const Json& config) {
  Json copy = config;
  copy.erase("workers");
  copy.erase("output_dir");
  return hex64(fnv1a64(copy.dump()));
}

RunConfig parse_run_config(const Json& j, const fs::path& base_dir) {
  RunConfig c;
  try {
    const Json& in = j.at("inputs");
    c.inputs.tracts = resolve(base_dir, in.at("tracts").get<std::string>());
    c.inputs.attributes = resolve(base_dir, in.at("attributes").get<std::string>());
    c.inputs.highways = optional_path(in, "highways", base_dir);
    c.inputs.nodes = optional_path(in, "nodes", base_dir);
    c.inputs.edges = optional_path(in, "edges", base_dir);
    c.inputs.od = optional_path(in, "od", base_dir);

    if (j.contains("columns")) {
      const Json& cols = j.at("columns");
      c.columns.id = cols.value("id", c.columns.id);
      c.columns.population = cols.value("population", c.columns.population);
      c.columns.commuters = cols.value("commuters", c.columns.commuters);
      c.columns.group_share = cols.value("group_share", c.columns.group_share);
    }
    const Json column_map = j.value("column_map", Json::object());
    c.highway_distance_column = mapped(column_map, "dist_highway_km");

    TransformSpec response{mapped(column_map, "pm25"), Transform::Log, Role::Response, "PM2.5 (log)"};
    if (j.contains("response")) response = variable_from_json(j.at("response"), Role::Response);
    response.role = Role::Response;
    TransformSpec main{mapped(column_map, "vkt"), Transform::Log, Role::Predictor, "VKT (log)"};
    if (j.contains("main_predictor")) main = variable_from_json(j.at("main_predictor"), Role::Predictor);

    auto with_controls = [&](const Json& controls) {
      std::vector<TransformSpec> v{response, main};
      for (auto& s : controls_from_json(controls, column_map)) v.push_back(std::move(s));
      return v;
    };
    std::vector<TransformSpec> top_variables;
    if (j.contains("variables"))
      for (const auto& v : j.at("variables")) top_variables.push_back(variable_from_json(v, Role::Predictor));

    const Json models = j.value("models", Json::array({"ols"}));
    for (const auto& m : models) {
      ModelConfig mc;
      Json controls;
      if (m.is_string()) {
        const std::string s = m.get<std::string>();
        mc.name = s;
        if (s == "model1" || s == "model2") mc.estimator = Estimator::Ols;
        else if (s == "model3" || s == "model4") mc.estimator = Estimator::Gwr;
        else if (s == "ols" || s == "gwr") mc.estimator = s == "ols" ? Estimator::Ols : Estimator::Gwr;
        else throw ValidationError("unknown model preset '" + s + "'");
        if (s == "model1" || s == "model3") controls = "limited";
        if (s == "model2" || s == "model4") controls = "full";
      } else {
        mc.name = m.at("name").get<std::string>();
        const std::string est = m.value("estimator", "ols");
        if (est != "ols" && est != "gwr") throw ValidationError("unknown estimator '" + est + "'");
        mc.estimator = est == "ols" ? Estimator::Ols : Estimator::Gwr;
        if (m.contains("controls")) controls = m.at("controls");
        if (m.contains("variables"))
          for (const auto& v : m.at("variables")) mc.variables.push_back(variable_from_json(v, Role::Predictor));
      }
      if (mc.variables.empty()) {
        if (!controls.is_null()) mc.variables = with_controls(controls);
        else if (j.contains("controls")) mc.variables = with_controls(j.at("controls"));
        else if (!top_variables.empty()) mc.variables = top_variables;
        else throw ValidationError("model '" + mc.name + "' has no variables or controls");
      }
      c.models.push_back(std::move(mc));
    }
    std::set<std::string> names;
    for (const auto& m : c.models)
      if (!names.insert(m.name).second) throw ValidationError("duplicate model name '" + m.name + "'");

    if (j.contains("gwr")) {
      const Json& g = j.at("gwr");
      if (g.contains("kernel") && g.at("kernel") != "gaussian")
        throw ValidationError("only the gaussian kernel is supported");
      if (g.contains("k_min")) c.gwr.k_min = g.at("k_min").get<std::size_t>();
      if (g.contains("k_max")) c.gwr.k_max = g.at("k_max").get<std::size_t>();
      if (g.contains("neighbors_k")) c.gwr.neighbors_k = g.at("neighbors_k").get<std::size_t>();
      const std::string search = g.value("search", "golden");
      if (search != "golden" && search != "exhaustive") throw ValidationError("unknown search '" + search + "'");
      c.gwr.search = search == "golden" ? SearchMode::Golden : SearchMode::Exhaustive;
      const std::string fitted = g.value("fitted", "leave_in");
      if (fitted != "leave_in" && fitted != "leave_one_out")
        throw ValidationError("unknown fitted mode '" + fitted + "'");
      c.gwr.fitted = fitted == "leave_in" ? FittedValues::LeaveIn : FittedValues::LeaveOneOut;
      c.gwr.bandwidth_scale = g.value("bandwidth_scale", 1.0);
    }

    std::uint64_t seed = j.value("seed", std::uint64_t{0});
    if (c.inputs.nodes || c.inputs.edges || c.inputs.od) {
      if (!(c.inputs.nodes && c.inputs.edges && c.inputs.od))
        throw ValidationError("simulation needs nodes, edges and od inputs together");
      SimulationConfig s;
      const Json sim = j.value("simulation", Json::object());
      s.mode = parse_assignment_mode(sim.value("mode", "fractional"));
      if (!j.contains("seed") && sim.contains("seed")) seed = sim.at("seed").get<std::uint64_t>();
      s.exclude_home_tract = sim.value("exclude_home_tract", false);
      s.attribution = parse_attribution(sim.value("attribution", "midpoint"));
      if (sim.contains("drive_share_column")) s.drive_share_column = sim.at("drive_share_column").get<std::string>();
      if (sim.contains("speed_defaults"))
        for (const auto& [k, v] : sim.at("speed_defaults").items()) s.speeds[k] = v.get<double>();
      c.simulation = s;
    }
    if (j.contains("equity")) {
      if (!c.simulation) throw ValidationError("equity needs the simulation inputs");
      const Json& e = j.at("equity");
      EquityConfig ec;
      if (!e.contains("group")) throw ValidationError("equity.group is required");
      ec.group = e.at("group").get<std::string>();
      if (e.contains("corridors")) ec.corridors = e.at("corridors").get<std::vector<std::string>>();
      ec.buffer_m = e.value("buffer_m", 0.0);
      ec.svg = e.value("svg", true);
      c.equity = ec;
    }
    c.output_dir = resolve(base_dir, j.value("output_dir", "out"));
    c.workers = j.value("workers", 1u);
    c.stamp = {config_hash(j), seed};
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  const Json j = read_json(path);
  return parse_run_config(j, path.parent_path());
}

// --- stage helpers -------------------------------------------------------------

Ingested ingest(const InputPaths& inputs, const TractColumns& columns,
                const std::string& highway_distance_column) {
  Ingested out;
  TractLoad load = load_tracts(inputs.tracts, inputs.attributes, columns);
  out.tracts = std::move(load.tracts);
  out.dropped = std::move(load.dropped);
  if (inputs.highways) {
    out.highways = load_highways(*inputs.highways);
    if (!out.tracts.has_attribute(highway_distance_column))
      out.tracts.set_attribute(highway_distance_column,
                               distance_to_nearest_highway(out.tracts, *out.highways));
  }
  return out;
}

std::string design_csv(const DesignData& d, const RunStamp& stamp) {
  std::ostringstream out;
  out << csv_header_comment(stamp) << "tract_id," << csv_escape(d.response_name);
  for (std::size_t c = 1; c < d.column_names.size(); ++c) out << ',' << csv_escape(d.column_names[c]);
  out << '\n';
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    out << csv_escape(d.tract_ids[static_cast<std::size_t>(i)]) << ',' << format_number(d.y[i]);
    for (Eigen::Index c = 1; c < d.X.cols(); ++c) out << ',' << format_number(d.X(i, c));
    out << '\n';
  }
  return out.str();
}

std::string gwr_tracts_csv(const GwrFit& f, const RunStamp& stamp) {
  std::ostringstream out;
  out << csv_header_comment(stamp) << "tract_id";
  for (const auto& t : f.terms)
    out << ',' << csv_escape("beta " + t) << ',' << csv_escape("se " + t) << ',' << csv_escape("t " + t);
  out << ",local_r2,local_r2_raw,hat_diag,fitted,bandwidth_m,failed\n";
  for (std::size_t i = 0; i < f.tract_ids.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << csv_escape(f.tract_ids[i]);
    for (Eigen::Index k = 0; k < f.local_coefficients.cols(); ++k)
      out << ',' << format_number(f.local_coefficients(r, k)) << ',' << format_number(f.local_se(r, k))
          << ',' << format_number(f.local_t(r, k));
    out << ',' << format_number(f.local_r2[r]) << ',' << format_number(f.local_r2_raw[r]) << ','
        << format_number(f.hat_diag[r]) << ',' << format_number(f.fitted[r]) << ','
        << format_number(f.bandwidths[r]) << ',' << (f.failed[i] ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string gwr_tracts_geojson(const GwrFit& f, const TractSet& tracts, const RunStamp& stamp) {
  Json fc;
  fc["type"] = "FeatureCollection";
  fc["metadata"] = json_stamp(stamp);
  fc["features"] = Json::array();
  for (std::size_t i = 0; i < f.tract_ids.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    Json props;
    props["tract_id"] = f.tract_ids[i];
    for (std::size_t k = 0; k < f.terms.size(); ++k) {
      const auto c = static_cast<Eigen::Index>(k);
      props["beta " + f.terms[k]] = number_or_null(f.local_coefficients(r, c));
      props["t " + f.terms[k]] = number_or_null(f.local_t(r, c));
    }
    props["local_r2"] = number_or_null(f.local_r2[r]);
    props["failed"] = static_cast<bool>(f.failed[i]);
    fc["features"].push_back(Json{{"type", "Feature"},
                                  {"properties", props},
                                  {"geometry", polygon_geometry(tracts.polygon(tracts.index_of(f.tract_ids[i])))}});
  }
  return fc.dump(1) + "\n";
}

std::string bandwidth_csv(const BandwidthSelection& s, const RunStamp& stamp) {
  std::ostringstream out;
  out << csv_header_comment(stamp) << "neighbors_k,aicc,selected\n";
  for (const auto& [k, a] : s.evaluated)
    out << k << ',' << format_number(a) << ',' << (k == s.neighbors_k ? 1 : 0) << '\n';
  return out.str();
}

std::string traversal_csv(const TraversalTable& t, const RunStamp& stamp) {
  std::ostringstream out;
  out << csv_header_comment(stamp) << "tract_id,group,D_km,D_km_excl_home,C_count\n";
  for (std::size_t i = 0; i < t.tract_ids.size(); ++i)
    for (std::size_t g = 0; g < t.groups.size(); ++g) {
      const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(g);
      out << csv_escape(t.tract_ids[i]) << ',' << csv_escape(t.groups[g]) << ','
          << format_number(t.distance_km(r, c)) << ',' << format_number(t.distance_km_excl_home(r, c))
          << ',' << format_number(t.commuters(r, c)) << '\n';
    }
  return out.str();
}

TraversalTable read_traversal_csv(const fs::path& path, const TractSet& tracts) {
  if (!fs::exists(path)) throw ValidationError("missing artifact: " + path.string());
  const CsvTable t = read_csv(path);
  const std::size_t id = t.column("tract_id"), grp = t.column("group"), d = t.column("D_km"),
                    c = t.column("C_count");
  const auto dx = t.find("D_km_excl_home");
  TraversalTable out;
  out.tract_ids = tracts.ids();
  for (const auto& row : t.rows)
    if (std::find(out.groups.begin(), out.groups.end(), row[grp]) == out.groups.end())
      out.groups.push_back(row[grp]);
  const auto n = static_cast<Eigen::Index>(tracts.size()), g = static_cast<Eigen::Index>(out.groups.size());
  out.distance_km = Matrix::Zero(n, g);
  out.distance_km_excl_home = Matrix::Zero(n, g);
  out.commuters = Matrix::Zero(n, g);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto where = [&] { return path.string() + " line " + std::to_string(t.line_numbers[r]); };
    const auto j = tracts.find(row[id]);
    if (!j) throw ValidationError(where() + ": unknown tract '" + row[id] + "'");
    const auto gi = static_cast<Eigen::Index>(
        std::find(out.groups.begin(), out.groups.end(), row[grp]) - out.groups.begin());
    auto num = [&](std::size_t col) {
      const auto v = parse_cell(row[col]);
      if (!v || !std::isfinite(*v)) throw ParseError(where() + ": bad number '" + row[col] + "'");
      return *v;
    };
    const auto ji = static_cast<Eigen::Index>(*j);
    out.distance_km(ji, gi) = num(d);
    out.distance_km_excl_home(ji, gi) = dx ? num(*dx) : out.distance_km(ji, gi);
    out.commuters(ji, gi) = num(c);
  }
  return out;
}

std::string equity_csv(const InequityTable& idx, const RunStamp& stamp) {
  std::ostringstream out;
  out << csv_header_comment(stamp) << "tract_id,group,index,defined\n";
  for (std::size_t i = 0; i < idx.tract_ids.size(); ++i)
    for (std::size_t g = 0; g < idx.groups.size(); ++g)
      out << csv_escape(idx.tract_ids[i]) << ',' << csv_escape(idx.groups[g]) << ','
          << format_number(idx.index(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)))
          << ',' << (idx.defined[i] ? 1 : 0) << '\n';
  return out.str();
}

std::string equity_geojson(const InequityTable& idx, const TractSet& tracts, const RunStamp& stamp) {
  Json fc;
  fc["type"] = "FeatureCollection";
  fc["metadata"] = json_stamp(stamp);
  fc["features"] = Json::array();
  for (std::size_t i = 0; i < idx.tract_ids.size(); ++i) {
    Json props;
    props["tract_id"] = idx.tract_ids[i];
    for (std::size_t g = 0; g < idx.groups.size(); ++g)
      props["I " + idx.groups[g]] =
          number_or_null(idx.index(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)));
    props["defined"] = static_cast<bool>(idx.defined[i]);
    fc["features"].push_back(Json{{"type", "Feature"},
                                  {"properties", props},
                                  {"geometry", polygon_geometry(tracts.polygon(tracts.index_of(idx.tract_ids[i])))}});
  }
  return fc.dump(1) + "\n";
}

std::string equity_svg(const InequityTable& idx, const TractSet& tracts, std::string_view group,
                       const RunStamp& stamp) {
  // Six equal-width bins over [-m, m]; the middle boundary sits at 0.
  static constexpr std::array<const char*, 6> kColors{"#2166ac", "#67a9cf", "#d1e5f0",
                                                       "#fddbc7", "#ef8a62", "#b2182b"};
  const auto g = static_cast<Eigen::Index>(idx.group_index(group));
  double m = 0.0;
  for (std::size_t i = 0; i < idx.tract_ids.size(); ++i)
    if (idx.defined[i]) m = std::max(m, std::abs(idx.index(static_cast<Eigen::Index>(i), g)));
  if (!(m > 0.0)) m = 1.0;

  BBox box;
  for (const auto& p : tracts.polygons()) {
    box.extend(p.bbox().min);
    box.extend(p.bbox().max);
  }
  const double width = 800.0;
  const double span = std::max(box.max.x() - box.min.x(), box.max.y() - box.min.y());
  const double scale = span > 0.0 ? width / span : 1.0;
  const double height = (box.max.y() - box.min.y()) * scale;
  auto coord = [&](const Point& p) {
    return format_fixed((p.x() - box.min.x()) * scale, 2) + "," +
           format_fixed((box.max.y() - p.y()) * scale, 2);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_fixed(width, 0)
      << "\" height=\"" << format_fixed(height, 0) << "\">\n";
  out << "<!-- tractequity " << kVersion << " config=" << stamp.config_hash << " seed=" << stamp.seed
      << " group=" << group << " range=" << format_number(m) << " -->\n";
  for (std::size_t i = 0; i < idx.tract_ids.size(); ++i) {
    std::string fill = "#bdbdbd";
    if (idx.defined[i]) {
      const double v = idx.index(static_cast<Eigen::Index>(i), g);
      const int bin = std::clamp(static_cast<int>(std::floor((v + m) / (2.0 * m) * 6.0)), 0, 5);
      fill = kColors[static_cast<std::size_t>(bin)];
    }
    out << "<path fill=\"" << fill << "\" stroke=\"#ffffff\" stroke-width=\"0.5\" fill-rule=\"evenodd\" d=\"";
    for (const auto& ring : tracts.polygon(tracts.index_of(idx.tract_ids[i])).rings()) {
      for (std::size_t k = 0; k < ring.size(); ++k) out << (k == 0 ? "M" : "L") << coord(ring[k]);
      out << "Z";
    }
    out << "\"><title>" << idx.tract_ids[i] << "</title></path>\n";
  }
  out << "</svg>\n";
  return out.str();
}

// --- run -----------------------------------------------------------------------

RunResult run(const RunConfig& cfg, std::ostream* log) {
  RunResult result;
  std::string stage = "ingest";
  auto note = [&](const std::string& s) {
    if (log) *log << s << '\n';
  };
  auto emit = [&](const std::string& name, const std::string& content) {
    const fs::path p = cfg.output_dir / name;
    write_text_file(p, content);
    result.artifacts.push_back(p);
  };
  auto warn = [&](const std::string& w) {
    result.warnings.push_back(stage + ": " + w);
    note("warning: " + stage + ": " + w);
  };

  try {
    fs::create_directories(cfg.output_dir);
    fs::remove(cfg.output_dir / "PARTIAL");

    Ingested in = ingest(cfg.inputs, cfg.columns, cfg.highway_distance_column);
    for (const auto& d : in.dropped) warn(d);
    note("ingest: " + std::to_string(in.tracts.size()) + " tracts");

    // Everything a later stage references is checked before any fitting.
    stage = "validate";
    for (const auto& m : cfg.models)
      for (const auto& v : m.variables)
        if (!in.tracts.has_attribute(v.column))
          throw ValidationError("model '" + m.name + "' references missing column '" + v.column + "'");
    if (cfg.simulation && cfg.simulation->drive_share_column &&
        !in.tracts.has_attribute(*cfg.simulation->drive_share_column))
      throw ValidationError("missing drive share column '" + *cfg.simulation->drive_share_column + "'");
    if (cfg.equity) {
      if (std::find(kBinaryGroups.begin(), kBinaryGroups.end(), cfg.equity->group) == kBinaryGroups.end())
        throw ValidationError("unknown equity group '" + cfg.equity->group + "'");
      if (!cfg.equity->corridors.empty() && !in.highways)
        throw ValidationError("corridor subsets need a highways input");
      for (const auto& label : cfg.equity->corridors) {
        const auto labels = in.highways->labels();
        if (std::find(labels.begin(), labels.end(), label) == labels.end())
          throw ValidationError("unknown corridor label '" + label + "'");
      }
    }

    std::vector<fs::path> report_inputs;
    for (const auto& m : cfg.models) {
      stage = "model " + m.name;
      const DesignData design = build_design(in.tracts, m.variables);
      if (!design.dropped_ids.empty())
        warn(std::to_string(design.dropped_ids.size()) + " incomplete rows dropped");
      const std::string tag = sanitize(m.name);
      emit("design_" + tag + ".csv", design_csv(design, cfg.stamp));
      if (m.estimator == Estimator::Ols) {
        const OlsFit fit = fit_ols(design);
        emit("ols_" + tag + ".csv", ols_csv(fit, cfg.stamp));
        report_inputs.push_back(result.artifacts.back());
        continue;
      }
      const NeighborDistances distances(design, in.tracts);
      const auto n = static_cast<std::size_t>(design.n());
      KernelSpec kernel;
      kernel.bandwidth_scale = cfg.gwr.bandwidth_scale;
      kernel.fitted = cfg.gwr.fitted;
      if (cfg.gwr.neighbors_k) {
        kernel.neighbors_k = *cfg.gwr.neighbors_k;
      } else {
        const std::size_t k_min = cfg.gwr.k_min.value_or(static_cast<std::size_t>(design.X.cols()) + 1);
        const std::size_t k_max = std::min(cfg.gwr.k_max.value_or(n), n);
        const BandwidthSelection sel =
            select_bandwidth(design, distances, k_min, k_max, {cfg.gwr.search, cfg.gwr.fitted, cfg.workers});
        emit("gwr_" + tag + "_bandwidth.csv", bandwidth_csv(sel, cfg.stamp));
        kernel.neighbors_k = sel.neighbors_k;
      }
      const GwrFit fit = fit_gwr(design, distances, kernel, cfg.workers);
      for (const auto& w : fit.warnings) warn(w);
      emit("gwr_" + tag + "_tracts.csv", gwr_tracts_csv(fit, cfg.stamp));
      emit("gwr_" + tag + "_tracts.geojson", gwr_tracts_geojson(fit, in.tracts, cfg.stamp));
      emit("gwr_" + tag + "_summary.csv", gwr_summary_csv(summarize_gwr(fit), cfg.stamp));
      report_inputs.push_back(result.artifacts.back());
    }

    if (cfg.simulation) {
      stage = "simulate";
      const auto& s = *cfg.simulation;
      const Graph graph = build_graph(*cfg.inputs.nodes, *cfg.inputs.edges, s.speeds);
      const EdgeTractMap map = build_edge_tract_map(graph, in.tracts, s.attribution);
      if (!map.uncovered_edges.empty())
        warn(std::to_string(map.uncovered_edges.size()) + " edges lie partly outside every tract");
      const ODTable od = load_od(*cfg.inputs.od, in.tracts);
      for (const auto& d : od.dropped) warn(d);
      TripAssignment trips = assign_groups(od, in.tracts, s.mode, cfg.stamp.seed);
      if (s.drive_share_column)
        trips = scale_by_drive_share(std::move(trips), in.tracts.attribute(*s.drive_share_column));
      const TraversalTable traversal = simulate(in.tracts, graph, map, trips, {cfg.workers});
      for (const auto& w : traversal.warnings) warn(w);
      emit("traversal.csv", traversal_csv(traversal, cfg.stamp));

      if (cfg.equity) {
        stage = "equity";
        const auto& e = *cfg.equity;
        const InequityTable index = inequity_index(traversal, s.exclude_home_tract);
        if (index.undefined_count() > 0)
          warn(std::to_string(index.undefined_count()) + " tracts undefined (no traversal or no commuters)");
        emit("equity.csv", equity_csv(index, cfg.stamp));
        emit("equity.geojson", equity_geojson(index, in.tracts, cfg.stamp));
        const auto means = summarize_equity(index, in.tracts, in.highways ? &*in.highways : nullptr,
                                            e.corridors, e.group, e.buffer_m);
        emit("equity_summary.csv", equity_summary_csv(means, cfg.stamp));
        report_inputs.push_back(result.artifacts.back());
        if (e.svg) emit("equity.svg", equity_svg(index, in.tracts, e.group, cfg.stamp));
      }
    }

    stage = "report";
    emit("report.txt", csv_header_comment(cfg.stamp) + report(report_inputs));

    std::ostringstream warnings;
    warnings << csv_header_comment(cfg.stamp);
    for (const auto& w : result.warnings) warnings << w << '\n';
    emit("warnings.txt", warnings.str());
  } catch (const Error& e) {
    write_text_file(cfg.output_dir / "PARTIAL", "failed stage: " + stage + "\n" + e.what() + "\n");
    throw StageError(stage, e.what());
  } catch (const std::exception& e) {
    write_text_file(cfg.output_dir / "PARTIAL", "failed stage: " + stage + "\n" + e.what() + "\n");
    throw StageError(stage, e.what());
  }
  return result;
}

}  // namespace tractequity
