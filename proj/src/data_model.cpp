#include "tractequity/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace tractequity {

namespace {

std::string property_id(const Json& props, const std::string& key) {
  if (!props.is_object() || !props.contains(key)) return {};
  const Json& v = props.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_number(v.get<double>());
  return {};
}

Ring parse_ring(const Json& coords) {
  if (!coords.is_array()) throw ParseError("ring is not an array");
  Ring ring;
  for (const auto& c : coords) {
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number())
      throw ParseError("malformed coordinate");
    ring.emplace_back(c[0].get<double>(), c[1].get<double>());
  }
  return ring;
}

std::vector<Ring> parse_rings(const Json& coords) {
  if (!coords.is_array() || coords.empty()) throw ParseError("polygon has no rings");
  std::vector<Ring> rings;
  for (const auto& r : coords) rings.push_back(parse_ring(r));
  return rings;
}

Polyline parse_line(const Json& coords) {
  Polyline line = parse_ring(coords);
  if (line.size() < 2) throw ParseError("polyline needs at least 2 vertices");
  return line;
}

}  // namespace

// ---------------------------------------------------------------------------
// TractSet

TractSet::TractSet(std::vector<std::string> ids, std::vector<Polygon> polygons,
                   std::vector<std::string> attribute_names, Matrix attributes,
                   const TractColumns& columns) {
  const std::size_t n = ids.size();
  if (polygons.size() != n || static_cast<std::size_t>(attributes.rows()) != n ||
      static_cast<std::size_t>(attributes.cols()) != attribute_names.size())
    throw ValidationError("tract set: inconsistent input sizes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ids[a] < ids[b]; });

  ids_.reserve(n);
  polygons_.reserve(n);
  attributes_.resize(static_cast<Eigen::Index>(n), attributes.cols());
  centroids_.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t src = order[r];
    if (r > 0 && ids[src] == ids_.back())
      throw ValidationError("duplicate tract_id '" + ids[src] + "'");
    const Polygon& poly = polygons[src];
    if (poly.vertex_count() < 3 || !(std::abs(poly.area()) > 0.0))
      throw ValidationError("tract '" + ids[src] + "': polygon needs >= 3 vertices and nonzero area");
    ids_.push_back(ids[src]);
    polygons_.push_back(poly);
    attributes_.row(static_cast<Eigen::Index>(r)) = attributes.row(static_cast<Eigen::Index>(src));
    centroids_.row(static_cast<Eigen::Index>(r)) = poly.centroid().transpose();
    lookup_.emplace(ids_.back(), r);
  }
  attribute_names_ = std::move(attribute_names);

  auto core = [&](const std::string& name, double lo, double hi) {
    if (!has_attribute(name)) throw ValidationError("missing tract column '" + name + "'");
    Vector v = attribute(name);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (!(v[i] >= lo && v[i] <= hi))
        throw ValidationError("tract '" + ids_[static_cast<std::size_t>(i)] + "': " + name + "=" +
                              format_number(v[i]) + " outside [" + format_number(lo) + ", " +
                              format_number(hi) + "]");
    }
    return v;
  };
  population_ = core(columns.population, 0.0, kInf);
  commuters_ = core(columns.commuters, 0.0, kInf);
  group_share_ = core(columns.group_share, 0.0, 1.0);

  index_ = KdTree(centroids_);

  for (const auto& p : polygons_) {
    extent_.extend(p.bbox().min);
    extent_.extend(p.bbox().max);
  }
  const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n))));
  grid_cols_ = grid_rows_ = side;
  buckets_.assign(static_cast<std::size_t>(side * side), {});
  for (std::size_t i = 0; i < n; ++i) {
    const BBox& b = polygons_[i].bbox();
    const std::size_t lo = bucket_of(b.min), hi = bucket_of(b.max);
    const int c0 = static_cast<int>(lo) % side, r0 = static_cast<int>(lo) / side;
    const int c1 = static_cast<int>(hi) % side, r1 = static_cast<int>(hi) / side;
    // Pad one bucket so boundary points with tolerance still find neighbors.
    for (int r = std::max(0, r0 - 1); r <= std::min(side - 1, r1 + 1); ++r)
      for (int c = std::max(0, c0 - 1); c <= std::min(side - 1, c1 + 1); ++c)
        buckets_[static_cast<std::size_t>(r * side + c)].push_back(i);
  }
}

std::size_t TractSet::bucket_of(const Point& p) const {
  const Point span = (extent_.max - extent_.min).cwiseMax(Point(1e-12, 1e-12));
  auto cell = [](double v, int cells) {
    return std::clamp(static_cast<int>(std::floor(v * cells)), 0, cells - 1);
  };
  const int c = cell((p.x() - extent_.min.x()) / span.x(), grid_cols_);
  const int r = cell((p.y() - extent_.min.y()) / span.y(), grid_rows_);
  return static_cast<std::size_t>(r * grid_cols_ + c);
}

std::optional<std::size_t> TractSet::find(std::string_view id) const {
  auto it = lookup_.find(std::string(id));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t TractSet::index_of(std::string_view id) const {
  if (auto i = find(id)) return *i;
  throw ValidationError("unknown tract_id '" + std::string(id) + "'");
}

bool TractSet::has_attribute(std::string_view name) const {
  return std::find(attribute_names_.begin(), attribute_names_.end(), name) !=
         attribute_names_.end();
}

Vector TractSet::attribute(std::string_view name) const {
  auto it = std::find(attribute_names_.begin(), attribute_names_.end(), name);
  if (it == attribute_names_.end())
    throw ValidationError("missing attribute column '" + std::string(name) + "'");
  return attributes_.col(std::distance(attribute_names_.begin(), it));
}

void TractSet::set_attribute(const std::string& name, const Vector& values) {
  if (static_cast<std::size_t>(values.size()) != size())
    throw ValidationError("set_attribute: length mismatch for '" + name + "'");
  auto it = std::find(attribute_names_.begin(), attribute_names_.end(), name);
  if (it != attribute_names_.end()) {
    attributes_.col(std::distance(attribute_names_.begin(), it)) = values;
    return;
  }
  attribute_names_.push_back(name);
  attributes_.conservativeResize(Eigen::NoChange, attributes_.cols() + 1);
  attributes_.col(attributes_.cols() - 1) = values;
}

std::size_t TractSet::locate(const Point& p, double tol) const {
  if (size() == 0 || !extent_.contains(p, tol)) return kNoIndex;
  const auto& candidates = buckets_[bucket_of(p)];
  for (std::size_t i : candidates)
    if (polygons_[i].bbox().contains(p) && polygons_[i].contains(p)) return i;
  for (std::size_t i : candidates)
    if (polygons_[i].bbox().contains(p, tol) && polygons_[i].boundary_distance(p) <= tol) return i;
  return kNoIndex;
}

// ---------------------------------------------------------------------------
// Loading

std::vector<std::vector<Ring>> parse_polygon_parts(const Json& geometry) {
  if (!geometry.is_object() || !geometry.contains("type") || !geometry.contains("coordinates"))
    throw ParseError("geometry lacks type/coordinates");
  const std::string type = geometry.at("type").get<std::string>();
  const Json& coords = geometry.at("coordinates");
  std::vector<std::vector<Ring>> parts;
  if (type == "Polygon") {
    parts.push_back(parse_rings(coords));
  } else if (type == "MultiPolygon") {
    if (!coords.is_array()) throw ParseError("MultiPolygon coordinates not an array");
    for (const auto& poly : coords) parts.push_back(parse_rings(poly));
  } else {
    throw ParseError("unsupported geometry type '" + type + "'");
  }
  return parts;
}

TractLoad join_tracts(const Json& fc, const CsvTable& attrs, const TractColumns& columns) {
  if (!fc.is_object() || fc.value("type", "") != "FeatureCollection" || !fc.contains("features"))
    throw ParseError("tract geometry is not a GeoJSON FeatureCollection");

  std::vector<std::pair<std::string, Polygon>> geoms;
  std::set<std::string> geom_ids;
  std::size_t idx = 0;
  for (const auto& feat : fc.at("features")) {
    const std::string fid = property_id(feat.value("properties", Json::object()), columns.id);
    const std::string name = "feature #" + std::to_string(idx++) +
                             (fid.empty() ? std::string() : " (tract_id " + fid + ")");
    if (fid.empty()) throw ParseError(name + ": missing '" + columns.id + "' property");
    Polygon poly;
    try {
      poly = Polygon::from_parts(parse_polygon_parts(feat.value("geometry", Json())));
    } catch (const Error& e) {
      throw ParseError(name + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(name + ": " + e.what());
    }
    if (!geom_ids.insert(fid).second)
      throw ValidationError("duplicate tract_id '" + fid + "' in geometry file");
    geoms.emplace_back(fid, std::move(poly));
  }

  const std::size_t id_col = attrs.column(columns.id);
  std::vector<std::string> names;
  std::vector<std::size_t> value_cols;
  for (std::size_t c = 0; c < attrs.header.size(); ++c) {
    if (c == id_col) continue;
    names.push_back(attrs.header[c]);
    value_cols.push_back(c);
  }
  std::unordered_map<std::string, std::size_t> attr_row;
  for (std::size_t r = 0; r < attrs.rows.size(); ++r) {
    const std::string& id = attrs.rows[r][id_col];
    if (!attr_row.emplace(id, r).second)
      throw ValidationError("duplicate tract_id '" + id + "' in attribute file");
  }

  TractLoad out;
  std::vector<std::string> ids;
  std::vector<Polygon> polys;
  std::vector<std::size_t> rows;
  for (auto& [id, poly] : geoms) {
    auto it = attr_row.find(id);
    if (it == attr_row.end()) {
      out.dropped.push_back("tract_id " + id + ": geometry without attribute row");
      continue;
    }
    ids.push_back(id);
    polys.push_back(std::move(poly));
    rows.push_back(it->second);
  }
  for (std::size_t r = 0; r < attrs.rows.size(); ++r) {
    const std::string& id = attrs.rows[r][id_col];
    if (!geom_ids.count(id))
      out.dropped.push_back("tract_id " + id + " (line " + std::to_string(attrs.line_numbers[r]) +
                            "): attribute row without geometry");
  }

  Matrix values(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = attrs.rows[rows[i]];
    for (std::size_t c = 0; c < value_cols.size(); ++c) {
      auto v = parse_cell(row[value_cols[c]]);
      if (!v)
        throw ParseError("attribute line " + std::to_string(attrs.line_numbers[rows[i]]) +
                         ", column '" + names[c] + "': non-numeric value '" +
                         row[value_cols[c]] + "'");
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = *v;
    }
  }
  out.tracts = TractSet(std::move(ids), std::move(polys), std::move(names), std::move(values), columns);
  return out;
}

TractLoad load_tracts(const std::filesystem::path& geojson_path,
                      const std::filesystem::path& attributes_path, const TractColumns& columns) {
  return join_tracts(read_json(geojson_path), read_csv(attributes_path), columns);
}

// ---------------------------------------------------------------------------
// Design

std::string TransformSpec::display_name() const {
  if (!label.empty()) return label;
  return transform == Transform::Log ? column + " (log)" : column;
}

Transform parse_transform(std::string_view s) {
  if (s == "identity" || s == "none") return Transform::Identity;
  if (s == "log") return Transform::Log;
  throw ValidationError("unknown transform '" + std::string(s) + "'");
}

Role parse_role(std::string_view s) {
  if (s == "response") return Role::Response;
  if (s == "predictor") return Role::Predictor;
  throw ValidationError("unknown role '" + std::string(s) + "'");
}

DesignData build_design(const TractSet& tracts, const std::vector<TransformSpec>& spec) {
  const auto responses = std::count_if(spec.begin(), spec.end(),
                                       [](const auto& s) { return s.role == Role::Response; });
  if (responses != 1)
    throw ValidationError("design needs exactly one response column, found " +
                          std::to_string(responses));

  std::vector<const TransformSpec*> ordered;
  for (const auto& s : spec)
    if (s.role == Role::Response) ordered.push_back(&s);
  for (const auto& s : spec)
    if (s.role == Role::Predictor) ordered.push_back(&s);

  std::vector<Vector> raw;
  for (const auto* s : ordered) raw.push_back(tracts.attribute(s->column));

  DesignData d;
  d.response_name = ordered.front()->display_name();
  d.column_names.push_back(kInterceptName);
  for (std::size_t c = 1; c < ordered.size(); ++c) d.column_names.push_back(ordered[c]->display_name());

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < tracts.size(); ++i) {
    bool ok = true;
    for (std::size_t c = 0; c < ordered.size() && ok; ++c) {
      const double v = raw[c][static_cast<Eigen::Index>(i)];
      ok = std::isfinite(v) && (ordered[c]->transform != Transform::Log || v > 0.0);
    }
    if (ok) keep.push_back(i);
    else d.dropped_ids.push_back(tracts.id(i));
  }
  if (keep.empty()) throw EmptyDesignError("no complete rows survive filtering");

  const auto n = static_cast<Eigen::Index>(keep.size());
  const auto p = static_cast<Eigen::Index>(ordered.size());
  d.y.resize(n);
  d.X.resize(n, p);
  d.X.col(0).setOnes();
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t i = keep[static_cast<std::size_t>(r)];
    d.tract_ids.push_back(tracts.id(i));
    for (std::size_t c = 0; c < ordered.size(); ++c) {
      double v = raw[c][static_cast<Eigen::Index>(i)];
      if (ordered[c]->transform == Transform::Log) v = std::log(v);
      if (c == 0) d.y[r] = v;
      else d.X(r, static_cast<Eigen::Index>(c)) = v;
    }
  }
  return d;
}

DesignData permute_rows(const DesignData& data, const std::vector<std::size_t>& order) {
  DesignData out = data;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(order[r]);
    out.y[static_cast<Eigen::Index>(r)] = data.y[src];
    out.X.row(static_cast<Eigen::Index>(r)) = data.X.row(src);
    out.tract_ids[r] = data.tract_ids[order[r]];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Highways

HighwayClass parse_highway_class(std::string_view s) {
  if (s == "interstate") return HighwayClass::Interstate;
  if (s == "us_route") return HighwayClass::UsRoute;
  if (s == "state_route") return HighwayClass::StateRoute;
  throw ValidationError("unknown highway class '" + std::string(s) + "'");
}

std::string to_string(HighwayClass c) {
  switch (c) {
    case HighwayClass::Interstate: return "interstate";
    case HighwayClass::UsRoute: return "us_route";
    case HighwayClass::StateRoute: return "state_route";
  }
  return "interstate";
}

std::vector<std::string> HighwayNetworkGeom::labels() const {
  std::set<std::string> s;
  for (const auto& h : polylines) s.insert(h.label);
  return {s.begin(), s.end()};
}

HighwayNetworkGeom parse_highways(const Json& fc) {
  if (!fc.is_object() || !fc.contains("features"))
    throw ParseError("highway file is not a GeoJSON FeatureCollection");
  HighwayNetworkGeom net;
  std::size_t idx = 0;
  for (const auto& feat : fc.at("features")) {
    const std::string name = "highway feature #" + std::to_string(idx++);
    try {
      const Json props = feat.value("properties", Json::object());
      const HighwayClass cls = parse_highway_class(props.value("class", "interstate"));
      const std::string label = props.value("label", "");
      const Json& geom = feat.at("geometry");
      const std::string type = geom.at("type").get<std::string>();
      if (type == "LineString") {
        net.polylines.push_back({parse_line(geom.at("coordinates")), cls, label});
      } else if (type == "MultiLineString") {
        for (const auto& part : geom.at("coordinates"))
          net.polylines.push_back({parse_line(part), cls, label});
      } else {
        throw ParseError("unsupported geometry type '" + type + "'");
      }
    } catch (const Error& e) {
      throw ParseError(name + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(name + ": " + e.what());
    }
  }
  return net;
}

HighwayNetworkGeom load_highways(const std::filesystem::path& path) {
  return parse_highways(read_json(path));
}

Vector distance_to_nearest_highway(const TractSet& tracts, const HighwayNetworkGeom& highways) {
  std::size_t segments = 0;
  for (const auto& h : highways.polylines) segments += h.line.size() - 1;
  if (segments == 0) throw ValidationError("distance to highway: empty highway set");

  Vector km(static_cast<Eigen::Index>(tracts.size()));
  for (std::size_t i = 0; i < tracts.size(); ++i) {
    const Point c = tracts.centroid(i);
    double best = kInf;
    for (const auto& h : highways.polylines)
      for (std::size_t s = 0; s + 1 < h.line.size(); ++s)
        best = std::min(best, point_segment_distance(c, h.line[s], h.line[s + 1]));
    km[static_cast<Eigen::Index>(i)] = best / 1000.0;
  }
  return km;
}

std::vector<std::pair<std::string, double>> knn(const TractSet& tracts, std::size_t query_index,
                                                std::size_t k) {
  if (query_index >= tracts.size()) throw RangeError("knn: query index out of range");
  if (k < 1 || k > tracts.size())
    throw RangeError("knn: k=" + std::to_string(k) + " outside [1, " +
                     std::to_string(tracts.size()) + "]");
  std::vector<std::pair<std::string, double>> out;
  for (const auto& nb : tracts.centroid_index().knn(tracts.centroid(query_index), k))
    out.emplace_back(tracts.id(nb.index), nb.distance);
  return out;
}

}  // namespace tractequity
