#pragma once

#include "tractequity/geometry.hpp"
#include "tractequity/io.hpp"
#include "tractequity/spatial_index.hpp"
#include "tractequity/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tractequity {

/// Names of the attribute columns that carry the tract's core fields.
struct TractColumns {
  std::string id = "tract_id";
  std::string population = "population";
  std::string commuters = "commuters";
  std::string group_share = "group_share";
};

/// Tract geometries joined with their attribute table. Rows are held in
/// ascending tract_id order regardless of input order.
class TractSet {
 public:
  TractSet() = default;
  TractSet(std::vector<std::string> ids, std::vector<Polygon> polygons,
           std::vector<std::string> attribute_names, Matrix attributes,
           const TractColumns& columns = {});

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;

  const Polygon& polygon(std::size_t i) const { return polygons_[i]; }
  const std::vector<Polygon>& polygons() const { return polygons_; }
  const PointMatrix& centroids() const { return centroids_; }
  Point centroid(std::size_t i) const { return centroids_.row(i).transpose(); }
  const KdTree& centroid_index() const { return index_; }

  const Vector& population() const { return population_; }
  const Vector& commuters() const { return commuters_; }
  const Vector& group_share() const { return group_share_; }

  const std::vector<std::string>& attribute_names() const { return attribute_names_; }
  const Matrix& attributes() const { return attributes_; }
  bool has_attribute(std::string_view name) const;
  Vector attribute(std::string_view name) const;
  /// Adds or replaces a derived column (for example highway distance).
  void set_attribute(const std::string& name, const Vector& values);

  /// Tract whose polygon holds `p`; boundary points on the outer edge of the
  /// tiling fall back to the first tract whose boundary is within `tol`.
  std::size_t locate(const Point& p, double tol = 1e-6) const;

 private:
  std::vector<std::string> ids_;
  std::vector<Polygon> polygons_;
  PointMatrix centroids_;
  std::vector<std::string> attribute_names_;
  Matrix attributes_;
  Vector population_, commuters_, group_share_;
  std::unordered_map<std::string, std::size_t> lookup_;
  KdTree index_;

  // Uniform bucket grid over polygon bounding boxes for locate().
  BBox extent_;
  int grid_cols_ = 0, grid_rows_ = 0;
  std::vector<std::vector<std::size_t>> buckets_;
  std::size_t bucket_of(const Point& p) const;
};

struct TractLoad {
  TractSet tracts;
  std::vector<std::string> dropped;  // one human-readable line per dropped row
};

/// Joins a GeoJSON FeatureCollection (tract_id property required) to a
/// delimited attribute file keyed by the same id.
TractLoad load_tracts(const std::filesystem::path& geojson_path,
                      const std::filesystem::path& attributes_path,
                      const TractColumns& columns = {});
TractLoad join_tracts(const Json& feature_collection, const CsvTable& attributes,
                      const TractColumns& columns = {});

std::vector<std::vector<Ring>> parse_polygon_parts(const Json& geometry);

enum class Transform { Identity, Log };
enum class Role { Response, Predictor };

struct TransformSpec {
  std::string column;
  Transform transform = Transform::Identity;
  Role role = Role::Predictor;
  std::string label;  // display name; defaults to the column (+ " (log)")

  std::string display_name() const;
};

Transform parse_transform(std::string_view s);
Role parse_role(std::string_view s);

struct DesignData {
  Vector y;
  Matrix X;  // leading intercept column
  std::vector<std::string> column_names;
  std::string response_name;
  std::vector<std::string> tract_ids;
  std::vector<std::string> dropped_ids;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index predictors() const { return X.cols() - 1; }
};

inline constexpr const char* kInterceptName = "Intercept";

/// Complete-case design: rows with a missing value, or a non-positive value
/// under log, in any used column are dropped.
DesignData build_design(const TractSet& tracts, const std::vector<TransformSpec>& spec);

/// Reorders design rows; handy for permutation checks.
DesignData permute_rows(const DesignData& data, const std::vector<std::size_t>& order);

enum class HighwayClass { Interstate, UsRoute, StateRoute };
HighwayClass parse_highway_class(std::string_view s);
std::string to_string(HighwayClass c);

struct Highway {
  Polyline line;
  HighwayClass cls = HighwayClass::Interstate;
  std::string label;
};

struct HighwayNetworkGeom {
  std::vector<Highway> polylines;
  std::vector<std::string> labels() const;
};

/// LineString / MultiLineString features with `class` and `label` properties.
HighwayNetworkGeom load_highways(const std::filesystem::path& geojson_path);
HighwayNetworkGeom parse_highways(const Json& feature_collection);

/// Centroid-to-nearest-segment Euclidean distance for every tract, in km.
Vector distance_to_nearest_highway(const TractSet& tracts, const HighwayNetworkGeom& highways);

/// The k nearest tract centroids to tract `query_index` (itself first).
std::vector<std::pair<std::string, double>> knn(const TractSet& tracts, std::size_t query_index,
                                                std::size_t k);

}  // namespace tractequity
