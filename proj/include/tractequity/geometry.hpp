#pragma once

#include "tractequity/types.hpp"

#include <vector>

namespace tractequity {

/// Closed ring; the closing vertex is implicit (first != last).
using Ring = std::vector<Point>;
using Polyline = std::vector<Point>;

struct BBox {
  Point min{kInf, kInf};
  Point max{-kInf, -kInf};

  void extend(const Point& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  bool contains(const Point& p, double pad = 0.0) const {
    return p.x() >= min.x() - pad && p.x() <= max.x() + pad && p.y() >= min.y() - pad &&
           p.y() <= max.y() + pad;
  }
  bool overlaps(const BBox& o, double pad = 0.0) const {
    return min.x() - pad <= o.max.x() && o.min.x() - pad <= max.x() &&
           min.y() - pad <= o.max.y() && o.min.y() - pad <= max.y();
  }
};

/// Planar polygon, possibly multi-part and with holes. Rings are stored with
/// outer rings counter-clockwise and holes clockwise, so signed ring areas sum
/// to the enclosed area. Containment uses the even-odd rule over all rings.
class Polygon {
 public:
  Polygon() = default;

  /// `parts[i][0]` is the exterior ring of part i, the rest are its holes.
  /// A duplicated closing vertex is removed.
  static Polygon from_parts(const std::vector<std::vector<Ring>>& parts);
  static Polygon rectangle(const Point& lo, const Point& hi);

  const std::vector<Ring>& rings() const { return rings_; }
  const BBox& bbox() const { return bbox_; }
  std::size_t vertex_count() const;

  double area() const;
  Point centroid() const;

  bool contains(const Point& p) const;
  double boundary_distance(const Point& p) const;

 private:
  std::vector<Ring> rings_;
  BBox bbox_;
};

double signed_area(const Ring& ring);

double point_segment_distance(const Point& p, const Point& a, const Point& b);

/// True when closed segments [a,b] and [c,d] share at least one point.
bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d);

double segment_segment_distance(const Point& a, const Point& b, const Point& c,
                                const Point& d);

/// Parameters t in (0,1) where segment a->b meets the polygon boundary,
/// including the endpoints of collinear overlaps. Unsorted, may repeat.
std::vector<double> boundary_crossings(const Polygon& poly, const Point& a, const Point& b);

/// Polygon (interior or boundary) within `buffer` of the polyline.
bool polyline_touches(const Polygon& poly, const Polyline& line, double buffer = 0.0);

double euclidean(const Point& a, const Point& b);

}  // namespace tractequity
