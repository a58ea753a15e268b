#include "tractequity/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace tractequity {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

// Sign of the turn a->b->c, exact for the inputs as given.
int orientation(const Point& a, const Point& b, const Point& c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment_collinear(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

Ring normalized(Ring ring, bool counter_clockwise) {
  if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  if ((signed_area(ring) > 0.0) != counter_clockwise) std::reverse(ring.begin(), ring.end());
  return ring;
}

}  // namespace

double euclidean(const Point& a, const Point& b) { return std::hypot(a.x() - b.x(), a.y() - b.y()); }

double signed_area(const Ring& ring) {
  if (ring.size() < 3) return 0.0;
  const Point& o = ring.front();
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < ring.size(); ++i) twice += cross(ring[i] - o, ring[i + 1] - o);
  return 0.5 * twice;
}

Polygon Polygon::from_parts(const std::vector<std::vector<Ring>>& parts) {
  Polygon poly;
  for (const auto& part : parts) {
    for (std::size_t r = 0; r < part.size(); ++r) {
      poly.rings_.push_back(normalized(part[r], r == 0));
      for (const auto& p : poly.rings_.back()) poly.bbox_.extend(p);
    }
  }
  return poly;
}

Polygon Polygon::rectangle(const Point& lo, const Point& hi) {
  return from_parts({{Ring{lo, Point(hi.x(), lo.y()), hi, Point(lo.x(), hi.y())}}});
}

std::size_t Polygon::vertex_count() const {
  std::size_t n = 0;
  for (const auto& r : rings_) n += r.size();
  return n;
}

double Polygon::area() const {
  double a = 0.0;
  for (const auto& r : rings_) a += signed_area(r);
  return a;
}

Point Polygon::centroid() const {
  // Shift to a local origin; projected coordinates are large.
  const Point origin = rings_.empty() ? Point::Zero() : rings_.front().front();
  double total = 0.0;
  Point acc = Point::Zero();
  for (const auto& ring : rings_) {
    const std::size_t m = ring.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Point p = ring[i] - origin;
      const Point q = ring[(i + 1) % m] - origin;
      const double c = cross(p, q);
      total += c;
      acc += (p + q) * c;
    }
  }
  if (total == 0.0) return origin;
  return origin + acc / (3.0 * total);
}

bool Polygon::contains(const Point& p) const {
  // Crossing number with half-open edges: on a tiling, a point on a shared
  // edge belongs to exactly one tile (the one above / to the right).
  bool inside = false;
  for (const auto& ring : rings_) {
    const std::size_t m = ring.size();
    for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
      const Point& a = ring[i];
      const Point& b = ring[j];
      if ((a.y() > p.y()) != (b.y() > p.y())) {
        const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
        if (p.x() < x) inside = !inside;
      }
    }
  }
  return inside;
}

double Polygon::boundary_distance(const Point& p) const {
  double best = kInf;
  for (const auto& ring : rings_) {
    const std::size_t m = ring.size();
    for (std::size_t i = 0; i < m; ++i)
      best = std::min(best, point_segment_distance(p, ring[i], ring[(i + 1) % m]));
  }
  return best;
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return euclidean(p, a);
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return euclidean(p, a + t * ab);
}

bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment_collinear(a, b, c)) return true;
  if (o2 == 0 && on_segment_collinear(a, b, d)) return true;
  if (o3 == 0 && on_segment_collinear(c, d, a)) return true;
  if (o4 == 0 && on_segment_collinear(c, d, b)) return true;
  return false;
}

double segment_segment_distance(const Point& a, const Point& b, const Point& c, const Point& d) {
  if (segments_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

std::vector<double> boundary_crossings(const Polygon& poly, const Point& a, const Point& b) {
  std::vector<double> ts;
  const Point r = b - a;
  const double len2 = r.squaredNorm();
  if (len2 == 0.0) return ts;
  auto keep = [&](double t) {
    if (t > 0.0 && t < 1.0) ts.push_back(t);
  };
  for (const auto& ring : poly.rings()) {
    const std::size_t m = ring.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Point& c = ring[i];
      const Point& d = ring[(i + 1) % m];
      const Point s = d - c;
      const double denom = cross(r, s);
      if (denom != 0.0) {
        const double t = cross(c - a, s) / denom;
        const double u = cross(c - a, r) / denom;
        if (u >= 0.0 && u <= 1.0) keep(t);
      } else if (cross(c - a, r) == 0.0) {
        // Collinear: the overlap endpoints split the segment.
        keep((c - a).dot(r) / len2);
        keep((d - a).dot(r) / len2);
      }
    }
  }
  return ts;
}

bool polyline_touches(const Polygon& poly, const Polyline& line, double buffer) {
  if (line.empty()) return false;
  BBox lb;
  for (const auto& p : line) lb.extend(p);
  if (!poly.bbox().overlaps(lb, buffer)) return false;

  for (const auto& p : line)
    if (poly.contains(p)) return true;

  for (const auto& ring : poly.rings()) {
    const std::size_t m = ring.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Point& c = ring[i];
      const Point& d = ring[(i + 1) % m];
      for (std::size_t s = 0; s + 1 < line.size(); ++s) {
        if (buffer <= 0.0) {
          if (segments_intersect(line[s], line[s + 1], c, d)) return true;
        } else if (segment_segment_distance(line[s], line[s + 1], c, d) <= buffer) {
          return true;
        }
      }
    }
  }
  return false;
}

}  // namespace tractequity
