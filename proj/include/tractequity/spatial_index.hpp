#pragma once

#include "tractequity/types.hpp"

#include <vector>

namespace tractequity {

struct Neighbor {
  std::size_t index;
  double distance;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Static 2-d tree over a fixed point set. Queries return exactly what a
/// brute-force sort by (distance, index) would return, ties included.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(PointMatrix points);

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  const PointMatrix& points() const { return points_; }

  /// The k nearest points to `query`, ascending by (distance, index).
  std::vector<Neighbor> knn(const Point& query, std::size_t k) const;
  Neighbor nearest(const Point& query) const;

 private:
  struct Node {
    std::size_t point;
    int axis;
    std::size_t left = kNoIndex;
    std::size_t right = kNoIndex;
  };

  std::size_t build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth);
  void search(std::size_t node, const Point& q, std::size_t k,
              std::vector<Neighbor>& heap) const;

  PointMatrix points_;
  std::vector<Node> nodes_;
  std::size_t root_ = kNoIndex;
};

}  // namespace tractequity
