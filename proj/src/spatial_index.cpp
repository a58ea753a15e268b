#include "tractequity/spatial_index.hpp"

#include "tractequity/geometry.hpp"

#include <algorithm>
#include <numeric>

namespace tractequity {

KdTree::KdTree(PointMatrix points) : points_(std::move(points)) {
  std::vector<std::size_t> idx(size());
  std::iota(idx.begin(), idx.end(), 0);
  nodes_.reserve(idx.size());
  root_ = build(idx, 0, idx.size(), 0);
}

std::size_t KdTree::build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi,
                          int depth) {
  if (lo >= hi) return kNoIndex;
  const int axis = depth % 2;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                   [&](std::size_t a, std::size_t b) {
                     const double va = points_(a, axis), vb = points_(b, axis);
                     return va < vb || (va == vb && a < b);
                   });
  const std::size_t self = nodes_.size();
  nodes_.push_back(Node{idx[mid], axis});
  const std::size_t left = build(idx, lo, mid, depth + 1);
  const std::size_t right = build(idx, mid + 1, hi, depth + 1);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree::search(std::size_t node, const Point& q, std::size_t k,
                    std::vector<Neighbor>& heap) const {
  if (node == kNoIndex) return;
  const Node& nd = nodes_[node];
  const Point p = points_.row(nd.point).transpose();
  const Neighbor cand{nd.point, euclidean(q, p)};
  if (heap.size() < k) {
    heap.push_back(cand);
    std::push_heap(heap.begin(), heap.end());
  } else if (cand < heap.front()) {
    std::pop_heap(heap.begin(), heap.end());
    heap.back() = cand;
    std::push_heap(heap.begin(), heap.end());
  }

  const double diff = q[nd.axis] - p[nd.axis];
  const std::size_t near = diff <= 0.0 ? nd.left : nd.right;
  const std::size_t far = diff <= 0.0 ? nd.right : nd.left;
  search(near, q, k, heap);
  // Equal plane distance may still hide a lower-index tie.
  if (heap.size() < k || std::abs(diff) <= heap.front().distance) search(far, q, k, heap);
}

std::vector<Neighbor> KdTree::knn(const Point& query, std::size_t k) const {
  if (k > size()) throw RangeError("knn: k=" + std::to_string(k) + " exceeds point count " +
                                   std::to_string(size()));
  std::vector<Neighbor> heap;
  heap.reserve(k + 1);
  if (k > 0) search(root_, query, k, heap);
  std::sort_heap(heap.begin(), heap.end());
  return heap;
}

Neighbor KdTree::nearest(const Point& query) const {
  if (size() == 0) throw RangeError("nearest: empty index");
  return knn(query, 1).front();
}

}  // namespace tractequity
