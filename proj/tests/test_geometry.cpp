#include "doctest.h"

#include "oracles.hpp"
#include "tractequity/geometry.hpp"
#include "tractequity/spatial_index.hpp"

#include <random>

using namespace tractequity;

TEST_SUITE("geometry") {
  TEST_CASE("rectangle area, centroid and containment") {
    const Polygon sq = Polygon::rectangle(Point(0, 0), Point(2, 4));
    CHECK(sq.area() == doctest::Approx(8.0));
    CHECK(sq.centroid().isApprox(Point(1, 2)));
    CHECK(sq.contains(Point(1, 1)));
    CHECK_FALSE(sq.contains(Point(3, 1)));
    CHECK(sq.boundary_distance(Point(1, 1)) == doctest::Approx(1.0));
  }

  TEST_CASE("holes are excluded and orientation is normalized") {
    Ring outer{{0, 0}, {0, 10}, {10, 10}, {10, 0}, {0, 0}};  // clockwise, closed
    Ring hole{{4, 4}, {6, 4}, {6, 6}, {4, 6}};
    const Polygon p = Polygon::from_parts({{outer, hole}});
    CHECK(p.area() == doctest::Approx(96.0));
    CHECK(p.centroid().isApprox(Point(5, 5)));
    CHECK_FALSE(p.contains(Point(5, 5)));
    CHECK(p.contains(Point(1, 1)));
    CHECK(p.vertex_count() == 8);
  }

  TEST_CASE("L-shaped centroid") {
    const Polygon l = Polygon::from_parts({{Ring{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}}});
    CHECK(l.area() == doctest::Approx(3.0));
    CHECK(l.centroid().x() == doctest::Approx(5.0 / 6.0));
    CHECK(l.centroid().y() == doctest::Approx(5.0 / 6.0));
  }

  TEST_CASE("point to segment distance") {
    CHECK(point_segment_distance(Point(0, 0), Point(3000, -1000), Point(3000, 1000)) == doctest::Approx(3000));
    CHECK(point_segment_distance(Point(0, 5), Point(0, 0), Point(0, 10)) == 0.0);
    CHECK(point_segment_distance(Point(0, 0), Point(3, 4), Point(6, 8)) == doctest::Approx(5.0));
  }

  TEST_CASE("segment intersection including touching and collinear cases") {
    CHECK(segments_intersect(Point(0, 0), Point(2, 2), Point(0, 2), Point(2, 0)));
    CHECK(segments_intersect(Point(0, 0), Point(1, 0), Point(1, 0), Point(2, 5)));
    CHECK(segments_intersect(Point(0, 0), Point(2, 0), Point(1, 0), Point(3, 0)));
    CHECK_FALSE(segments_intersect(Point(0, 0), Point(1, 0), Point(2, 0), Point(3, 0)));
    CHECK_FALSE(segments_intersect(Point(0, 0), Point(1, 1), Point(0, 1), Point(0.4, 0.6)));
    CHECK(segment_segment_distance(Point(0, 0), Point(1, 0), Point(0, 2), Point(1, 2)) == doctest::Approx(2.0));
  }

  TEST_CASE("boundary crossings of a segment") {
    const Polygon sq = Polygon::rectangle(Point(0, 0), Point(400, 1000));
    auto t = boundary_crossings(sq, Point(0, 500), Point(1000, 500));
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    REQUIRE(t.size() == 1);
    CHECK(t[0] == doctest::Approx(0.4));
  }

  TEST_CASE("polyline touching") {
    const Polygon sq = Polygon::rectangle(Point(0, 0), Point(1, 1));
    CHECK(polyline_touches(sq, {Point(0.2, 0.2), Point(0.8, 0.8)}));
    CHECK(polyline_touches(sq, {Point(-1, 1), Point(2, 1)}));
    CHECK_FALSE(polyline_touches(sq, {Point(-1, 1.5), Point(2, 1.5)}));
    CHECK(polyline_touches(sq, {Point(-1, 1.5), Point(2, 1.5)}, 0.5));
  }

  TEST_CASE("kd-tree equals brute force, ties included") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> coord(0, 20);  // integer grid forces ties
    for (int trial = 0; trial < 50; ++trial) {
      PointMatrix pts(60, 2);
      for (Eigen::Index i = 0; i < pts.rows(); ++i) pts.row(i) << coord(rng), coord(rng);
      const KdTree tree(pts);
      for (int q = 0; q < 10; ++q) {
        const Point query(coord(rng) + 0.5 * (q % 2), coord(rng));
        for (std::size_t k : {1u, 5u, 17u, 60u}) CHECK(tree.knn(query, k) == oracle::knn(pts, query, k));
      }
    }
    CHECK_THROWS_AS(KdTree(PointMatrix::Zero(3, 2)).knn(Point(0, 0), 4), RangeError);
  }
}
