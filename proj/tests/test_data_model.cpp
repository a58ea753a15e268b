#include "doctest.h"

#include "helpers.hpp"
#include "oracles.hpp"
#include "tractequity/data_model.hpp"

#include <numbers>
#include <random>

using namespace tractequity;

namespace {

const char* kFourSquares = R"({"type":"FeatureCollection","features":[
 {"type":"Feature","properties":{"tract_id":"A"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}},
 {"type":"Feature","properties":{"tract_id":"B"},"geometry":{"type":"Polygon","coordinates":[[[1,0],[2,0],[2,1],[1,1],[1,0]]]}},
 {"type":"Feature","properties":{"tract_id":"C"},"geometry":{"type":"Polygon","coordinates":[[[0,1],[1,1],[1,2],[0,2],[0,1]]]}},
 {"type":"Feature","properties":{"tract_id":"D"},"geometry":{"type":"MultiPolygon","coordinates":[[[[1,1],[2,1],[2,2],[1,2],[1,1]]]]}}]})";

const char* kFourRows =
    "tract_id,population,commuters,group_share,v\n"
    "D,40,4,0.4,1\nC,30,3,0.3,2\nB,20,2,0.2,3\nA,10,1,0.1,4\n";

}  // namespace

TEST_SUITE("data_model") {
  TEST_CASE("four-tract grid joins fully and sorts by id") {
    const TractLoad load = join_tracts(Json::parse(kFourSquares), parse_csv(kFourRows));
    CHECK(load.tracts.size() == 4);
    CHECK(load.dropped.empty());
    CHECK(load.tracts.ids() == std::vector<std::string>{"A", "B", "C", "D"});
    CHECK(load.tracts.population()[0] == 10.0);
    CHECK(load.tracts.centroid(3).isApprox(Point(1.5, 1.5)));
    CHECK(load.tracts.attribute("v")[1] == 3.0);
  }

  TEST_CASE("unmatched id is dropped and reported") {
    const std::string csv = "tract_id,population,commuters,group_share\n"
                            "A,1,1,0.5\nB,1,1,0.5\nC,1,1,0.5\nZ,1,1,0.5\n";
    const TractLoad load = join_tracts(Json::parse(kFourSquares), parse_csv(csv));
    CHECK(load.tracts.size() == 3);
    REQUIRE(load.dropped.size() == 2);  // Z has no geometry, D has no row
    bool names_z = false;
    for (const auto& d : load.dropped) names_z = names_z || d.find("Z") != std::string::npos;
    CHECK(names_z);
  }

  TEST_CASE("non-numeric cell names row and column") {
    const std::string csv = "tract_id,population,commuters,group_share\n"
                            "A,1,1,0.5\nB,many,1,0.5\nC,1,1,0.5\nD,1,1,0.5\n";
    try {
      join_tracts(Json::parse(kFourSquares), parse_csv(csv));
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("line 3") != std::string::npos);
      CHECK(msg.find("population") != std::string::npos);
    }
  }

  TEST_CASE("duplicate id and malformed geometry") {
    Json fc = Json::parse(kFourSquares);
    fc["features"][1]["properties"]["tract_id"] = "A";
    CHECK_THROWS_AS(join_tracts(fc, parse_csv(kFourRows)), ValidationError);

    Json bad = Json::parse(kFourSquares);
    bad["features"][2]["geometry"]["coordinates"] = "nope";
    try {
      join_tracts(bad, parse_csv(kFourRows));
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("C") != std::string::npos);
    }
  }

  TEST_CASE("tract invariants are validated") {
    CHECK_THROWS_AS(testutil::grid(2, 2, 1.0, 1.5), ValidationError);
    std::vector<Polygon> degenerate{Polygon::from_parts({{Ring{{0, 0}, {1, 1}, {2, 2}}}})};
    CHECK_THROWS_AS(TractSet({"x"}, degenerate, {"population", "commuters", "group_share"},
                             Matrix::Constant(1, 3, 0.5)),
                    ValidationError);
  }

  TEST_CASE("build_design applies log and drops non-positive rows") {
    Matrix v(3, 2);
    v << 1.0, 1.0, std::numbers::e, 2.0, std::numbers::e * std::numbers::e, 3.0;
    TractSet t = testutil::line({0, 1, 2}, v, {"v", "y"});
    const DesignData d = build_design(t, {{"y", Transform::Identity, Role::Response, ""},
                                          {"v", Transform::Log, Role::Predictor, ""}});
    CHECK(d.n() == 3);
    CHECK(d.X.col(0).isOnes());
    CHECK(d.X(0, 1) == doctest::Approx(0.0));
    CHECK(d.X(1, 1) == doctest::Approx(1.0));
    CHECK(d.X(2, 1) == doctest::Approx(2.0));
    CHECK(d.column_names == std::vector<std::string>{"Intercept", "v (log)"});

    v(1, 0) = 0.0;
    t = testutil::line({0, 1, 2}, v, {"v", "y"});
    const DesignData dropped = build_design(t, {{"y", Transform::Identity, Role::Response, ""},
                                                {"v", Transform::Log, Role::Predictor, ""}});
    CHECK(dropped.n() == 2);
    CHECK(dropped.dropped_ids == std::vector<std::string>{"t1"});

    const DesignData ident = build_design(t, {{"y", Transform::Identity, Role::Response, ""},
                                              {"v", Transform::Identity, Role::Predictor, ""}});
    CHECK(ident.X.col(1) == t.attribute("v"));
    CHECK(ident.y == t.attribute("y"));
  }

  TEST_CASE("build_design errors") {
    Matrix v(2, 1);
    v << -1.0, 0.0;
    const TractSet t = testutil::line({0, 1}, v, {"v"});
    CHECK_THROWS_AS(build_design(t, {{"v", Transform::Log, Role::Response, ""}}), EmptyDesignError);
    CHECK_THROWS_AS(build_design(t, {{"v", Transform::Identity, Role::Predictor, ""}}), ValidationError);
    CHECK_THROWS(build_design(t, {{"missing", Transform::Identity, Role::Response, ""}}));
  }

  TEST_CASE("distance to nearest highway") {
    // A tract centered at the origin.
    const TractSet t = testutil::line({0.0});
    HighwayNetworkGeom hw;
    hw.polylines.push_back({Polyline{Point(3000, -1000), Point(3000, 1000)}, HighwayClass::Interstate, "I"});
    CHECK(distance_to_nearest_highway(t, hw)[0] == doctest::Approx(3.0));

    HighwayNetworkGeom through;
    through.polylines.push_back({Polyline{Point(-5, 0), Point(5, 0)}, HighwayClass::UsRoute, "U"});
    CHECK(distance_to_nearest_highway(t, through)[0] == 0.0);

    CHECK_THROWS(distance_to_nearest_highway(t, HighwayNetworkGeom{}));
  }

  TEST_CASE("highway distance is translation invariant and matches brute force") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 10000.0);
    const TractSet t = testutil::grid(5, 5);
    HighwayNetworkGeom hw;
    for (int l = 0; l < 20; ++l) {
      Polyline pl;
      for (int k = 0; k < 5; ++k) pl.push_back(Point(u(rng), u(rng)));
      hw.polylines.push_back({pl, HighwayClass::StateRoute, "S" + std::to_string(l)});
    }
    const Vector d = distance_to_nearest_highway(t, hw);
    for (std::size_t i = 0; i < t.size(); ++i) {
      double best = kInf;
      for (const auto& h : hw.polylines)
        for (std::size_t k = 0; k + 1 < h.line.size(); ++k)
          best = std::min(best, point_segment_distance(t.centroid(i), h.line[k], h.line[k + 1]));
      CHECK(d[static_cast<Eigen::Index>(i)] == doctest::Approx(best / 1000.0));
      CHECK(d[static_cast<Eigen::Index>(i)] >= 0.0);
    }

    const Point shift(12345.0, -678.0);
    std::vector<Polygon> moved;
    for (const auto& p : t.polygons()) {
      Ring r = p.rings()[0];
      for (auto& q : r) q += shift;
      moved.push_back(Polygon::from_parts({{r}}));
    }
    const TractSet t2(t.ids(), moved, t.attribute_names(), t.attributes());
    HighwayNetworkGeom hw2 = hw;
    for (auto& h : hw2.polylines)
      for (auto& q : h.line) q += shift;
    const Vector d2 = distance_to_nearest_highway(t2, hw2);
    for (Eigen::Index i = 0; i < d.size(); ++i) CHECK(d2[i] == doctest::Approx(d[i]).epsilon(1e-9));
  }

  TEST_CASE("knn examples and properties") {
    const TractSet t = testutil::line({0, 1, 2, 3});
    auto one = knn(t, 0, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].first == "t0");
    CHECK(one[0].second == 0.0);

    auto two = knn(t, 0, 2);
    CHECK(two[1].first == "t1");
    CHECK(two[1].second == doctest::Approx(1.0));
    CHECK_THROWS_AS(knn(t, 0, 5), RangeError);

    const TractSet g = testutil::grid(6, 7, 100.0);
    for (std::size_t i = 0; i < g.size(); i += 5) {
      const auto all = knn(g, i, g.size());
      const auto brute = oracle::knn(g.centroids(), g.centroid(i), g.size());
      for (std::size_t k = 0; k < all.size(); ++k) {
        CHECK(all[k].first == g.id(brute[k].index));
        CHECK(all[k].second == brute[k].distance);
      }
      for (std::size_t k = 1; k < g.size(); ++k) {
        const auto a = knn(g, i, k), b = knn(g, i, k + 1);
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
        CHECK(a.back().second <= b.back().second);
      }
    }
  }
}
