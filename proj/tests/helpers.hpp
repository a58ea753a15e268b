#pragma once

#include "tractequity/data_model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace testutil {

using namespace tractequity;

// Square tracts "r<row>c<col>" with population 100, commuters 10 and the
// given group share, plus any extra named columns.
inline TractSet grid(int rows, int cols, double cell = 1000.0, double share = 0.5) {
  std::vector<std::string> ids;
  std::vector<Polygon> polys;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      ids.push_back("r" + std::to_string(r) + "c" + std::to_string(c));
      const Point lo(c * cell, r * cell);
      polys.push_back(Polygon::rectangle(lo, lo + Point(cell, cell)));
    }
  Matrix attrs(rows * cols, 3);
  attrs.col(0).setConstant(100.0);
  attrs.col(1).setConstant(10.0);
  attrs.col(2).setConstant(share);
  return TractSet(ids, polys, {"population", "commuters", "group_share"}, attrs);
}

// Unit squares centered on the given x positions along y = 0.
inline TractSet line(const std::vector<double>& xs, const Matrix& extra = Matrix(),
                     const std::vector<std::string>& extra_names = {}) {
  std::vector<std::string> ids;
  std::vector<Polygon> polys;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ids.push_back("t" + std::to_string(i));
    polys.push_back(Polygon::rectangle(Point(xs[i] - 0.25, -0.25), Point(xs[i] + 0.25, 0.25)));
  }
  const auto n = static_cast<Eigen::Index>(xs.size());
  Matrix attrs(n, 3 + extra.cols());
  attrs.col(0).setConstant(100.0);
  attrs.col(1).setConstant(10.0);
  attrs.col(2).setConstant(0.5);
  if (extra.cols() > 0) attrs.rightCols(extra.cols()) = extra;
  std::vector<std::string> names{"population", "commuters", "group_share"};
  names.insert(names.end(), extra_names.begin(), extra_names.end());
  return TractSet(ids, polys, names, attrs);
}

inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tractequity_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) { return read_text_file(p); }

}  // namespace testutil
