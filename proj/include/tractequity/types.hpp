#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace tractequity {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Point = Eigen::Vector2d;
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

// Error hierarchy. Each stage throws one of these; the CLI maps them to a
// nonzero exit status with the stage name prepended.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct RangeError : Error {
  using Error::Error;
};
struct SingularityError : Error {
  using Error::Error;
};
struct EmptyDesignError : Error {
  using Error::Error;
};
struct SelectionError : Error {
  using Error::Error;
};
struct ConsistencyError : Error {
  using Error::Error;
};

}  // namespace tractequity
