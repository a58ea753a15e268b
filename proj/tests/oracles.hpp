#pragma once

// Reference implementations used only by the tests. Each one takes a
// different route to the answer than the library does.

#include "tractequity/network.hpp"
#include "tractequity/spatial_index.hpp"
#include "tractequity/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

namespace oracle {

using tractequity::Matrix;
using tractequity::Vector;

// Gauss-Jordan with partial pivoting, written out by hand.
inline Matrix invert(Matrix a) {
  const Eigen::Index n = a.rows();
  Matrix inv = Matrix::Identity(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    a.row(c).swap(a.row(piv));
    inv.row(c).swap(inv.row(piv));
    const double d = a(c, c);
    for (Eigen::Index k = 0; k < n; ++k) {
      a(c, k) /= d;
      inv(c, k) /= d;
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      for (Eigen::Index k = 0; k < n; ++k) {
        a(r, k) -= f * a(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  return inv;
}

inline Matrix gram(const Matrix& X, const Vector& w) {
  const Eigen::Index n = X.rows(), p = X.cols();
  Matrix g = Matrix::Zero(p, p);
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = 0; b < p; ++b)
      for (Eigen::Index i = 0; i < n; ++i) g(a, b) += X(i, a) * w[i] * X(i, b);
  return g;
}

// β from the normal equations (XᵀX)β = Xᵀy.
inline Vector normal_equations(const Matrix& X, const Vector& y) {
  const Vector ones = Vector::Ones(X.rows());
  Vector xty = Vector::Zero(X.cols());
  for (Eigen::Index a = 0; a < X.cols(); ++a)
    for (Eigen::Index i = 0; i < X.rows(); ++i) xty[a] += X(i, a) * y[i];
  return invert(gram(X, ones)) * xty;
}

// Weighted least squares through the explicit inverse of XᵀWX.
inline Vector wls(const Matrix& X, const Vector& y, const Vector& w) {
  Vector xwy = Vector::Zero(X.cols());
  for (Eigen::Index a = 0; a < X.cols(); ++a)
    for (Eigen::Index i = 0; i < X.rows(); ++i) xwy[a] += X(i, a) * w[i] * y[i];
  return invert(gram(X, w)) * xwy;
}

// HC1 covariance, every entry summed term by term in extended precision.
inline Matrix hc1(const Matrix& X, const Vector& e) {
  using Ld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = X.rows(), p = X.cols();
  Ld a = Ld::Zero(p, p), bread = Ld::Identity(p, p), meat = Ld::Zero(p, p);
  for (Eigen::Index r = 0; r < p; ++r)
    for (Eigen::Index c = 0; c < p; ++c)
      for (Eigen::Index i = 0; i < n; ++i) {
        const long double xr = X(i, r), xc = X(i, c), ei = e[i];
        a(r, c) += xr * xc;
        meat(r, c) += ei * ei * xr * xc;
      }
  for (Eigen::Index c = 0; c < p; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < p; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    a.row(c).swap(a.row(piv));
    bread.row(c).swap(bread.row(piv));
    const long double d = a(c, c);
    for (Eigen::Index k = 0; k < p; ++k) {
      a(c, k) /= d;
      bread(c, k) /= d;
    }
    for (Eigen::Index r = 0; r < p; ++r) {
      if (r == c) continue;
      const long double f = a(r, c);
      for (Eigen::Index k = 0; k < p; ++k) {
        a(r, k) -= f * a(c, k);
        bread(r, k) -= f * bread(c, k);
      }
    }
  }
  Matrix out = Matrix::Zero(p, p);
  for (Eigen::Index r = 0; r < p; ++r)
    for (Eigen::Index c = 0; c < p; ++c) {
      long double s = 0.0L;
      for (Eigen::Index k = 0; k < p; ++k)
        for (Eigen::Index l = 0; l < p; ++l) s += bread(r, k) * meat(k, l) * bread(l, c);
      out(r, c) = static_cast<double>(s * static_cast<long double>(n) / static_cast<long double>(n - p));
    }
  return out;
}

// AICc written with ln σ² instead of 2 ln σ.
inline double aicc(double rss, double trace, double n) {
  if (n - 2.0 - trace <= 0.0) return std::numeric_limits<double>::infinity();
  return n * std::log(rss / n) + n * std::log(2.0 * std::numbers::pi) +
         n * (n + trace) / (n - 2.0 - trace);
}

inline std::vector<tractequity::Neighbor> knn(const tractequity::PointMatrix& pts,
                                              const tractequity::Point& q, std::size_t k) {
  std::vector<tractequity::Neighbor> all;
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    all.push_back({static_cast<std::size_t>(i), (pts.row(i).transpose() - q).norm()});
  std::sort(all.begin(), all.end());
  all.resize(k);
  return all;
}

struct PathResult {
  double time = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> nodes;  // lexicographically smallest among the fastest
};

// Depth-first enumeration of every simple path from o to d.
inline PathResult enumerate_paths(const tractequity::Graph& g, std::size_t o, std::size_t d) {
  PathResult best;
  std::vector<std::size_t> path{o};
  std::vector<bool> on(g.node_count(), false);
  on[o] = true;
  std::function<void(std::size_t, double)> dfs = [&](std::size_t u, double t) {
    if (u == d) {
      if (t < best.time || (t == best.time && path < best.nodes)) {
        best.time = t;
        best.nodes = path;
      }
      return;
    }
    for (const auto& a : g.out_arcs(u)) {
      if (on[a.to]) continue;
      on[a.to] = true;
      path.push_back(a.to);
      dfs(a.to, t + a.time);
      path.pop_back();
      on[a.to] = false;
    }
  };
  dfs(o, 0.0);
  if (o == d) best = {0.0, {o}};
  return best;
}

}  // namespace oracle
