#pragma once

#include "tractequity/data_model.hpp"
#include "tractequity/types.hpp"

#include <string>
#include <vector>

namespace tractequity {

/// Relative tolerance on |R_ii| / max|R_jj| below which a column counts as
/// linearly dependent.
inline constexpr double kRankTolerance = 1e-10;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Column-pivoted QR of X with the project-wide rank threshold.
template <typename Derived>
Eigen::ColPivHouseholderQR<DenseMatrix<typename Derived::Scalar>> pivoted_qr(
    const Eigen::MatrixBase<Derived>& X) {
  Eigen::ColPivHouseholderQR<DenseMatrix<typename Derived::Scalar>> qr;
  qr.setThreshold(kRankTolerance);
  qr.compute(X);
  return qr;
}

/// Columns the pivoted QR pushed past the numerical rank.
template <typename QR>
std::vector<Eigen::Index> dependent_columns(const QR& qr) {
  std::vector<Eigen::Index> cols;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index i = qr.rank(); i < perm.size(); ++i) cols.push_back(perm[i]);
  return cols;
}

/// (XᵀX)⁻¹ assembled from the triangular factor: P R⁻¹ R⁻ᵀ Pᵀ.
template <typename QR>
DenseMatrix<typename QR::Scalar> inverse_gram(const QR& qr) {
  using Scalar = typename QR::Scalar;
  const Eigen::Index p = qr.cols();
  const auto R = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  DenseMatrix<Scalar> Rinv = R.solve(DenseMatrix<Scalar>::Identity(p, p));
  DenseMatrix<Scalar> inner = Rinv * Rinv.transpose();
  return qr.colsPermutation() * inner * qr.colsPermutation().transpose();
}

/// HC1 sandwich: n/(n-p) (XᵀX)⁻¹ Xᵀ diag(e²) X (XᵀX)⁻¹.
template <typename DerivedX, typename DerivedE>
DenseMatrix<typename DerivedX::Scalar> robust_covariance(const Eigen::MatrixBase<DerivedX>& X,
                                                         const Eigen::MatrixBase<DerivedE>& e) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index n = X.rows(), p = X.cols();
  if (e.size() != n) throw RangeError("robust_covariance: residual length mismatch");
  if (n <= p) throw RangeError("robust_covariance: need more observations than columns");
  const auto qr = pivoted_qr(X);
  if (qr.rank() < p) throw SingularityError("robust_covariance: XᵀX is singular");
  // (XᵀX)⁻¹Xᵀ = P R⁻¹ Q₁ᵀ, so the sandwich is M Mᵀ with M = R⁻¹ Q₁ᵀ diag(e).
  // This avoids forming XᵀX and keeps the error proportional to cond(X).
  const DenseMatrix<Scalar> Q1 = qr.householderQ() * DenseMatrix<Scalar>::Identity(n, p);
  DenseMatrix<Scalar> M = Q1.transpose() * e.asDiagonal();
  qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>().solveInPlace(M);
  const DenseMatrix<Scalar> PM = qr.colsPermutation() * M;
  DenseMatrix<Scalar> cov = PM * PM.transpose();
  cov *= static_cast<Scalar>(n) / static_cast<Scalar>(n - p);
  return cov;
}

struct OlsFit {
  Vector coefficients;
  Vector robust_se;
  Vector t_stats;
  double r_squared = 0.0;
  Vector residuals;
  Eigen::Index n = 0;
  Eigen::Index k = 0;  // predictors, excluding the intercept
  std::vector<std::string> terms;
};

/// Least squares by pivoted QR with HC1 standard errors.
OlsFit fit_ols(const DesignData& data);

}  // namespace tractequity
