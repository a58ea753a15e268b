#include "tractequity/ols.hpp"

#include <algorithm>

namespace tractequity {

OlsFit fit_ols(const DesignData& data) {
  const Matrix& X = data.X;
  const Eigen::Index n = X.rows(), p = X.cols();
  if (n <= p)
    throw RangeError("fit_ols: n=" + std::to_string(n) + " must exceed column count " +
                     std::to_string(p));

  const auto qr = pivoted_qr(X);
  if (qr.rank() < p) {
    std::string names;
    for (auto c : dependent_columns(qr)) {
      if (!names.empty()) names += ", ";
      names += c < static_cast<Eigen::Index>(data.column_names.size())
                   ? data.column_names[static_cast<std::size_t>(c)]
                   : "column " + std::to_string(c);
    }
    throw SingularityError("fit_ols: design is rank deficient; collinear columns: " + names);
  }

  OlsFit fit;
  fit.n = n;
  fit.k = p - 1;
  fit.terms = data.column_names;
  fit.coefficients = qr.solve(data.y);
  fit.residuals = data.y - X * fit.coefficients;
  const Matrix cov = robust_covariance(X, fit.residuals);
  fit.robust_se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.t_stats = Vector::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i)
    if (fit.robust_se[i] > 0.0) fit.t_stats[i] = fit.coefficients[i] / fit.robust_se[i];
    else fit.t_stats[i] = kNaN;

  const double rss = fit.residuals.squaredNorm();
  const double tss = (data.y.array() - data.y.mean()).square().sum();
  fit.r_squared = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : (rss == 0.0 ? 1.0 : 0.0);
  return fit;
}

}  // namespace tractequity
