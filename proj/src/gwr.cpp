#include "tractequity/gwr.hpp"

#include "tractequity/parallel.hpp"

#include <algorithm>
#include <map>

namespace tractequity {

double adaptive_bandwidth(const TractSet& tracts, std::size_t j, std::size_t neighbors_k) {
  if (j >= tracts.size()) throw RangeError("adaptive_bandwidth: tract index out of range");
  if (neighbors_k < 1 || neighbors_k > tracts.size())
    throw RangeError("adaptive_bandwidth: neighbors_k=" + std::to_string(neighbors_k) +
                     " outside [1, " + std::to_string(tracts.size()) + "]");
  return tracts.centroid_index().knn(tracts.centroid(j), neighbors_k).back().distance;
}

LocalFit fit_local(const DesignData& data, const Vector& weights, Eigen::Index j) {
  const Matrix& X = data.X;
  const Eigen::Index n = X.rows(), p = X.cols();
  if (weights.size() != n) throw RangeError("fit_local: weight vector length mismatch");
  if (j < 0 || j >= n) throw RangeError("fit_local: row index out of range");

  std::vector<Eigen::Index> active;
  active.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    if (weights[i] >= kWeightFloor) active.push_back(i);

  LocalFit out;
  const auto m = static_cast<Eigen::Index>(active.size());
  if (m < p) return out;

  Matrix Xa(m, p);
  Vector ya(m), wa(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index i = active[static_cast<std::size_t>(r)];
    Xa.row(r) = X.row(i);
    ya[r] = data.y[i];
    wa[r] = weights[i];
  }
  const Vector sw = wa.cwiseSqrt();
  const Matrix Xw = sw.asDiagonal() * Xa;

  const auto qr = pivoted_qr(Xw);
  if (qr.rank() < p) return out;

  out.ok = true;
  out.coefficients = qr.solve(Vector(sw.cwiseProduct(ya)));
  const Matrix G = inverse_gram(qr);
  // C = (XᵀWX)⁻¹ XᵀW restricted to active rows.
  const Matrix C = G * Xa.transpose() * wa.asDiagonal();
  out.unscaled_variance = (C * C.transpose()).diagonal();

  out.hat_row = Vector::Zero(n);
  const Vector hat_active = X.row(j) * C;
  for (Eigen::Index r = 0; r < m; ++r) out.hat_row[active[static_cast<std::size_t>(r)]] = hat_active[r];

  const double wsum = wa.sum();
  const double ybar = wa.dot(ya) / wsum;
  const double tss = wa.dot((ya.array() - ybar).square().matrix());
  const double rss = wa.dot((ya - Xa * out.coefficients).array().square().matrix());
  out.local_r2_raw = tss > 0.0 ? 1.0 - rss / tss : (rss > 0.0 ? 0.0 : 1.0);
  out.local_r2 = std::clamp(out.local_r2_raw, 0.0, 1.0);
  return out;
}

// ---------------------------------------------------------------------------

NeighborDistances::NeighborDistances(const DesignData& data, const TractSet& tracts) {
  const auto n = static_cast<Eigen::Index>(data.tract_ids.size());
  PointMatrix c(n, 2);
  for (Eigen::Index i = 0; i < n; ++i)
    c.row(i) = tracts.centroid(tracts.index_of(data.tract_ids[static_cast<std::size_t>(i)])).transpose();
  distances_.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      distances_(i, j) = euclidean(c.row(i).transpose(), c.row(j).transpose());
  sorted_ = distances_;
  for (Eigen::Index j = 0; j < n; ++j) std::sort(sorted_.col(j).begin(), sorted_.col(j).end());
}

double NeighborDistances::bandwidth(Eigen::Index j, std::size_t neighbors_k) const {
  if (neighbors_k < 1 || static_cast<Eigen::Index>(neighbors_k) > size())
    throw RangeError("bandwidth: neighbors_k=" + std::to_string(neighbors_k) + " outside [1, " +
                     std::to_string(size()) + "]");
  return sorted_(static_cast<Eigen::Index>(neighbors_k) - 1, j);
}

// ---------------------------------------------------------------------------

std::size_t GwrFit::failed_count() const {
  return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), true));
}

GwrFit fit_gwr(const DesignData& data, const TractSet& tracts, const KernelSpec& kernel,
               unsigned workers) {
  return fit_gwr(data, NeighborDistances(data, tracts), kernel, workers);
}

GwrFit fit_gwr(const DesignData& data, const NeighborDistances& distances,
               const KernelSpec& kernel, unsigned workers) {
  const Eigen::Index n = data.n(), p = data.X.cols();
  if (distances.size() != n) throw RangeError("fit_gwr: distance table does not match design");
  if (static_cast<Eigen::Index>(kernel.neighbors_k) < p + 1 ||
      static_cast<Eigen::Index>(kernel.neighbors_k) > n)
    throw RangeError("fit_gwr: neighbors_k=" + std::to_string(kernel.neighbors_k) +
                     " outside [" + std::to_string(p + 1) + ", " + std::to_string(n) + "]");
  if (!(kernel.bandwidth_scale > 0.0)) throw RangeError("fit_gwr: bandwidth_scale must be positive");

  GwrFit fit;
  fit.terms = data.column_names;
  fit.tract_ids = data.tract_ids;
  fit.neighbors_k = kernel.neighbors_k;
  fit.local_coefficients = Matrix::Constant(n, p, kNaN);
  fit.local_se = Matrix::Constant(n, p, kNaN);
  fit.local_t = Matrix::Constant(n, p, kNaN);
  fit.local_r2 = Vector::Constant(n, kNaN);
  fit.local_r2_raw = Vector::Constant(n, kNaN);
  fit.hat_diag = Vector::Constant(n, kNaN);
  fit.fitted = Vector::Constant(n, kNaN);
  fit.bandwidths = Vector::Zero(n);
  fit.failed.assign(static_cast<std::size_t>(n), true);
  Matrix unscaled = Matrix::Constant(n, p, kNaN);

  parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t jj) {
    const auto j = static_cast<Eigen::Index>(jj);
    const double b = kernel.bandwidth_scale * distances.bandwidth(j, kernel.neighbors_k);
    fit.bandwidths[j] = b;
    if (!(b > 0.0)) return;
    const LocalFit local = fit_local(data, gaussian_weights(distances.from(j), b), j);
    if (!local.ok) return;
    fit.failed[jj] = false;
    fit.local_coefficients.row(j) = local.coefficients.transpose();
    unscaled.row(j) = local.unscaled_variance.transpose();
    fit.hat_diag[j] = local.hat_row[j];
    fit.fitted[j] = data.X.row(j).dot(local.coefficients);
    fit.local_r2[j] = local.local_r2;
    fit.local_r2_raw[j] = local.local_r2_raw;
  });

  // Ordered reductions keep the totals independent of the schedule.
  double rss = 0.0, rss_loo = 0.0, trace = 0.0;
  std::vector<std::string> failed_ids;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (fit.failed[static_cast<std::size_t>(j)]) {
      failed_ids.push_back(data.tract_ids[static_cast<std::size_t>(j)]);
      continue;
    }
    const double e = data.y[j] - fit.fitted[j];
    rss += e * e;
    const double e_loo = fit.hat_diag[j] < 1.0 ? e / (1.0 - fit.hat_diag[j]) : kInf;
    rss_loo += e_loo * e_loo;
    trace += fit.hat_diag[j];
    ++fit.n_used;
  }
  fit.rss = rss;
  fit.rss_loo = rss_loo;
  fit.trace_S = trace;
  const double dof = static_cast<double>(fit.n_used) - trace;
  fit.sigma2 = dof > 0.0 ? rss / dof : kNaN;
  if (fit.n_used > 0)
    fit.aicc = aicc(kernel.fitted == FittedValues::LeaveIn ? rss : rss_loo, trace, fit.n_used);

  for (Eigen::Index j = 0; j < n; ++j) {
    if (fit.failed[static_cast<std::size_t>(j)]) continue;
    for (Eigen::Index c = 0; c < p; ++c) {
      const double se = std::sqrt(fit.sigma2 * unscaled(j, c));
      fit.local_se(j, c) = se;
      fit.local_t(j, c) = se > 0.0 ? fit.local_coefficients(j, c) / se : kNaN;
    }
  }

  if (!failed_ids.empty() && 10 * failed_ids.size() > static_cast<std::size_t>(n)) {
    std::string list;
    for (const auto& id : failed_ids) list += (list.empty() ? "" : ", ") + id;
    fit.warnings.push_back(std::to_string(failed_ids.size()) + " of " + std::to_string(n) +
                           " tracts are locally rank deficient (k=" +
                           std::to_string(kernel.neighbors_k) + "): " + list);
  }
  return fit;
}

// ---------------------------------------------------------------------------

BandwidthSelection select_bandwidth(const DesignData& data, const TractSet& tracts,
                                    std::size_t k_min, std::size_t k_max,
                                    const SearchOptions& options) {
  return select_bandwidth(data, NeighborDistances(data, tracts), k_min, k_max, options);
}

BandwidthSelection select_bandwidth(const DesignData& data, const NeighborDistances& distances,
                                    std::size_t k_min, std::size_t k_max,
                                    const SearchOptions& options) {
  const auto p = static_cast<std::size_t>(data.X.cols());
  const auto n = static_cast<std::size_t>(data.n());
  if (k_min < p + 1 || k_min > k_max || k_max > n)
    throw RangeError("select_bandwidth: need " + std::to_string(p + 1) +
                     " <= k_min <= k_max <= " + std::to_string(n) + ", got [" +
                     std::to_string(k_min) + ", " + std::to_string(k_max) + "]");

  std::map<std::size_t, double> memo;
  auto score = [&](std::size_t k) {
    if (auto it = memo.find(k); it != memo.end()) return it->second;
    KernelSpec kernel{k, 1.0, options.fitted};
    const GwrFit fit = fit_gwr(data, distances, kernel, options.workers);
    const double s = fit.failed_count() == 0 ? fit.aicc : kInf;
    memo.emplace(k, s);
    return s;
  };

  std::size_t lo = k_min, hi = k_max;
  if (options.mode == SearchMode::Golden) {
    constexpr double shrink = 0.3819660112501051;  // 2 - golden ratio
    while (hi - lo + 1 > kExhaustiveWindow) {
      const auto step = static_cast<std::size_t>(std::lround(shrink * static_cast<double>(hi - lo)));
      const std::size_t c = lo + step;
      const std::size_t d = std::max(hi - step, c + 1);
      const double fc = score(c), fd = score(d);
      if (fc < fd - kAiccTieTolerance) hi = d - 1;
      else if (fd < fc - kAiccTieTolerance) lo = c + 1;
      else lo = c;
    }
  }
  for (std::size_t k = lo; k <= hi; ++k) score(k);

  BandwidthSelection out;
  for (const auto& [k, s] : memo) {
    out.evaluated.emplace_back(k, s);
    if (!std::isfinite(s)) continue;
    if (out.neighbors_k == 0 || s < out.aicc - kAiccTieTolerance ||
        std::abs(s - out.aicc) <= kAiccTieTolerance) {
      out.neighbors_k = k;
      out.aicc = s;
    }
  }
  if (out.neighbors_k == 0)
    throw SelectionError("select_bandwidth: every candidate in [" + std::to_string(k_min) + ", " +
                         std::to_string(k_max) + "] is locally rank deficient");
  return out;
}

// ---------------------------------------------------------------------------

GwrSummary summarize_gwr(const GwrFit& fit) {
  const Eigen::Index p = fit.local_coefficients.cols();
  GwrSummary s;
  s.terms = fit.terms;
  s.neighbors_k = fit.neighbors_k;
  s.mean = Vector::Constant(p, kNaN);
  s.min = Vector::Constant(p, kNaN);
  s.max = Vector::Constant(p, kNaN);
  s.pct_sig_neg = Vector::Zero(p);
  s.pct_sig_pos = Vector::Zero(p);
  s.excluded = fit.failed_count();

  std::vector<Eigen::Index> rows;
  for (Eigen::Index j = 0; j < fit.local_coefficients.rows(); ++j)
    if (!fit.failed[static_cast<std::size_t>(j)]) rows.push_back(j);
  s.tracts_used = rows.size();
  if (rows.empty()) return s;

  const double m = static_cast<double>(rows.size());
  for (Eigen::Index c = 0; c < p; ++c) {
    double sum = 0.0, lo = kInf, hi = -kInf;
    std::size_t neg = 0, pos = 0;
    for (auto j : rows) {
      const double b = fit.local_coefficients(j, c);
      sum += b;
      lo = std::min(lo, b);
      hi = std::max(hi, b);
      const double t = fit.local_t(j, c);
      if (t < -kSignificanceT) ++neg;
      if (t > kSignificanceT) ++pos;
    }
    s.mean[c] = sum / m;
    s.min[c] = lo;
    s.max[c] = hi;
    s.pct_sig_neg[c] = static_cast<double>(neg) / m;
    s.pct_sig_pos[c] = static_cast<double>(pos) / m;
  }
  double sum = 0.0, lo = kInf, hi = -kInf;
  for (auto j : rows) {
    sum += fit.local_r2[j];
    lo = std::min(lo, fit.local_r2[j]);
    hi = std::max(hi, fit.local_r2[j]);
  }
  s.mean_local_r2 = sum / m;
  s.min_local_r2 = lo;
  s.max_local_r2 = hi;
  return s;
}

}  // namespace tractequity
