#pragma once

#include "tractequity/data_model.hpp"
#include "tractequity/ols.hpp"
#include "tractequity/types.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace tractequity {

/// Kernel weights below this are set to zero before the local solve.
inline constexpr double kWeightFloor = 1e-12;
/// |t| threshold used for local significance shares.
inline constexpr double kSignificanceT = 1.96;

/// Gaussian distance decay w = exp(-(d/b)²/2).
template <typename Derived>
DenseVector<typename Derived::Scalar> gaussian_weights(const Eigen::MatrixBase<Derived>& distances,
                                                       typename Derived::Scalar bandwidth) {
  using Scalar = typename Derived::Scalar;
  if (!(bandwidth > Scalar(0))) throw RangeError("gaussian_weights: bandwidth must be positive");
  return (-Scalar(0.5) * (distances.array() / bandwidth).square()).exp().matrix();
}

/// Small-sample corrected AIC of a linear smoother with hat-matrix trace
/// `trace_S`: 2n ln σ + n ln 2π + n (n + tr) / (n - 2 - tr), σ² = RSS/n.
/// Infinite when n - 2 - tr <= 0.
template <typename Scalar>
Scalar aicc(Scalar rss, Scalar trace_S, Eigen::Index n) {
  const Scalar nn = static_cast<Scalar>(n);
  const Scalar denom = nn - Scalar(2) - trace_S;
  if (!(denom > Scalar(0))) return std::numeric_limits<Scalar>::infinity();
  const Scalar sigma = std::sqrt(rss / nn);
  return Scalar(2) * nn * std::log(sigma) + nn * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) +
         nn * (nn + trace_S) / denom;
}

enum class FittedValues { LeaveIn, LeaveOneOut };

/// Adaptive Gaussian kernel: the bandwidth at each tract is the distance to
/// its `neighbors_k`-th nearest centroid (itself first), times `bandwidth_scale`.
struct KernelSpec {
  std::size_t neighbors_k = 0;
  double bandwidth_scale = 1.0;
  FittedValues fitted = FittedValues::LeaveIn;
};

/// Distance from tract j's centroid to its neighbors_k-th nearest centroid.
double adaptive_bandwidth(const TractSet& tracts, std::size_t j, std::size_t neighbors_k);

struct LocalFit {
  bool ok = false;
  Vector coefficients;
  Vector unscaled_variance;  // diag (XᵀWX)⁻¹(XᵀW²X)(XᵀWX)⁻¹
  Vector hat_row;            // x_jᵀ (XᵀWX)⁻¹ XᵀW
  double local_r2 = kNaN;    // clamped to [0,1]
  double local_r2_raw = kNaN;
};

/// Weighted least squares at design row j. Rank deficiency yields ok=false
/// rather than an exception.
LocalFit fit_local(const DesignData& data, const Vector& weights, Eigen::Index j);

/// Pairwise centroid distances for the design rows, plus per-row sorted
/// copies so adaptive bandwidths for any k are O(1).
class NeighborDistances {
 public:
  NeighborDistances(const DesignData& data, const TractSet& tracts);

  Eigen::Index size() const { return distances_.rows(); }
  /// Distances from row j to every row (column j; the matrix is symmetric).
  auto from(Eigen::Index j) const { return distances_.col(j); }
  double bandwidth(Eigen::Index j, std::size_t neighbors_k) const;

 private:
  Matrix distances_;
  Matrix sorted_;  // column j ascending
};

struct GwrFit {
  std::vector<std::string> terms;
  std::vector<std::string> tract_ids;
  Matrix local_coefficients;  // n × p
  Matrix local_se;
  Matrix local_t;
  Vector local_r2;
  Vector local_r2_raw;
  Vector hat_diag;
  Vector fitted;
  Vector bandwidths;
  std::vector<bool> failed;
  double rss = 0.0;      // leave-in residual sum of squares
  double rss_loo = 0.0;  // leave-one-out residual sum of squares
  double trace_S = 0.0;
  double sigma2 = 0.0;
  double aicc = kInf;
  Eigen::Index n_used = 0;
  std::size_t neighbors_k = 0;
  std::vector<std::string> warnings;

  std::size_t failed_count() const;
};

GwrFit fit_gwr(const DesignData& data, const TractSet& tracts, const KernelSpec& kernel,
               unsigned workers = 1);
GwrFit fit_gwr(const DesignData& data, const NeighborDistances& distances,
               const KernelSpec& kernel, unsigned workers = 1);

enum class SearchMode { Golden, Exhaustive };

struct BandwidthSelection {
  std::size_t neighbors_k = 0;
  double aicc = kInf;
  std::vector<std::pair<std::size_t, double>> evaluated;  // ascending k
};

/// Ties within this AICc margin resolve toward the larger neighbor count.
inline constexpr double kAiccTieTolerance = 1e-9;
/// Ranges up to this many candidates are scanned exhaustively.
inline constexpr std::size_t kExhaustiveWindow = 25;

struct SearchOptions {
  SearchMode mode = SearchMode::Golden;
  FittedValues fitted = FittedValues::LeaveIn;
  unsigned workers = 1;
};

/// Neighbor count in [k_min, k_max] minimizing AICc. Candidates with any
/// locally rank-deficient tract are not eligible.
BandwidthSelection select_bandwidth(const DesignData& data, const TractSet& tracts,
                                    std::size_t k_min, std::size_t k_max,
                                    const SearchOptions& options = {});
BandwidthSelection select_bandwidth(const DesignData& data, const NeighborDistances& distances,
                                    std::size_t k_min, std::size_t k_max,
                                    const SearchOptions& options = {});

struct GwrSummary {
  std::vector<std::string> terms;
  Vector mean, min, max;
  Vector pct_sig_neg;  // share of tracts with t < -1.96
  Vector pct_sig_pos;  // share of tracts with t > 1.96
  double mean_local_r2 = kNaN;
  double min_local_r2 = kNaN;
  double max_local_r2 = kNaN;
  std::size_t tracts_used = 0;
  std::size_t excluded = 0;
  std::size_t neighbors_k = 0;
};

GwrSummary summarize_gwr(const GwrFit& fit);

}  // namespace tractequity
