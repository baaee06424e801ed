#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lagdtw/clustering.hpp"
#include "lagdtw/dtw.hpp"
#include "lagdtw/matrix.hpp"

namespace lagdtw {

/// Sign of Gamma(i, j) when series i leads series j.
///
/// For dtw(X_i, X_j) with X_j a copy of X_i delayed by l samples, the
/// optimal path runs along j = i + l, so the offsets i - j concentrate at -l.
/// A leader row therefore carries negative entries. Ground truth, the CCF
/// estimator and the ranking all derive their orientation from this value.
inline constexpr int kLeadSign = -1;

enum class LagEstimator { mode, median, ccf_auc };

std::string_view to_string(LagEstimator estimator) noexcept;

/// Antisymmetric n x n matrix of pairwise lags with a zero diagonal.
struct LeadLagMatrix {
  Matrix values;
  LagEstimator estimator = LagEstimator::mode;
};

/// Offsets i - j along a warping path.
std::vector<int> path_offsets(const WarpingPath& path);

/// Mode (ties: smallest |value|, then the negative one) or median (mean of
/// the two middle values for even counts).
double lag_estimate(std::span<const int> offsets, LagEstimator estimator);

/// Lags from DTW paths on every same-cluster pair; cross-cluster entries are 0.
LeadLagMatrix leadlag_matrix_dtw(const Matrix& series, const ClusterAssignment& assignment,
                                 const Window& window, LagEstimator estimator);

using CorrelationKernel = std::function<double(std::span<const double>, std::span<const double>)>;

/// Pearson correlation; throws DegenerateOverlap for fewer than two samples
/// or zero variance on either side.
double pearson(std::span<const double> x, std::span<const double> y);

/// corr({X_i^{t-m}}, {X_j^t}) over the overlap of the shifted series.
double ccf(std::span<const double> xi, std::span<const double> xj, int lag,
           const CorrelationKernel& kernel = pearson);

/// Signed normalized area under |CCF| for lags 1..max_lag, oriented so that
/// a leading row carries the sign kLeadSign. Entries lie in [-1, 1].
LeadLagMatrix ccf_auc_leadlag(const Matrix& series, int max_lag,
                              const CorrelationKernel& kernel = pearson);

struct ErrorReport {
  Matrix error;
  double mse = 0.0;
};

/// E = Gamma - Psi and the mean of its squared entries.
ErrorReport error_matrix(const Matrix& gamma, const Matrix& psi);

/// Index of the single nonzero loading in each row of B.
std::vector<int> factor_membership(const Matrix& loadings);

/// Pairwise lag differences kLeadSign * (L[j][f] - L[i][f]) for series
/// sharing factor f; zero across factors.
Matrix ground_truth_psi(const Matrix& lags, const Matrix& loadings);

enum class Detector { dtw_mode, dtw_median, ccf_auc };

std::string_view to_string(Detector detector) noexcept;
Detector parse_detector(std::string_view text);

struct DetectorConfig {
  Detector detector = Detector::dtw_mode;
  int clusters = 1;                         ///< K
  Window window = Window::bounded(5);       ///< S
  int max_lag = 5;                          ///< M, for ccf_auc
  bool root_distance = true;                ///< cluster on sqrt of DTW cost
  MedoidInit init = MedoidInit::build;
  std::uint64_t seed = 0;
};

struct Detection {
  LeadLagMatrix gamma;
  std::optional<ClusterAssignment> assignment;  ///< DTW detectors only
};

/// Full detection on the rows of `series`: DTW distance matrix, K-Medoids,
/// per-cluster path lags (or the CCF benchmark).
Detection detect(const Matrix& series, const DetectorConfig& config);

/// All-pairs DTW pass shared by detection and the synthetic sweeps: the
/// distance used for clustering and both lag estimates for every pair.
struct PairwiseDtw {
  Matrix distance;
  Matrix mode_lag;    ///< antisymmetric, dense
  Matrix median_lag;  ///< antisymmetric, dense
};

PairwiseDtw pairwise_dtw(const Matrix& series, const Window& window, bool root_distance);

/// Keeps same-cluster entries of a dense lag matrix and zeroes the rest.
Matrix mask_to_clusters(const Matrix& dense, const ClusterAssignment& assignment);

void write_leadlag_csv(const std::filesystem::path& path, const Matrix& values,
                       const std::vector<std::string>& asset_ids);
Matrix read_leadlag_csv(const std::filesystem::path& path, std::vector<std::string>* asset_ids = nullptr);

void write_leadlag_json(const std::filesystem::path& path, const LeadLagMatrix& gamma,
                        const std::vector<std::string>& asset_ids);
LeadLagMatrix read_leadlag_json(const std::filesystem::path& path,
                                std::vector<std::string>* asset_ids = nullptr);

}  // namespace lagdtw
