#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lagdtw/leadlag.hpp"
#include "lagdtw/matrix.hpp"
#include "lagdtw/panel.hpp"

namespace lagdtw {

/// Lagged multi-factor model
///   X_i^t = sum_j B_ij f_j^{t - L_ij} + sigma * eps_i^t
/// with f and eps standard normal.
struct FactorModelSpec {
  std::size_t length = 100;  ///< T
  Matrix loadings;           ///< B, n x k
  Matrix lags;               ///< L, n x k, integers in [0, max_lag]
  double sigma = 1.0;
  int max_lag = 5;  ///< M
  std::uint64_t seed = 0;

  std::size_t series() const noexcept { return loadings.rows(); }
  std::size_t factors() const noexcept { return loadings.cols(); }

  /// Throws InvalidSpec (or NotSingleMembership) when inconsistent.
  void validate() const;
};

struct SyntheticPanel {
  Panel panel;
  Matrix psi;
  std::vector<int> membership;  ///< factor index per series
  FactorModelSpec spec;
};

/// Six-row single-membership template with `factors` equal blocks of unit
/// loadings. Within a block of r rows the lags are round(q * max_lag / (r - 1))
/// for q = 0..r-1, so the defaults reproduce
///   k=1: 0 1 2 3 4 5      k=2: 0 2 4 | 0 2 4      k=3: 0 3 | 0 3 | 0 3
FactorModelSpec lagged_template(int factors, int block_max_lag);
int default_template_lag(int factors);
inline FactorModelSpec lagged_template(int factors) {
  return lagged_template(factors, default_template_lag(factors));
}

/// Factor paths are drawn with max_lag burn-in samples so every lagged
/// index is defined; rows are exact shifted copies when sigma = 0.
SyntheticPanel generate(const FactorModelSpec& spec);

/// Tiles the row block of B and L until it has n_total rows.
FactorModelSpec replicate_rows(const FactorModelSpec& spec, std::size_t n_total);

enum class SweepAxis { sigma, window };

enum class SweepMethod { dtw_kmed_mode, dtw_kmed_median, euc_kmed, man_kmed, cos_kmed, kmeans };

std::string_view to_string(SweepMethod method) noexcept;
SweepMethod parse_sweep_method(std::string_view text);

struct SweepConfig {
  std::string setting;
  FactorModelSpec spec;
  SweepAxis axis = SweepAxis::sigma;
  std::vector<double> grid;
  std::vector<SweepMethod> methods{SweepMethod::dtw_kmed_mode, SweepMethod::dtw_kmed_median};
  DetectorConfig detector;  ///< clusters, window (for sigma sweeps), root_distance, init
  int repetitions = 100;
  std::uint64_t seed = 0;
};

struct SweepRow {
  std::string setting;
  double grid_value = 0.0;
  SweepMethod method = SweepMethod::dtw_kmed_mode;
  double mean_ari = 0.0;
  double ari_lo = 0.0;
  double ari_hi = 0.0;
  double mean_mse = 0.0;  ///< NaN for clusterers that produce no lags
  double mse_lo = 0.0;
  double mse_hi = 0.0;
  int reps = 0;      ///< successful replicates
  int failures = 0;  ///< replicates whose pipeline threw
};

/// generate -> cluster -> Gamma -> (ARI vs factor membership, MSE vs Psi)
/// per grid point, aggregated as mean +- 1.96 * sd / sqrt(reps). Replicate r
/// uses derive_seed(seed, r) at every grid point.
std::vector<SweepRow> sweep(const SweepConfig& config);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace lagdtw
