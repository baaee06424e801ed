#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lagdtw/leadlag.hpp"
#include "lagdtw/matrix.hpp"
#include "lagdtw/panel.hpp"

namespace lagdtw {

inline constexpr double kTradingDays = 252.0;

struct BacktestConfig {
  std::size_t window_length = 21;  ///< l
  std::size_t shift = 1;           ///< h
  std::size_t lookback = 1;        ///< p
  std::size_t horizon = 1;         ///< delta
  std::optional<double> alpha;     ///< leader fraction; required
  double sigma_target = 0.15;
  /// EWMA span; the weight at age a is (1 - 2 / (span + 1))^a. Defaults to p.
  std::optional<double> ewma_span;
  DetectorConfig detector;

  void validate() const;
};

struct Ranking {
  std::vector<std::size_t> order;  ///< most leading first
  std::vector<double> row_sums;
};

/// Row sums of Gamma; leaders are the rows whose sum has sign kLeadSign.
/// Ties keep the lower index first.
Ranking rowsum_rank(const Matrix& gamma);

struct Baskets {
  std::vector<std::size_t> leaders;  ///< D_alpha
  std::vector<std::size_t> laggers;  ///< G_beta
};

/// First ceil(alpha * n) ranked series are leaders.
Baskets split(const Ranking& ranking, double alpha);

/// Exponentially weighted mean of the last p + 1 values of `returns`
/// (the final element is the signal date).
double ewma_signal(std::span<const double> returns, std::size_t lookback,
                   std::optional<double> span = std::nullopt);

struct PnLSeries {
  std::vector<std::string> dates;
  std::vector<double> raw;
  std::vector<double> rescaled;
};

/// sigma_target / (STD(raw) * sqrt(252)) * raw, STD with n - 1 denominator.
std::vector<double> rescale_pnl(std::span<const double> raw, double sigma_target);

struct SkippedWindow {
  std::size_t end;  ///< zero-based index of the signal date
  std::string reason;
};

struct BacktestResult {
  PnLSeries laggers;  ///< G_beta strategy
  PnLSeries leaders;  ///< D_alpha strategy
  std::vector<SkippedWindow> skipped;
};

/// Sliding-window lead-lag momentum backtest. For every window ending at
/// t = l, l + h, ..., T - delta (one-based), Gamma is detected on the
/// window, the series are ranked and split, and the sign of the leaders'
/// EWMA at t trades the mean lagger (and leader) return on t + delta.
BacktestResult run_backtest(const Panel& panel, const BacktestConfig& config);

struct MetricsReport {
  double cumulative_pnl = 0.0;
  double e_returns = 0.0;
  double volatility = 0.0;
  double downside_deviation = 0.0;
  double max_drawdown = 0.0;  ///< <= 0
  double sortino = 0.0;
  double calmar = 0.0;
  double hit_rate = 0.0;
  double avg_profit_over_avg_loss = 0.0;
  double pnl_per_trade = 0.0;  ///< basis points
  double sharpe = 0.0;
  double p_value = 1.0;
  std::size_t observations = 0;
};

/// Metrics of a (rescaled) daily PnL series. Ratios with a zero denominator
/// are reported as signed infinity, or 0 when the numerator is also 0.
MetricsReport compute_metrics(std::span<const double> pnl);

struct GridSpec {
  std::vector<std::size_t> lookbacks{1, 3, 5, 7};
  std::vector<std::size_t> horizons{1, 3, 5, 7};
  std::vector<double> alphas;
  std::vector<int> clusters{5, 10, 15, 20};
  std::vector<Detector> detectors{Detector::dtw_mode, Detector::dtw_median};
};

struct MetricsRow {
  Detector detector = Detector::dtw_mode;
  std::string strategy;  ///< "laggers" or "leaders"
  std::size_t lookback = 0;
  std::size_t horizon = 0;
  double alpha = 0.0;
  int clusters = 0;
  MetricsReport metrics;
};

struct GridFailure {
  Detector detector;
  std::size_t lookback;
  std::size_t horizon;
  double alpha;
  int clusters;
  std::string message;
};

struct GridResult {
  std::vector<MetricsRow> rows;
  std::vector<GridFailure> failures;
};

/// Backtest + metrics for every cell; `base` supplies the remaining settings.
GridResult grid_run(const Panel& panel, const GridSpec& grid, const BacktestConfig& base);

void write_pnl_csv(const std::filesystem::path& path, const PnLSeries& pnl);
PnLSeries read_pnl_csv(const std::filesystem::path& path);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);
void write_metrics_json(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);

}  // namespace lagdtw
