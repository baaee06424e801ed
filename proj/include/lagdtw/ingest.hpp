#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "lagdtw/panel.hpp"

namespace lagdtw {

/// Reads a wide CSV: first column dates, one column per asset, header row.
/// Empty cells and NA/NaN become NaN gaps. Dates must be strictly increasing.
Panel load_csv(const std::filesystem::path& path);

struct PreprocessConfig {
  double day_zero_frac = 0.10;
  double asset_zero_frac = 0.50;
  std::size_t futures_zero_day_count = 160;
  double winsor_bound = 0.15;
  std::string market_column;

  void validate() const;
};

struct PreprocessReport {
  std::string kind;  ///< "equity" or "futures"
  PreprocessConfig config;
  std::vector<std::string> dropped_dates;
  std::vector<std::string> dropped_assets;
};

struct Preprocessed {
  Panel panel;
  PreprocessReport report;
};

/// Day drop, then asset drop (gaps count as zero returns), market excess
/// return with unit beta, then clamping to +-winsor_bound. The market
/// column is removed from the output.
Preprocessed preprocess_equity(const Panel& raw, const PreprocessConfig& config);

/// Day and asset drops on zero prices, forward- then backward-fill of zero
/// prices, log-returns, then the equity excess-return and clamping steps.
/// With an empty market_column the excess-return step is skipped.
Preprocessed preprocess_futures(const Panel& raw_prices, const PreprocessConfig& config);

/// JSON sidecar: asset ids, date range, thresholds and dropped rows/columns.
void write_panel_metadata(const std::filesystem::path& path, const Panel& panel,
                          const PreprocessReport* report);

}  // namespace lagdtw
