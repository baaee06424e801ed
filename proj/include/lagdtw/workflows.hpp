#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lagdtw/ingest.hpp"
#include "lagdtw/leadlag.hpp"
#include "lagdtw/strategy.hpp"
#include "lagdtw/synthgen.hpp"

namespace lagdtw {

/// The four command-line workflows. Each writes its outputs under `out` and
/// returns the process exit status. Outputs depend only on the inputs and
/// options, never on the thread count.

struct SimulateOptions {
  std::string setting = "homogeneous";  ///< homogeneous (k = 1) or heterogeneous
  int factors = 1;
  std::optional<int> template_lag;  ///< largest lag inside each factor block
  std::size_t series = 120;
  std::size_t length = 100;
  double sigma = 1.0;
  std::uint64_t seed = 0;

  std::optional<SweepAxis> sweep;  ///< single panel when unset
  std::vector<double> grid;
  int repetitions = 100;
  std::vector<SweepMethod> methods{SweepMethod::dtw_kmed_mode, SweepMethod::dtw_kmed_median};
  DetectorConfig detector;
  bool detector_clusters_set = false;  ///< otherwise K = number of factors

  std::filesystem::path out = "out";
};

struct PanelSource {
  std::filesystem::path path;
  std::string preprocess = "none";  ///< none, equity or futures
  PreprocessConfig config;
};

struct DetectOptions {
  PanelSource panel;
  DetectorConfig detector;
  std::filesystem::path out = "out";
};

struct BacktestOptions {
  PanelSource panel;
  BacktestConfig config;
  std::filesystem::path out = "out";
};

struct EvaluateOptions {
  /// Directory written by the backtest workflow (pnl_*.csv + backtest.json).
  std::optional<std::filesystem::path> backtest_dir;
  /// Additional PnL files; the file stem becomes the strategy label.
  std::vector<std::filesystem::path> pnl_files;

  bool grid = false;
  PanelSource panel;
  GridSpec grid_spec;
  BacktestConfig base;

  std::filesystem::path out = "out";
};

FactorModelSpec simulation_spec(const SimulateOptions& options);
Panel load_panel(const PanelSource& source);

int cmd_simulate(const SimulateOptions& options);
int cmd_detect(const DetectOptions& options);
int cmd_backtest(const BacktestOptions& options);
int cmd_evaluate(const EvaluateOptions& options);

}  // namespace lagdtw
