// lagdtw: simulate | detect | backtest | evaluate
//
// Every subcommand accepts --config FILE, a flat "key = value" file whose keys
// are long option names. Config entries are applied first, so explicit flags
// on the command line override them.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lagdtw/error.hpp"
#include "lagdtw/parallel.hpp"
#include "lagdtw/workflows.hpp"

namespace {

using namespace lagdtw;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> read_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path);
  std::vector<std::string> args;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    for (char& c : key)
      if (c == '_') c = '-';
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

// Returns argv with config-file entries spliced in right after the subcommand,
// skipping keys that also appear as flags.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config;
  for (std::size_t k = 1; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) config = args[k + 1];
    else if (args[k].rfind("--config=", 0) == 0) config = args[k].substr(9);
  }
  if (config.empty() || args.size() < 2) return args;
  auto key_of = [](const std::string& a) { return a.substr(0, a.find('=')); };
  std::vector<std::string> given;
  for (std::size_t k = 2; k < args.size(); ++k)
    if (args[k].rfind("--", 0) == 0) given.push_back(key_of(args[k]));
  std::vector<std::string> extra;
  for (const auto& entry : read_flat_config(config))
    if (std::find(given.begin(), given.end(), key_of(entry)) == given.end()) extra.push_back(entry);
  args.insert(args.begin() + 2, extra.begin(), extra.end());
  return args;
}

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out = "out";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "Flat key = value config file");
  app->add_option("--seed", c.seed, "Master seed");
  app->add_option("--threads", c.threads, "Worker thread cap (0 = all cores)");
  app->add_option("--out", c.out, "Output directory");
}

struct DetectorFlags {
  std::string detector = "dtw_mode";
  std::string window = "5";
  std::string init = "build";
};

void add_detector(CLI::App* app, DetectorFlags& f, DetectorConfig& d) {
  app->add_option("--detector", f.detector, "dtw_mode, dtw_median or ccf_auc");
  app->add_option("--k", d.clusters, "Number of clusters K");
  app->add_option("--window", f.window, "DTW window S (integer or 'unbounded')");
  app->add_option("--max-lag", d.max_lag, "Largest CCF lag M");
  app->add_option("--root-distance", d.root_distance, "Cluster on sqrt of the DTW cost");
  app->add_option("--init", f.init, "Medoid initialization: build or random");
}

void apply_detector(const DetectorFlags& f, DetectorConfig& d, std::uint64_t seed) {
  d.detector = parse_detector(f.detector);
  d.window = Window::parse(f.window);
  if (f.init == "build") d.init = MedoidInit::build;
  else if (f.init == "random") d.init = MedoidInit::random;
  else throw Error(ErrorCode::InvalidArgument, "init must be build or random");
  d.seed = seed;
}

void add_panel(CLI::App* app, PanelSource& p) {
  app->add_option("--panel", p.path, "Wide panel CSV")->required();
  app->add_option("--preprocess", p.preprocess, "none, equity or futures");
  app->add_option("--market", p.config.market_column, "Market column id");
  app->add_option("--winsor-bound", p.config.winsor_bound, "Clamp bound for returns");
  app->add_option("--day-zero-frac", p.config.day_zero_frac, "Drop days with more zero cells than this share");
  app->add_option("--asset-zero-frac", p.config.asset_zero_frac, "Drop assets with more zero days than this share");
  app->add_option("--futures-zero-days", p.config.futures_zero_day_count, "Drop futures with more zero-price days");
}

void add_backtest(CLI::App* app, BacktestConfig& c, std::optional<double>& alpha, std::optional<double>& span) {
  app->add_option("--p", c.lookback, "EWMA lookback days");
  app->add_option("--delta", c.horizon, "Holding horizon days");
  app->add_option("--alpha", alpha, "Leader fraction in (0, 1)");
  app->add_option("--l", c.window_length, "Sliding window length");
  app->add_option("--h", c.shift, "Sliding window shift");
  app->add_option("--sigma-target", c.sigma_target, "Annualized volatility target");
  app->add_option("--ewma-span", span, "EWMA span (defaults to p)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lead-lag detection with DTW and K-Medoids"};
  app.require_subcommand(1);
  // -h would collide with the window-shift option --h.
  app.set_help_flag("--help", "Print this help message and exit");

  Common common;
  DetectorFlags dflags;

  SimulateOptions sim;
  std::string sweep_axis;
  std::vector<std::string> estimators;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic panel or run an ARI/MSE sweep");
  add_common(simulate, common);
  simulate->add_option("--setting", sim.setting, "homogeneous or heterogeneous");
  simulate->add_option("--factors", sim.factors, "Number of factors (heterogeneous setting)");
  simulate->add_option("--template-lag", sim.template_lag, "Largest lag inside each factor block");
  simulate->add_option("--n", sim.series, "Number of series");
  simulate->add_option("--T", sim.length, "Series length");
  simulate->add_option("--sigma", sim.sigma, "Noise level");
  simulate->add_option("--sweep", sweep_axis, "Sweep axis: sigma or window");
  simulate->add_option("--grid", sim.grid, "Comma-separated sweep values")->delimiter(',');
  simulate->add_option("--reps", sim.repetitions, "Replicates per grid value");
  simulate->add_option("--estimators", estimators, "Comma-separated sweep estimators")->delimiter(',');
  add_detector(simulate, dflags, sim.detector);

  DetectOptions det;
  auto* detect = app.add_subcommand("detect", "Estimate the lead-lag matrix of a panel");
  add_common(detect, common);
  add_panel(detect, det.panel);
  add_detector(detect, dflags, det.detector);

  BacktestOptions bt;
  std::optional<double> alpha;
  std::optional<double> span;
  auto* backtest = app.add_subcommand("backtest", "Run the sliding-window lead-lag momentum backtest");
  add_common(backtest, common);
  add_panel(backtest, bt.panel);
  add_detector(backtest, dflags, bt.config.detector);
  add_backtest(backtest, bt.config, alpha, span);

  EvaluateOptions ev;
  std::string in_dir;
  std::vector<std::string> grid_detectors;
  std::optional<double> ev_alpha;
  std::optional<double> ev_span;
  auto* evaluate = app.add_subcommand("evaluate", "Compute performance metrics of PnL series or a parameter grid");
  add_common(evaluate, common);
  evaluate->add_option("--in", in_dir, "Directory written by the backtest subcommand");
  evaluate->add_option("--pnl", ev.pnl_files, "PnL CSV files (date,raw,rescaled)");
  evaluate->add_flag("--grid", ev.grid, "Grid mode over p, delta, alpha, K and detector");
  evaluate->add_option("--panel", ev.panel.path, "Panel CSV for grid mode");
  evaluate->add_option("--preprocess", ev.panel.preprocess, "none, equity or futures");
  evaluate->add_option("--market", ev.panel.config.market_column, "Market column id");
  evaluate->add_option("--grid-p", ev.grid_spec.lookbacks, "Lookbacks")->delimiter(',');
  evaluate->add_option("--grid-delta", ev.grid_spec.horizons, "Horizons")->delimiter(',');
  evaluate->add_option("--grid-alpha", ev.grid_spec.alphas, "Leader fractions")->delimiter(',');
  evaluate->add_option("--grid-k", ev.grid_spec.clusters, "Cluster counts")->delimiter(',');
  evaluate->add_option("--grid-detectors", grid_detectors, "Detectors")->delimiter(',');
  add_detector(evaluate, dflags, ev.base.detector);
  add_backtest(evaluate, ev.base, ev_alpha, ev_span);

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::vector<char*> raw;
    for (auto& a : args) raw.push_back(a.data());
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    set_thread_count(common.threads);
    if (simulate->parsed()) {
      apply_detector(dflags, sim.detector, common.seed);
      sim.detector_clusters_set = simulate->count("--k") > 0;
      sim.seed = common.seed;
      sim.out = common.out;
      if (sweep_axis == "sigma") sim.sweep = SweepAxis::sigma;
      else if (sweep_axis == "window") sim.sweep = SweepAxis::window;
      else if (!sweep_axis.empty()) throw Error(ErrorCode::InvalidArgument, "sweep must be sigma or window");
      if (!estimators.empty()) {
        sim.methods.clear();
        for (const auto& e : estimators) sim.methods.push_back(parse_sweep_method(e));
      }
      return cmd_simulate(sim);
    }
    if (detect->parsed()) {
      apply_detector(dflags, det.detector, common.seed);
      det.out = common.out;
      return cmd_detect(det);
    }
    if (backtest->parsed()) {
      apply_detector(dflags, bt.config.detector, common.seed);
      bt.config.alpha = alpha;
      bt.config.ewma_span = span;
      bt.out = common.out;
      return cmd_backtest(bt);
    }
    apply_detector(dflags, ev.base.detector, common.seed);
    ev.base.alpha = ev_alpha;
    ev.base.ewma_span = ev_span;
    if (!in_dir.empty()) ev.backtest_dir = in_dir;
    if (!grid_detectors.empty()) {
      ev.grid_spec.detectors.clear();
      for (const auto& d : grid_detectors) ev.grid_spec.detectors.push_back(parse_detector(d));
    }
    ev.out = common.out;
    return cmd_evaluate(ev);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
