#include "lagdtw/workflows.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "lagdtw/csv.hpp"
#include "lagdtw/error.hpp"

namespace lagdtw {
namespace {

using nlohmann::json;

void write_json(const std::filesystem::path& path, const json& doc) {
  auto out = csv::open_output(path);
  out << doc.dump(2) << '\n';
}

json detector_json(const DetectorConfig& d) {
  return {{"detector", std::string(to_string(d.detector))},
          {"K", d.clusters},
          {"window", d.window.to_string()},
          {"max_lag", d.max_lag},
          {"root_distance", d.root_distance},
          {"init", d.init == MedoidInit::build ? "build" : "random"},
          {"seed", d.seed}};
}

void write_membership_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                          const std::vector<int>& labels, const char* column) {
  auto out = csv::open_output(path);
  csv::write_row(out, {"asset", column});
  for (std::size_t i = 0; i < ids.size(); ++i) csv::write_row(out, {ids[i], std::to_string(labels[i] + 1)});
}

std::vector<MetricsRow> metrics_rows(const PnLSeries& laggers, const PnLSeries& leaders, const json& labels) {
  auto row = [&](const char* strategy, const PnLSeries& s) {
    MetricsRow r;
    r.detector = parse_detector(labels.at("detector").get<std::string>());
    r.strategy = strategy;
    r.lookback = labels.at("p").get<std::size_t>();
    r.horizon = labels.at("delta").get<std::size_t>();
    r.alpha = labels.at("alpha").get<double>();
    r.clusters = labels.at("K").get<int>();
    r.metrics = compute_metrics(s.rescaled);
    return r;
  };
  return {row("laggers", laggers), row("leaders", leaders)};
}

json backtest_labels(const BacktestConfig& c) {
  return {{"detector", std::string(to_string(c.detector.detector))},
          {"p", c.lookback},
          {"delta", c.horizon},
          {"alpha", c.alpha.value_or(0.0)},
          {"K", c.detector.clusters}};
}

}  // namespace

FactorModelSpec simulation_spec(const SimulateOptions& o) {
  int factors = 1;
  if (o.setting == "heterogeneous") {
    factors = o.factors;
    if (factors < 2) throw Error(ErrorCode::InvalidArgument, "the heterogeneous setting needs --factors 2 or 3");
  } else if (o.setting != "homogeneous") {
    throw Error(ErrorCode::InvalidArgument, "setting must be homogeneous or heterogeneous");
  }
  FactorModelSpec spec = replicate_rows(lagged_template(factors, o.template_lag.value_or(default_template_lag(factors))),
                                        o.series);
  spec.length = o.length;
  spec.sigma = o.sigma;
  spec.seed = o.seed;
  return spec;
}

Panel load_panel(const PanelSource& source) {
  const Panel raw = load_csv(source.path);
  if (source.preprocess == "equity") return preprocess_equity(raw, source.config).panel;
  if (source.preprocess == "futures") return preprocess_futures(raw, source.config).panel;
  if (source.preprocess != "none")
    throw Error(ErrorCode::InvalidArgument, "preprocess must be none, equity or futures");
  for (const double v : raw.values.data())
    if (!std::isfinite(v))
      throw Error(ErrorCode::InvalidArgument, source.path.string() + " has missing or non-finite cells; use --preprocess");
  return raw;
}

int cmd_simulate(const SimulateOptions& o) {
  const FactorModelSpec spec = simulation_spec(o);
  std::filesystem::create_directories(o.out);
  if (!o.sweep) {
    const SyntheticPanel synth = generate(spec);
    write_panel_csv(o.out / "panel.csv", synth.panel);
    write_leadlag_csv(o.out / "psi.csv", synth.psi, synth.panel.asset_ids);
    write_membership_csv(o.out / "membership.csv", synth.panel.asset_ids, synth.membership, "factor");
    write_panel_metadata(o.out / "panel.json", synth.panel, nullptr);
    return 0;
  }
  SweepConfig sc;
  sc.setting = o.setting;
  sc.spec = spec;
  sc.axis = *o.sweep;
  sc.grid = o.grid;
  sc.methods = o.methods;
  sc.detector = o.detector;
  if (!o.detector_clusters_set) sc.detector.clusters = static_cast<int>(spec.factors());
  sc.repetitions = o.repetitions;
  sc.seed = o.seed;
  if (sc.grid.empty()) throw Error(ErrorCode::InvalidArgument, "a sweep needs a nonempty --grid");
  write_sweep_csv(o.out / "sweep.csv", sweep(sc));
  return 0;
}

int cmd_detect(const DetectOptions& o) {
  const Panel panel = load_panel(o.panel);
  const Detection det = detect(panel.values, o.detector);
  std::filesystem::create_directories(o.out);
  write_leadlag_csv(o.out / "gamma.csv", det.gamma.values, panel.asset_ids);
  write_leadlag_json(o.out / "gamma.json", det.gamma, panel.asset_ids);
  if (det.assignment) write_membership_csv(o.out / "clusters.csv", panel.asset_ids, det.assignment->labels, "cluster");

  const Ranking ranking = rowsum_rank(det.gamma.values);
  auto out = csv::open_output(o.out / "ranking.csv");
  csv::write_row(out, {"rank", "asset", "row_sum"});
  for (std::size_t r = 0; r < ranking.order.size(); ++r) {
    const std::size_t i = ranking.order[r];
    csv::write_row(out, {std::to_string(r + 1), panel.asset_ids[i], csv::format_number(ranking.row_sums[i])});
  }
  return 0;
}

int cmd_backtest(const BacktestOptions& o) {
  const Panel panel = load_panel(o.panel);
  const BacktestResult result = run_backtest(panel, o.config);
  std::filesystem::create_directories(o.out);
  write_pnl_csv(o.out / "pnl_laggers.csv", result.laggers);
  write_pnl_csv(o.out / "pnl_leaders.csv", result.leaders);
  {
    auto out = csv::open_output(o.out / "cumulative_pnl.csv");
    csv::write_row(out, {"date", "laggers", "leaders"});
    double lag = 0.0;
    double lead = 0.0;
    for (std::size_t k = 0; k < result.laggers.rescaled.size(); ++k) {
      lag += result.laggers.rescaled[k];
      lead += result.leaders.rescaled[k];
      csv::write_row(out, {result.laggers.dates[k], csv::format_number(lag), csv::format_number(lead)});
    }
  }
  const BacktestConfig& c = o.config;
  json skipped = json::array();
  for (const auto& s : result.skipped) skipped.push_back({{"date", panel.dates[s.end]}, {"reason", s.reason}});
  json doc = backtest_labels(c);
  doc["l"] = c.window_length;
  doc["h"] = c.shift;
  doc["sigma_target"] = c.sigma_target;
  doc["ewma_span"] = c.ewma_span ? json(*c.ewma_span) : json(static_cast<double>(c.lookback));
  doc["detector_config"] = detector_json(c.detector);
  doc["observations"] = result.laggers.raw.size();
  doc["skipped"] = skipped;
  write_json(o.out / "backtest.json", doc);
  return 0;
}

int cmd_evaluate(const EvaluateOptions& o) {
  if (o.grid) {
    const Panel panel = load_panel(o.panel);
    const GridResult result = grid_run(panel, o.grid_spec, o.base);
    std::filesystem::create_directories(o.out);
    write_metrics_csv(o.out / "grid_metrics.csv", result.rows);
    write_metrics_json(o.out / "grid_metrics.json", result.rows);
    if (result.failures.empty()) return 0;
    auto out = csv::open_output(o.out / "failures.csv");
    csv::write_row(out, {"detector", "p", "delta", "alpha", "K", "message"});
    for (const auto& f : result.failures)
      csv::write_row(out, {std::string(to_string(f.detector)), std::to_string(f.lookback), std::to_string(f.horizon),
                           csv::format_number(f.alpha), std::to_string(f.clusters), "\"" + f.message + "\""});
    return 2;
  }

  std::vector<MetricsRow> rows;
  if (o.backtest_dir) {
    std::ifstream in(*o.backtest_dir / "backtest.json", std::ios::binary);
    const json labels = in ? json::parse(in) : backtest_labels(o.base);
    const auto part = metrics_rows(read_pnl_csv(*o.backtest_dir / "pnl_laggers.csv"),
                                   read_pnl_csv(*o.backtest_dir / "pnl_leaders.csv"), labels);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  for (const auto& file : o.pnl_files) {
    MetricsRow r;
    r.detector = o.base.detector.detector;
    r.strategy = file.stem().string();
    r.lookback = o.base.lookback;
    r.horizon = o.base.horizon;
    r.alpha = o.base.alpha.value_or(0.0);
    r.clusters = o.base.detector.clusters;
    r.metrics = compute_metrics(read_pnl_csv(file).rescaled);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "evaluate needs --in DIR, --pnl FILE or --grid");
  std::filesystem::create_directories(o.out);
  write_metrics_csv(o.out / "metrics.csv", rows);
  write_metrics_json(o.out / "metrics.json", rows);
  return 0;
}

}  // namespace lagdtw
