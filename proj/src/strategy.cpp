#include "lagdtw/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "lagdtw/csv.hpp"
#include "lagdtw/error.hpp"
#include "lagdtw/parallel.hpp"
#include "lagdtw/rng.hpp"

namespace lagdtw {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// num / den with the zero-denominator convention of the metrics report.
double ratio(double num, double den) {
  if (den != 0.0) return num / den;
  if (num == 0.0) return 0.0;
  return num > 0.0 ? kInf : -kInf;
}

double basket_mean(const Matrix& values, const std::vector<std::size_t>& basket, std::size_t t) {
  double s = 0.0;
  for (const std::size_t i : basket) s += values(i, t);
  return s / static_cast<double>(basket.size());
}

PnLSeries make_series(std::vector<std::string> dates, std::vector<double> raw, double target) {
  PnLSeries s;
  s.rescaled = rescale_pnl(raw, target);
  s.dates = std::move(dates);
  s.raw = std::move(raw);
  return s;
}

struct WindowOutcome {
  bool traded = false;
  double laggers = 0.0;
  double leaders = 0.0;
  std::string reason;
};

}  // namespace

void BacktestConfig::validate() const {
  if (window_length < 2) throw Error(ErrorCode::InvalidArgument, "window length l must be >= 2");
  if (window_length < lookback + 1) throw Error(ErrorCode::InvalidArgument, "window length l must be >= p + 1");
  if (shift < 1) throw Error(ErrorCode::InvalidArgument, "window shift h must be >= 1");
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon delta must be >= 1");
  if (!alpha) throw Error(ErrorCode::InvalidArgument, "alpha is required");
  if (!(*alpha > 0.0 && *alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (!(sigma_target > 0.0) || !std::isfinite(sigma_target))
    throw Error(ErrorCode::InvalidArgument, "sigma_target must be positive");
  if (ewma_span && !(*ewma_span >= 1.0)) throw Error(ErrorCode::InvalidArgument, "EWMA span must be >= 1");
}

Ranking rowsum_rank(const Matrix& gamma) {
  if (gamma.rows() != gamma.cols()) throw Error(ErrorCode::ShapeMismatch, "Gamma must be square");
  const std::size_t n = gamma.rows();
  Ranking r;
  r.row_sums.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r.row_sums[i] += gamma(i, j);
  r.order.resize(n);
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
    return kLeadSign * r.row_sums[a] > kLeadSign * r.row_sums[b];
  });
  return r;
}

Baskets split(const Ranking& ranking, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  const std::size_t n = ranking.order.size();
  // The small slack keeps exact products such as 0.75 * 120 from rounding up.
  const auto leaders = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n) - 1e-9));
  if (leaders == 0 || leaders >= n)
    throw Error(ErrorCode::DegenerateSplit, "alpha=" + csv::format_number(alpha) + " leaves an empty basket for n=" +
                                                std::to_string(n));
  Baskets b;
  b.leaders.assign(ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(leaders));
  b.laggers.assign(ranking.order.begin() + static_cast<std::ptrdiff_t>(leaders), ranking.order.end());
  return b;
}

double ewma_signal(std::span<const double> returns, std::size_t lookback, std::optional<double> span) {
  if (returns.size() < lookback + 1)
    throw Error(ErrorCode::InsufficientHistory, "EWMA over p=" + std::to_string(lookback) + " needs " +
                                                    std::to_string(lookback + 1) + " observations");
  const double s = span ? *span : static_cast<double>(lookback);
  const double decay = s >= 1.0 ? 1.0 - 2.0 / (s + 1.0) : 0.0;
  double num = 0.0;
  double den = 0.0;
  double w = 1.0;
  for (std::size_t age = 0; age <= lookback; ++age) {
    num += w * returns[returns.size() - 1 - age];
    den += w;
    w *= decay;
  }
  return num / den;
}

std::vector<double> rescale_pnl(std::span<const double> raw, double sigma_target) {
  if (raw.size() < 2) throw Error(ErrorCode::InsufficientData, "rescaling needs at least two PnL values");
  const double sd = sample_std(raw);
  if (!(sd > 0.0)) throw Error(ErrorCode::ZeroVolatility, "PnL series has zero volatility");
  const double scale = sigma_target / (sd * std::sqrt(kTradingDays));
  std::vector<double> out(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) out[k] = scale * raw[k];
  return out;
}

BacktestResult run_backtest(const Panel& panel, const BacktestConfig& config) {
  config.validate();
  const std::size_t t_len = panel.length();
  const std::size_t l = config.window_length;
  const std::size_t delta = config.horizon;
  if (t_len < l + delta)
    throw Error(ErrorCode::InsufficientHistory, "panel of " + std::to_string(t_len) + " dates is shorter than l + delta");
  if (panel.assets() < 2) throw Error(ErrorCode::InvalidArgument, "backtest needs at least two series");

  // Zero-based signal dates l-1, l-1+h, ..., T-1-delta.
  std::vector<std::size_t> ends;
  for (std::size_t t = l - 1; t + delta <= t_len - 1; t += config.shift) ends.push_back(t);

  const Matrix& x = panel.values;
  std::vector<WindowOutcome> outcomes(ends.size());
  parallel_for(ends.size(), [&](std::size_t w) {
    const std::size_t t = ends[w];
    const std::size_t first = t + 1 - l;
    Matrix window(x.rows(), l);
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t c = 0; c < l; ++c) window(i, c) = x(i, first + c);

    DetectorConfig dc = config.detector;
    dc.seed = derive_seed(config.detector.seed, t);
    const Detection det = detect(window, dc);
    const Ranking ranking = rowsum_rank(det.gamma.values);
    Baskets baskets;
    try {
      baskets = split(ranking, *config.alpha);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateSplit) throw;
      outcomes[w].reason = e.what();
      return;
    }
    std::vector<double> leader_path(config.lookback + 1);
    for (std::size_t a = 0; a <= config.lookback; ++a)
      leader_path[a] = basket_mean(x, baskets.leaders, t - config.lookback + a);
    const double forecast = ewma_signal(leader_path, config.lookback, config.ewma_span);
    const double s = forecast > 0.0 ? 1.0 : (forecast < 0.0 ? -1.0 : 0.0);
    outcomes[w].traded = true;
    outcomes[w].laggers = s * basket_mean(x, baskets.laggers, t + delta);
    outcomes[w].leaders = s * basket_mean(x, baskets.leaders, t + delta);
  });

  BacktestResult result;
  std::vector<std::string> dates;
  std::vector<double> lag_raw;
  std::vector<double> lead_raw;
  for (std::size_t w = 0; w < ends.size(); ++w) {
    if (!outcomes[w].traded) {
      result.skipped.push_back({ends[w], outcomes[w].reason});
      continue;
    }
    dates.push_back(panel.dates[ends[w] + delta]);
    lag_raw.push_back(outcomes[w].laggers);
    lead_raw.push_back(outcomes[w].leaders);
  }
  result.laggers = make_series(dates, std::move(lag_raw), config.sigma_target);
  result.leaders = make_series(std::move(dates), std::move(lead_raw), config.sigma_target);
  return result;
}

MetricsReport compute_metrics(std::span<const double> pnl) {
  const std::size_t n = pnl.size();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "metrics need at least two PnL values");
  const double count = static_cast<double>(n);

  MetricsReport m;
  m.observations = n;
  const double mean = mean_of(pnl);
  const double sd = sample_std(pnl);
  m.cumulative_pnl = std::accumulate(pnl.begin(), pnl.end(), 0.0);
  m.e_returns = mean * kTradingDays;
  m.volatility = sd * std::sqrt(kTradingDays);

  double down_sq = 0.0;
  double running = 0.0;
  double peak = 0.0;
  double mdd = 0.0;
  std::size_t wins = 0;
  std::size_t losses = 0;
  double win_sum = 0.0;
  double loss_sum = 0.0;
  for (const double r : pnl) {
    if (r < 0.0) down_sq += r * r;
    if (r > 0.0) {
      ++wins;
      win_sum += r;
    } else if (r < 0.0) {
      ++losses;
      loss_sum += r;
    }
    running += r;
    peak = std::max(peak, running);
    mdd = std::min(mdd, running - peak);
  }
  m.downside_deviation = std::sqrt(down_sq / count) * std::sqrt(kTradingDays);
  m.max_drawdown = mdd;
  m.sortino = ratio(m.e_returns, m.downside_deviation);
  m.calmar = ratio(m.e_returns, std::abs(mdd));
  m.hit_rate = static_cast<double>(wins) / count;
  const double avg_win = wins ? win_sum / static_cast<double>(wins) : 0.0;
  const double avg_loss = losses ? std::abs(loss_sum / static_cast<double>(losses)) : 0.0;
  m.avg_profit_over_avg_loss = ratio(avg_win, avg_loss);
  m.pnl_per_trade = mean * 1e4;
  m.sharpe = ratio(mean, sd) * std::sqrt(kTradingDays);

  if (!(sd > 0.0)) {
    // A constant series is either no signal at all or a riskless one.
    m.p_value = mean == 0.0 ? 1.0 : 0.0;
    return m;
  }
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (const double r : pnl) {
    const double d = r - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= count;
  m3 /= count;
  m4 /= count;
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  const double sr = m.sharpe / std::sqrt(kTradingDays);
  const double radicand = 1.0 - skew * sr + (kurt - 1.0) / 4.0 * sr * sr;
  if (!(radicand > 0.0)) {
    m.p_value = 0.0;
    return m;
  }
  const double z = sr * std::sqrt(count - 1.0) / std::sqrt(radicand);
  m.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
  return m;
}

GridResult grid_run(const Panel& panel, const GridSpec& grid, const BacktestConfig& base) {
  std::vector<double> alphas = grid.alphas;
  if (alphas.empty()) {
    if (!base.alpha) throw Error(ErrorCode::InvalidArgument, "alpha is required for grid runs");
    alphas.push_back(*base.alpha);
  }
  struct Cell {
    Detector detector;
    std::size_t lookback;
    std::size_t horizon;
    double alpha;
    int clusters;
  };
  std::vector<Cell> cells;
  for (const auto d : grid.detectors)
    for (const auto p : grid.lookbacks)
      for (const auto h : grid.horizons)
        for (const auto a : alphas)
          for (const auto k : grid.clusters) cells.push_back({d, p, h, a, k});

  struct CellOutcome {
    std::optional<MetricsReport> laggers;
    std::optional<MetricsReport> leaders;
    std::string message;
  };
  std::vector<CellOutcome> outcomes(cells.size());
  parallel_for(cells.size(), [&](std::size_t c) {
    const Cell& cell = cells[c];
    BacktestConfig cfg = base;
    cfg.detector.detector = cell.detector;
    cfg.detector.clusters = cell.clusters;
    cfg.lookback = cell.lookback;
    cfg.horizon = cell.horizon;
    cfg.alpha = cell.alpha;
    try {
      const BacktestResult r = run_backtest(panel, cfg);
      outcomes[c].laggers = compute_metrics(r.laggers.rescaled);
      outcomes[c].leaders = compute_metrics(r.leaders.rescaled);
    } catch (const Error& e) {
      outcomes[c].message = e.what();
    }
  });

  GridResult result;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    const CellOutcome& o = outcomes[c];
    if (!o.laggers) {
      result.failures.push_back({cell.detector, cell.lookback, cell.horizon, cell.alpha, cell.clusters, o.message});
      continue;
    }
    result.rows.push_back({cell.detector, "laggers", cell.lookback, cell.horizon, cell.alpha, cell.clusters, *o.laggers});
    result.rows.push_back({cell.detector, "leaders", cell.lookback, cell.horizon, cell.alpha, cell.clusters, *o.leaders});
  }
  return result;
}

void write_pnl_csv(const std::filesystem::path& path, const PnLSeries& pnl) {
  auto out = csv::open_output(path);
  csv::write_row(out, {"date", "raw", "rescaled"});
  for (std::size_t k = 0; k < pnl.raw.size(); ++k)
    csv::write_row(out, {pnl.dates[k], csv::format_number(pnl.raw[k]), csv::format_number(pnl.rescaled[k])});
}

PnLSeries read_pnl_csv(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  std::string line;
  if (!csv::read_line(in, line)) throw Error(ErrorCode::ParseError, path.string() + ": empty PnL file");
  const auto header = csv::split_line(line);
  if (header.size() < 3 || header[0] != "date" || header[1] != "raw" || header[2] != "rescaled")
    throw Error(ErrorCode::ParseError, path.string() + ": expected header date,raw,rescaled");
  PnLSeries s;
  std::size_t row = 1;
  while (csv::read_line(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    if (fields.size() < 3) throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(row) + " is short");
    const auto raw = csv::parse_number(fields[1]);
    const auto rescaled = csv::parse_number(fields[2]);
    if (!raw || !rescaled)
      throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(row) + " has a non-numeric value");
    s.dates.push_back(fields[0]);
    s.raw.push_back(*raw);
    s.rescaled.push_back(*rescaled);
  }
  return s;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  auto out = csv::open_output(path);
  csv::write_row(out, {"detector", "strategy", "p", "delta", "alpha", "K", "e_returns", "volatility",
                       "downside_deviation", "max_drawdown", "sortino", "calmar", "hit_rate", "avg_profit_avg_loss",
                       "pnl_per_trade", "sharpe", "p_value"});
  using csv::format_number;
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    csv::write_row(out, {std::string(to_string(r.detector)), r.strategy, std::to_string(r.lookback),
                         std::to_string(r.horizon), format_number(r.alpha), std::to_string(r.clusters),
                         format_number(m.e_returns), format_number(m.volatility), format_number(m.downside_deviation),
                         format_number(m.max_drawdown), format_number(m.sortino), format_number(m.calmar),
                         format_number(m.hit_rate), format_number(m.avg_profit_over_avg_loss),
                         format_number(m.pnl_per_trade), format_number(m.sharpe), format_number(m.p_value)});
  }
}

void write_metrics_json(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  // Infinite ratios are written as the strings "inf"/"-inf"; JSON has no literal for them.
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return csv::format_number(v);
  };
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    doc.push_back({{"detector", std::string(to_string(r.detector))},
                   {"strategy", r.strategy},
                   {"p", r.lookback},
                   {"delta", r.horizon},
                   {"alpha", r.alpha},
                   {"K", r.clusters},
                   {"observations", m.observations},
                   {"cumulative_pnl", num(m.cumulative_pnl)},
                   {"e_returns", num(m.e_returns)},
                   {"volatility", num(m.volatility)},
                   {"downside_deviation", num(m.downside_deviation)},
                   {"max_drawdown", num(m.max_drawdown)},
                   {"sortino", num(m.sortino)},
                   {"calmar", num(m.calmar)},
                   {"hit_rate", num(m.hit_rate)},
                   {"avg_profit_avg_loss", num(m.avg_profit_over_avg_loss)},
                   {"pnl_per_trade", num(m.pnl_per_trade)},
                   {"sharpe", num(m.sharpe)},
                   {"p_value", num(m.p_value)}});
  }
  auto out = csv::open_output(path);
  out << doc.dump(2) << '\n';
}

}  // namespace lagdtw
