#include "lagdtw/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>

#include "json.hpp"
#include "lagdtw/csv.hpp"
#include "lagdtw/error.hpp"

namespace lagdtw {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_gap(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "N/A";
}

std::size_t find_asset(const Panel& p, const std::string& id) {
  const auto it = std::find(p.asset_ids.begin(), p.asset_ids.end(), id);
  if (id.empty() || it == p.asset_ids.end())
    throw Error(ErrorCode::MarketColumnMissing, "market column '" + id + "' not found");
  return static_cast<std::size_t>(it - p.asset_ids.begin());
}

// Keeps the listed rows and columns of a panel, in their original order.
Panel select(const Panel& p, const std::vector<std::size_t>& assets, const std::vector<std::size_t>& dates) {
  Panel out;
  out.values = Matrix(assets.size(), dates.size());
  for (const auto i : assets) out.asset_ids.push_back(p.asset_ids[i]);
  for (const auto t : dates) out.dates.push_back(p.dates[t]);
  for (std::size_t a = 0; a < assets.size(); ++a)
    for (std::size_t d = 0; d < dates.size(); ++d) out.values(a, d) = p.values(assets[a], dates[d]);
  return out;
}

struct DropResult {
  std::vector<std::size_t> kept_dates;
  std::vector<std::size_t> kept_assets;  ///< excludes the market column
};

// Day rule first, then the asset rule on the surviving days. `zero` marks
// the placeholder cells; the market column (if any) is not counted.
template <typename IsZero>
DropResult apply_drop_rules(const Panel& p, std::optional<std::size_t> market, double day_frac,
                            double asset_limit, bool asset_limit_is_fraction, IsZero zero,
                            PreprocessReport& report) {
  std::vector<std::size_t> assets;
  for (std::size_t i = 0; i < p.assets(); ++i)
    if (!market || i != *market) assets.push_back(i);

  DropResult r;
  for (std::size_t t = 0; t < p.length(); ++t) {
    std::size_t zeros = 0;
    for (const auto i : assets) zeros += zero(p.values(i, t)) ? 1 : 0;
    if (static_cast<double>(zeros) > day_frac * static_cast<double>(assets.size()))
      report.dropped_dates.push_back(p.dates[t]);
    else
      r.kept_dates.push_back(t);
  }
  const double limit =
      asset_limit_is_fraction ? asset_limit * static_cast<double>(r.kept_dates.size()) : asset_limit;
  for (const auto i : assets) {
    std::size_t zeros = 0;
    for (const auto t : r.kept_dates) zeros += zero(p.values(i, t)) ? 1 : 0;
    if (static_cast<double>(zeros) > limit)
      report.dropped_assets.push_back(p.asset_ids[i]);
    else
      r.kept_assets.push_back(i);
  }
  return r;
}

void check_survivors(const Panel& p) {
  if (p.assets() < 2 || p.length() < 1)
    throw Error(ErrorCode::EmptyAfterFilter, "fewer than two assets or no dates survive preprocessing");
}

// Excess return over the market row with unit beta, clamping, and removal of
// the market row. `market` indexes into `p`.
Panel finish(const Panel& p, std::optional<std::size_t> market, double bound) {
  Panel out;
  out.dates = p.dates;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < p.assets(); ++i)
    if (!market || i != *market) keep.push_back(i);
  out.values = Matrix(keep.size(), p.length());
  for (std::size_t a = 0; a < keep.size(); ++a) {
    out.asset_ids.push_back(p.asset_ids[keep[a]]);
    for (std::size_t t = 0; t < p.length(); ++t) {
      double v = p.values(keep[a], t);
      if (market) v -= p.values(*market, t);
      out.values(a, t) = std::clamp(v, -bound, bound);
    }
  }
  return out;
}

}  // namespace

Panel load_csv(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  std::string line;
  if (!csv::read_line(in, line)) throw Error(ErrorCode::ParseError, path.string() + ": empty file");
  const auto header = csv::split_line(line);
  if (header.size() < 2) throw Error(ErrorCode::ParseError, path.string() + ": header needs a date and an asset column");

  Panel p;
  p.asset_ids.assign(header.begin() + 1, header.end());
  const std::size_t n = p.asset_ids.size();
  std::vector<std::vector<double>> columns(n);
  std::size_t row = 1;
  while (csv::read_line(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    if (fields.size() != n + 1)
      throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(row) + " has " +
                                             std::to_string(fields.size()) + " fields, expected " +
                                             std::to_string(n + 1));
    const std::string& date = fields[0];
    if (!p.dates.empty()) {
      const std::string& prev = p.dates.back();
      if (!date_less(prev, date)) {
        if (!date_less(date, prev))
          throw Error(ErrorCode::DuplicateDate, path.string() + ": duplicate date '" + date + "' at row " +
                                                    std::to_string(row));
        throw Error(ErrorCode::NonMonotoneDates, path.string() + ": date '" + date + "' at row " +
                                                     std::to_string(row) + " precedes '" + prev + "'");
      }
    }
    p.dates.push_back(date);
    for (std::size_t c = 0; c < n; ++c) {
      const std::string& cell = fields[c + 1];
      if (is_gap(cell)) {
        columns[c].push_back(kNaN);
        continue;
      }
      const auto v = csv::parse_number(cell);
      if (!v)
        throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(row) + ", column " +
                                               std::to_string(c + 2) + " (" + p.asset_ids[c] + "): '" + cell +
                                               "' is not a number");
      columns[c].push_back(*v);
    }
  }
  p.values = Matrix(n, p.dates.size());
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t t = 0; t < p.dates.size(); ++t) p.values(c, t) = columns[c][t];
  return p;
}

void PreprocessConfig::validate() const {
  auto fraction = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!fraction(day_zero_frac)) throw Error(ErrorCode::InvalidArgument, "day_zero_frac must lie in [0, 1]");
  if (!fraction(asset_zero_frac)) throw Error(ErrorCode::InvalidArgument, "asset_zero_frac must lie in [0, 1]");
  if (!(winsor_bound > 0.0)) throw Error(ErrorCode::InvalidArgument, "winsor_bound must be positive");
}

Preprocessed preprocess_equity(const Panel& raw, const PreprocessConfig& config) {
  config.validate();
  const std::size_t market = find_asset(raw, config.market_column);

  Panel filled = raw;
  for (double& v : filled.values.data())
    if (std::isnan(v)) v = 0.0;

  Preprocessed out;
  out.report.kind = "equity";
  out.report.config = config;
  const DropResult kept = apply_drop_rules(filled, market, config.day_zero_frac, config.asset_zero_frac, true,
                                           [](double v) { return v == 0.0; }, out.report);
  std::vector<std::size_t> rows = kept.kept_assets;
  rows.push_back(market);
  std::sort(rows.begin(), rows.end());
  const Panel reduced = select(filled, rows, kept.kept_dates);
  const auto market_row = static_cast<std::size_t>(std::find(rows.begin(), rows.end(), market) - rows.begin());
  out.panel = finish(reduced, market_row, config.winsor_bound);
  check_survivors(out.panel);
  return out;
}

Preprocessed preprocess_futures(const Panel& raw_prices, const PreprocessConfig& config) {
  config.validate();
  std::optional<std::size_t> market;
  if (!config.market_column.empty()) market = find_asset(raw_prices, config.market_column);

  Panel prices = raw_prices;
  for (double& v : prices.values.data()) {
    if (std::isnan(v)) v = 0.0;
    if (v < 0.0) throw Error(ErrorCode::InvalidArgument, "negative price in futures panel");
  }

  Preprocessed out;
  out.report.kind = "futures";
  out.report.config = config;
  const DropResult kept =
      apply_drop_rules(prices, market, config.day_zero_frac, static_cast<double>(config.futures_zero_day_count),
                       false, [](double v) { return v == 0.0; }, out.report);
  std::vector<std::size_t> rows = kept.kept_assets;
  if (market) rows.push_back(*market);
  std::sort(rows.begin(), rows.end());
  Panel reduced = select(prices, rows, kept.kept_dates);
  if (reduced.length() < 2) throw Error(ErrorCode::EmptyAfterFilter, "log-returns need at least two dates");

  for (std::size_t i = 0; i < reduced.assets(); ++i) {
    auto row = reduced.values.row(i);
    double last = 0.0;
    for (double& v : row) {
      if (v == 0.0) v = last;
      else last = v;
    }
    if (last == 0.0) throw Error(ErrorCode::AllZeroAsset, "asset '" + reduced.asset_ids[i] + "' has no positive price");
    double next = 0.0;
    for (auto it = row.rbegin(); it != row.rend(); ++it) {
      if (*it == 0.0) *it = next;
      else next = *it;
    }
  }

  Panel returns;
  returns.asset_ids = reduced.asset_ids;
  returns.dates.assign(reduced.dates.begin() + 1, reduced.dates.end());
  returns.values = Matrix(reduced.assets(), reduced.length() - 1);
  for (std::size_t i = 0; i < reduced.assets(); ++i)
    for (std::size_t t = 1; t < reduced.length(); ++t)
      returns.values(i, t - 1) = std::log(reduced.values(i, t) / reduced.values(i, t - 1));

  std::optional<std::size_t> market_row;
  if (market)
    market_row = static_cast<std::size_t>(std::find(rows.begin(), rows.end(), *market) - rows.begin());
  out.panel = finish(returns, market_row, config.winsor_bound);
  check_survivors(out.panel);
  return out;
}

void write_panel_metadata(const std::filesystem::path& path, const Panel& panel, const PreprocessReport* report) {
  nlohmann::json doc;
  doc["asset_ids"] = panel.asset_ids;
  doc["assets"] = panel.assets();
  doc["dates"] = panel.length();
  doc["first_date"] = panel.dates.empty() ? "" : panel.dates.front();
  doc["last_date"] = panel.dates.empty() ? "" : panel.dates.back();
  if (report) {
    const auto& c = report->config;
    doc["preprocessing"] = {{"kind", report->kind},
                            {"day_zero_frac", c.day_zero_frac},
                            {"asset_zero_frac", c.asset_zero_frac},
                            {"futures_zero_day_count", c.futures_zero_day_count},
                            {"winsor_bound", c.winsor_bound},
                            {"market_column", c.market_column},
                            {"dropped_dates", report->dropped_dates},
                            {"dropped_assets", report->dropped_assets}};
  }
  auto out = csv::open_output(path);
  out << doc.dump(2) << '\n';
}

}  // namespace lagdtw
