#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "lagdtw/error.hpp"
#include "lagdtw/ingest.hpp"
#include "oracles.hpp"

using namespace lagdtw;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const char* name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::filesystem::path write(const char* file, const std::string& text) const {
    std::ofstream(path / file, std::ios::binary) << text;
    return path / file;
  }
};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Io;
}

// n assets plus a zero "mkt" column over T days of small nonzero returns.
Panel returns_panel(std::size_t n, std::size_t days, std::uint64_t seed) {
  Rng rng(seed);
  Panel p;
  p.asset_ids = default_asset_ids(n);
  p.asset_ids.push_back("mkt");
  p.dates = default_dates(days);
  p.values = Matrix(n + 1, days);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < days; ++t) p.values(i, t) = 0.001 + 0.01 * rng.uniform();
  return p;
}

PreprocessConfig equity_config() {
  PreprocessConfig c;
  c.market_column = "mkt";
  return c;
}

}  // namespace

TEST_CASE("load a small wide CSV") {
  TempDir dir("lagdtw_ingest_load");
  const auto file = dir.write("p.csv", "date,a,b\n2020-01-01,0.1,0.2\n2020-01-02,,NA\r\n2020-01-03,-0.5,1e-3\n");
  const Panel p = load_csv(file);
  CHECK(p.assets() == 2);
  CHECK(p.length() == 3);
  CHECK(p.asset_ids == std::vector<std::string>{"a", "b"});
  CHECK(p.values(0, 0) == 0.1);
  CHECK(std::isnan(p.values(0, 1)));
  CHECK(std::isnan(p.values(1, 1)));
  CHECK(p.values(1, 2) == 0.001);
}

TEST_CASE("load errors name the problem") {
  TempDir dir("lagdtw_ingest_errors");
  const auto bad = dir.write("bad.csv", "date,a,b\n1,0.1,0.2\n2,0.3,abc\n");
  try {
    load_csv(bad);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    const std::string msg = e.what();
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("column 3 (b)") != std::string::npos);
  }
  CHECK(code_of([&] { load_csv(dir.write("dup.csv", "date,a\n1,0\n1,0\n")); }) == ErrorCode::DuplicateDate);
  CHECK(code_of([&] { load_csv(dir.write("order.csv", "date,a\n2,0\n1,0\n")); }) == ErrorCode::NonMonotoneDates);
  CHECK(code_of([&] { load_csv(dir.write("short.csv", "date,a,b\n1,0\n")); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { load_csv(dir.path / "missing.csv"); }) == ErrorCode::Io);
}

TEST_CASE("write then load reproduces the panel") {
  TempDir dir("lagdtw_ingest_roundtrip");
  Rng rng(3);
  Panel p;
  p.asset_ids = {"x", "y", "z"};
  p.dates = {"2021-03-01", "2021-03-02", "2021-03-03", "2021-03-04"};
  p.values = Matrix(3, 4);
  for (auto& v : p.values.data()) v = rng.normal() / 3.0;
  write_panel_csv(dir.path / "p.csv", p);
  const Panel q = load_csv(dir.path / "p.csv");
  CHECK(q.asset_ids == p.asset_ids);
  CHECK(q.dates == p.dates);
  CHECK(q.values == p.values);
}

TEST_CASE("equity: excess return, clamping and market removal") {
  Panel p = returns_panel(3, 20, 1);
  for (std::size_t t = 0; t < 20; ++t) p.values(3, t) = 0.002;
  p.values(0, 5) = 0.30;
  p.values(1, 6) = -0.40;
  const Preprocessed out = preprocess_equity(p, equity_config());
  CHECK(out.panel.asset_ids == std::vector<std::string>{"x1", "x2", "x3"});
  CHECK(out.panel.length() == 20);
  CHECK(out.panel.values(0, 5) == 0.15);
  CHECK(out.panel.values(1, 6) == -0.15);
  CHECK(out.panel.values(2, 0) == doctest::Approx(p.values(2, 0) - 0.002).epsilon(1e-15));
  for (const double v : out.panel.values.data()) {
    CHECK(std::isfinite(v));
    CHECK(std::abs(v) <= 0.15);
  }
  CHECK(out.report.dropped_dates.empty());
  CHECK(out.report.dropped_assets.empty());
}

TEST_CASE("equity: day rule above 10 percent zero assets") {
  Panel p = returns_panel(20, 10, 2);
  p.values(0, 3) = 0.0;
  p.values(1, 3) = 0.0;  // 2 of 20 = 10 percent, kept
  p.values(0, 7) = 0.0;
  p.values(1, 7) = 0.0;
  p.values(2, 7) = std::nan("");  // gap counts as zero: 3 of 20, dropped
  const Preprocessed out = preprocess_equity(p, equity_config());
  CHECK(out.report.dropped_dates == std::vector<std::string>{"8"});
  CHECK(out.panel.length() == 9);
  CHECK(out.panel.dates[3] == "4");
  CHECK(out.panel.dates[7] == "9");
}

TEST_CASE("equity: asset rule above 50 percent zero days") {
  Panel p = returns_panel(30, 10, 3);
  for (std::size_t t = 0; t < 6; ++t) p.values(4, t) = 0.0;  // 60 percent, dropped
  for (std::size_t t = 0; t < 5; ++t) p.values(9, t) = 0.0;  // 50 percent, kept
  const Preprocessed out = preprocess_equity(p, equity_config());
  CHECK(out.report.dropped_assets == std::vector<std::string>{"x5"});
  CHECK(out.panel.assets() == 29);
  CHECK(out.panel.asset_ids[4] == "x6");
  CHECK(out.report.dropped_dates.empty());
}

TEST_CASE("equity: applying the pipeline twice changes nothing") {
  Rng rng(5);
  Panel p = returns_panel(8, 30, 4);
  for (std::size_t t = 0; t < 30; ++t) p.values(8, t) = 0.02 * rng.normal();
  p.values(2, 4) = 0.5;
  const Panel once = preprocess_equity(p, equity_config()).panel;
  Panel again = once;
  again.asset_ids.push_back("mkt");
  Matrix with_market(once.assets() + 1, once.length(), 0.0);
  for (std::size_t i = 0; i < once.assets(); ++i)
    for (std::size_t t = 0; t < once.length(); ++t) with_market(i, t) = once.values(i, t);
  again.values = with_market;
  const Panel twice = preprocess_equity(again, equity_config()).panel;
  CHECK(twice.values == once.values);
  CHECK(twice.dates == once.dates);
}

TEST_CASE("equity: configuration errors") {
  Panel p = returns_panel(3, 5, 6);
  PreprocessConfig c = equity_config();
  c.market_column = "spx";
  CHECK(code_of([&] { preprocess_equity(p, c); }) == ErrorCode::MarketColumnMissing);
  Panel tiny = returns_panel(1, 5, 6);
  CHECK(code_of([&] { preprocess_equity(tiny, equity_config()); }) == ErrorCode::EmptyAfterFilter);
}

TEST_CASE("futures: fills, log-returns and drops") {
  Panel p;
  p.asset_ids = {"cl", "gc", "ng"};
  p.dates = default_dates(5);
  p.values = Matrix(3, 5);
  const double cl[] = {10, 10, 10, 10, 10};
  const double gc[] = {0, 0, 20, 0, 22};  // leading zeros backward-filled, interior zero forward-filled
  const double ng[] = {5, 5, 5, 5, 5};
  for (std::size_t t = 0; t < 5; ++t) {
    p.values(0, t) = cl[t];
    p.values(1, t) = gc[t];
    p.values(2, t) = ng[t];
  }
  PreprocessConfig c;
  c.day_zero_frac = 0.5;  // one zero asset in three per day is tolerated
  const Preprocessed out = preprocess_futures(p, c);
  CHECK(out.panel.length() == 4);
  CHECK(out.panel.dates.front() == "2");
  for (std::size_t t = 0; t < 4; ++t) CHECK(out.panel.values(0, t) == 0.0);
  CHECK(out.panel.values(1, 0) == 0.0);
  CHECK(out.panel.values(1, 1) == 0.0);
  CHECK(out.panel.values(1, 2) == 0.0);
  CHECK(out.panel.values(1, 3) == doctest::Approx(std::log(22.0 / 20.0)).epsilon(1e-15));

  PreprocessConfig strict;
  strict.futures_zero_day_count = 2;  // gc has 3 zero-price days
  strict.day_zero_frac = 0.5;
  const Preprocessed dropped = preprocess_futures(p, strict);
  CHECK(dropped.report.dropped_assets == std::vector<std::string>{"gc"});
  CHECK(dropped.panel.assets() == 2);
}

TEST_CASE("futures: the default day rule removes days with a zero price") {
  Panel p;
  p.asset_ids = {"a", "b"};
  p.dates = default_dates(4);
  p.values = Matrix(2, 4, 7.0);
  p.values(1, 2) = 0.0;
  const Preprocessed out = preprocess_futures(p, PreprocessConfig{});
  CHECK(out.report.dropped_dates == std::vector<std::string>{"3"});
  CHECK(out.panel.length() == 2);
}

TEST_CASE("futures: a price series without any positive value is an error") {
  Panel p;
  p.asset_ids = {"a", "b", "c"};
  p.dates = default_dates(3);
  p.values = Matrix(3, 3, 1.0);
  for (std::size_t t = 0; t < 3; ++t) p.values(2, t) = 0.0;
  PreprocessConfig c;
  c.day_zero_frac = 0.5;
  CHECK(code_of([&] { preprocess_futures(p, c); }) == ErrorCode::AllZeroAsset);
}

TEST_CASE("metadata sidecar") {
  TempDir dir("lagdtw_ingest_meta");
  Panel p = returns_panel(30, 10, 3);
  for (std::size_t t = 0; t < 6; ++t) p.values(4, t) = 0.0;
  const Preprocessed out = preprocess_equity(p, equity_config());
  write_panel_metadata(dir.path / "meta.json", out.panel, &out.report);
  std::ifstream in(dir.path / "meta.json");
  const auto doc = nlohmann::json::parse(in);
  CHECK(doc["assets"] == 29);
  CHECK(doc["first_date"] == "1");
  CHECK(doc["preprocessing"]["dropped_assets"][0] == "x5");
  CHECK(doc["preprocessing"]["winsor_bound"] == 0.15);
}
