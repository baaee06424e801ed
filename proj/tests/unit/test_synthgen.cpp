#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "lagdtw/error.hpp"
#include "lagdtw/synthgen.hpp"

using namespace lagdtw;

namespace {

std::vector<double> column(const Matrix& m, std::size_t c) {
  std::vector<double> v;
  for (std::size_t r = 0; r < m.rows(); ++r) v.push_back(m(r, c));
  return v;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("six-row templates") {
  CHECK(column(lagged_template(1).lags, 0) == std::vector<double>{0, 1, 2, 3, 4, 5});
  const FactorModelSpec two = lagged_template(2);
  CHECK(column(two.lags, 0) == std::vector<double>{0, 2, 4, 0, 0, 0});
  CHECK(column(two.lags, 1) == std::vector<double>{0, 0, 0, 0, 2, 4});
  CHECK(column(two.loadings, 1) == std::vector<double>{0, 0, 0, 1, 1, 1});
  const FactorModelSpec three = lagged_template(3);
  CHECK(column(three.lags, 2) == std::vector<double>{0, 0, 0, 0, 0, 3});
  CHECK(column(lagged_template(2, 5).lags, 0) == std::vector<double>{0, 3, 5, 0, 0, 0});
  CHECK_THROWS_AS(lagged_template(4), Error);
}

TEST_CASE("generated panel shape, labels and reproducibility") {
  FactorModelSpec spec = replicate_rows(lagged_template(2), 12);
  spec.length = 50;
  spec.seed = 7;
  const SyntheticPanel a = generate(spec);
  CHECK(a.panel.assets() == 12);
  CHECK(a.panel.length() == 50);
  CHECK(a.panel.asset_ids.front() == "x1");
  CHECK(a.panel.dates.back() == "50");
  CHECK(a.membership == std::vector<int>{0, 0, 0, 1, 1, 1, 0, 0, 0, 1, 1, 1});
  CHECK(generate(spec).panel.values == a.panel.values);
  spec.seed = 8;
  CHECK(!(generate(spec).panel.values == a.panel.values));
}

TEST_CASE("without noise the rows are exact shifted copies of one factor") {
  FactorModelSpec spec = lagged_template(1);
  spec.sigma = 0.0;
  spec.length = 40;
  const Matrix x = generate(spec).panel.values;
  for (std::size_t i = 1; i < 6; ++i)
    for (std::size_t t = i; t < 40; ++t) CHECK(x(i, t) == x(0, t - i));
}

TEST_CASE("noise enters linearly in sigma on a fixed factor draw") {
  FactorModelSpec spec = replicate_rows(lagged_template(3), 6);
  spec.length = 3000;
  spec.seed = 99;
  spec.sigma = 0.0;
  const Matrix base = generate(spec).panel.values;
  spec.sigma = 1.0;
  const Matrix one = generate(spec).panel.values;
  spec.sigma = 2.5;
  const Matrix more = generate(spec).panel.values;
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t k = 0; k < base.data().size(); ++k) {
    const double e = one.data()[k] - base.data()[k];
    CHECK(more.data()[k] - base.data()[k] == doctest::Approx(2.5 * e).epsilon(1e-9));
    sum += e;
    sq += e * e;
  }
  const double n = static_cast<double>(base.data().size());
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("spec validation") {
  FactorModelSpec spec = lagged_template(1);
  spec.lags(2, 0) = 1.5;
  CHECK(code_of([&] { spec.validate(); }) == ErrorCode::InvalidSpec);
  spec = lagged_template(1);
  spec.lags(2, 0) = 6;
  CHECK(code_of([&] { spec.validate(); }) == ErrorCode::InvalidSpec);
  spec = lagged_template(1);
  spec.sigma = -1;
  CHECK(code_of([&] { spec.validate(); }) == ErrorCode::InvalidSpec);
  spec = lagged_template(2);
  spec.loadings(0, 1) = 1.0;
  CHECK(code_of([&] { spec.validate(); }) == ErrorCode::NotSingleMembership);
  CHECK(code_of([&] { replicate_rows(lagged_template(1), 100); }) == ErrorCode::NotDivisible);
  CHECK(replicate_rows(lagged_template(1), 120).series() == 120);
}

TEST_CASE("sweep rows and CSV layout") {
  SweepConfig cfg;
  cfg.setting = "homogeneous";
  cfg.spec = replicate_rows(lagged_template(1), 12);
  cfg.spec.length = 40;
  cfg.grid = {0.0, 0.5};
  cfg.methods = {SweepMethod::dtw_kmed_mode, SweepMethod::euc_kmed, SweepMethod::kmeans};
  cfg.detector.clusters = 1;
  cfg.repetitions = 3;
  cfg.seed = 5;
  const auto rows = sweep(cfg);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].method == SweepMethod::dtw_kmed_mode);
  CHECK(rows[0].grid_value == 0.0);
  CHECK(rows[0].mean_mse == 0.0);
  CHECK(rows[0].mean_ari == 1.0);
  CHECK(rows[0].reps == 3);
  CHECK(std::isnan(rows[1].mean_mse));
  CHECK(rows[3].grid_value == 0.5);
  CHECK(sweep(cfg).front().mean_ari == rows.front().mean_ari);

  const auto path = std::filesystem::temp_directory_path() / "lagdtw_sweep_test.csv";
  write_sweep_csv(path, rows);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "setting,grid_value,estimator,mean_ari,ari_lo,ari_hi,mean_mse,mse_lo,mse_hi,reps");
  std::filesystem::remove(path);
}

TEST_CASE("sweep estimator names round trip") {
  for (const auto m : {SweepMethod::dtw_kmed_mode, SweepMethod::dtw_kmed_median, SweepMethod::euc_kmed,
                       SweepMethod::man_kmed, SweepMethod::cos_kmed, SweepMethod::kmeans})
    CHECK(parse_sweep_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_sweep_method("bogus"), Error);
}
