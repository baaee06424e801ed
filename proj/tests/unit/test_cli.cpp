#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "lagdtw/csv.hpp"
#include "lagdtw/workflows.hpp"

using namespace lagdtw;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LAGDTW_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

SimulateOptions small_sim(const fs::path& out, double sigma) {
  SimulateOptions o;
  o.series = 12;
  o.length = 120;
  o.sigma = sigma;
  o.seed = 7;
  o.out = out;
  return o;
}

}  // namespace

TEST_CASE("simulate writes a 120 x 100 panel and its ground truth") {
  const fs::path dir = scratch("lagdtw_cli_sim");
  SimulateOptions o;
  o.sigma = 1.0;
  o.seed = 7;
  o.out = dir;
  CHECK(cmd_simulate(o) == 0);
  const auto rows = lines(dir / "panel.csv");
  CHECK(rows.size() == 101);
  CHECK(csv::split_line(rows[0]).size() == 121);
  CHECK(read_leadlag_csv(dir / "psi.csv").rows() == 120);
  CHECK(lines(dir / "membership.csv").size() == 121);
  fs::remove_all(dir);
}

TEST_CASE("detect on a noiseless panel reproduces Psi") {
  const fs::path dir = scratch("lagdtw_cli_detect");
  CHECK(cmd_simulate(small_sim(dir / "sim", 0.0)) == 0);
  DetectOptions d;
  d.panel.path = dir / "sim" / "panel.csv";
  d.detector.clusters = 1;
  d.out = dir / "det";
  CHECK(cmd_detect(d) == 0);
  CHECK(read_leadlag_csv(dir / "det" / "gamma.csv") == read_leadlag_csv(dir / "sim" / "psi.csv"));
  const auto clusters = lines(dir / "det" / "clusters.csv");
  CHECK(clusters[1] == "x1,1");
  CHECK(lines(dir / "det" / "ranking.csv")[1].rfind("1,x1,", 0) == 0);

  d.detector.detector = Detector::ccf_auc;
  d.out = dir / "ccf";
  CHECK(cmd_detect(d) == 0);
  for (const double v : read_leadlag_csv(dir / "ccf" / "gamma.csv").data()) CHECK(std::abs(v) <= 1.0);
  CHECK(!fs::exists(dir / "ccf" / "clusters.csv"));
  fs::remove_all(dir);
}

TEST_CASE("backtest and evaluate outputs") {
  const fs::path dir = scratch("lagdtw_cli_backtest");
  SimulateOptions s = small_sim(dir / "sim", 1.0);
  s.length = 200;
  CHECK(cmd_simulate(s) == 0);
  BacktestOptions b;
  b.panel.path = dir / "sim" / "panel.csv";
  b.config.alpha = 0.25;
  b.config.horizon = 7;
  b.out = dir / "bt";
  CHECK(cmd_backtest(b) == 0);
  const PnLSeries pnl = read_pnl_csv(dir / "bt" / "pnl_laggers.csv");
  CHECK(pnl.raw.size() == 200 - 21 - 7 + 1);
  CHECK(lines(dir / "bt" / "cumulative_pnl.csv").size() == pnl.raw.size() + 1);

  EvaluateOptions e;
  e.backtest_dir = dir / "bt";
  e.out = dir / "ev";
  CHECK(cmd_evaluate(e) == 0);
  const auto metrics = lines(dir / "ev" / "metrics.csv");
  REQUIRE(metrics.size() == 3);
  const auto fields = csv::split_line(metrics[1]);
  CHECK(fields[0] == "dtw_mode");
  CHECK(fields[1] == "laggers");
  CHECK(fields[3] == "7");
  CHECK(*csv::parse_number(fields[7]) == doctest::Approx(0.15).epsilon(1e-9));
  fs::remove_all(dir);
}

TEST_CASE("evaluate a symmetric PnL file") {
  const fs::path dir = scratch("lagdtw_cli_symmetric");
  PnLSeries s;
  for (int k = 0; k < 20; ++k) {
    s.dates.push_back(std::to_string(k + 1));
    s.raw.push_back(k % 2 ? -0.01 : 0.01);
    s.rescaled.push_back(k % 2 ? -0.01 : 0.01);
  }
  write_pnl_csv(dir / "pm.csv", s);
  EvaluateOptions e;
  e.pnl_files = {dir / "pm.csv"};
  e.base.alpha = 0.25;
  e.out = dir / "ev";
  CHECK(cmd_evaluate(e) == 0);
  const auto fields = csv::split_line(lines(dir / "ev" / "metrics.csv")[1]);
  CHECK(fields[1] == "pm");
  CHECK(std::abs(*csv::parse_number(fields[15])) < 1e-12);
  fs::remove_all(dir);
}

TEST_CASE("grid mode over K gives four cells with two strategies each") {
  const fs::path dir = scratch("lagdtw_cli_grid");
  SimulateOptions s = small_sim(dir / "sim", 1.0);
  s.series = 24;
  s.length = 60;
  CHECK(cmd_simulate(s) == 0);
  EvaluateOptions e;
  e.grid = true;
  e.panel.path = dir / "sim" / "panel.csv";
  e.grid_spec.lookbacks = {1};
  e.grid_spec.horizons = {1};
  e.grid_spec.alphas = {0.25};
  e.grid_spec.detectors = {Detector::dtw_mode};
  e.out = dir / "grid";
  CHECK(cmd_evaluate(e) == 0);
  const auto rows = lines(dir / "grid" / "grid_metrics.csv");
  CHECK(rows.size() == 9);
  CHECK(!fs::exists(dir / "grid" / "failures.csv"));

  e.grid_spec.clusters = {5, 30};
  e.out = dir / "grid_fail";
  CHECK(cmd_evaluate(e) != 0);
  CHECK(lines(dir / "grid_fail" / "failures.csv").size() == 2);
  fs::remove_all(dir);
}

TEST_CASE("command line: config file, flag precedence and exit status") {
  const fs::path dir = scratch("lagdtw_cli_binary");
  std::ofstream(dir / "run.cfg") << "# simulation recipe\nn = 12\nT = 30\nsigma = 0.5\nseed = 3\n";
  CHECK(run_cli("simulate --config " + (dir / "run.cfg").string() + " --T 40 --out " + (dir / "a").string()) == 0);
  const auto rows = lines(dir / "a" / "panel.csv");
  CHECK(rows.size() == 41);
  CHECK(csv::split_line(rows[0]).size() == 13);

  CHECK(run_cli("simulate --n 12 --T 40 --sigma 0.5 --seed 3 --out " + (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "panel.csv") == slurp(dir / "b" / "panel.csv"));

  const std::string panel = (dir / "a" / "panel.csv").string();
  CHECK(run_cli("backtest --panel " + panel + " --out " + (dir / "c").string()) != 0);
  CHECK(!fs::exists(dir / "c" / "pnl_laggers.csv"));
  CHECK(run_cli("backtest --panel " + panel + " --alpha 0.25 --threads 2 --out " + (dir / "c").string()) == 0);
  CHECK(run_cli("detect --panel " + (dir / "nope.csv").string() + " --out " + (dir / "d").string()) != 0);
  CHECK(run_cli("simulate --bogus 1") != 0);
  CHECK(run_cli("simulate --config " + (dir / "missing.cfg").string()) != 0);
  fs::remove_all(dir);
}
