#include <cmath>
#include <vector>

#include "doctest.h"
#include "lagdtw/dtw.hpp"
#include "lagdtw/error.hpp"
#include "oracles.hpp"

using namespace lagdtw;

TEST_CASE("three-point example has cost 2 and the expected path") {
  const std::vector<double> a{0, 1, 2};
  const std::vector<double> b{1, 2, 3};
  const WarpingPath p = dtw(a, b, Window::unbounded());
  CHECK(p.cost == 2.0);
  const std::vector<PathStep> expected{{0, 0}, {1, 0}, {2, 1}, {2, 2}};
  CHECK(p.steps == expected);
  CHECK(is_valid_path(p, 3, 3));
}

TEST_CASE("identical sequences have zero cost and a diagonal path") {
  const std::vector<double> a{0.5, -1.0, 3.0, 2.0};
  const WarpingPath p = dtw(a, a, Window::bounded(0));
  CHECK(p.cost == 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(p.steps[k] == PathStep{k, k});
}

TEST_CASE("first cell cost is the point distance of the first samples") {
  const std::vector<double> a{3.0};
  const std::vector<double> b{1.5};
  const CostMatrix c = dtw_cost_matrix(a, b, Window::unbounded());
  CHECK(c.at(0, 0) == 0.0);
  CHECK(std::isinf(c.at(0, 1)));
  CHECK(std::isinf(c.at(1, 0)));
  CHECK(c.at(1, 1) == 2.25);
}

TEST_CASE("DP cost matches brute-force path enumeration") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(7);
    const std::size_t m = 1 + rng.below(7);
    const auto a = oracle::uniform_vector(rng, n, -2, 2);
    const auto b = oracle::uniform_vector(rng, m, -2, 2);
    const std::size_t gap = n > m ? n - m : m - n;
    for (const Window w : {Window::unbounded(), Window::bounded(gap), Window::bounded(gap + 1)}) {
      const WarpingPath p = dtw(a, b, w);
      CHECK(p.cost == oracle::brute_force_dtw(a, b, w));
      CHECK(dtw_cost(a, b, w) == p.cost);
      CHECK(is_valid_path(p, n, m));
      double along = 0.0;
      for (const auto& s : p.steps) {
        CHECK(w.admits(s.i, s.j));
        along += point_distance(a[s.i], b[s.j]);
      }
      CHECK(along == doctest::Approx(p.cost).epsilon(1e-12));
    }
  }
}

TEST_CASE("window zero reduces to squared Euclidean distance") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    const auto a = oracle::normal_vector(rng, n);
    const auto b = oracle::normal_vector(rng, n);
    double sq = 0.0;
    for (std::size_t k = 0; k < n; ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
    CHECK(dtw(a, b, Window::bounded(0)).cost == sq);
  }
}

TEST_CASE("cost is symmetric and widening the window never increases it") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(20);
    const auto a = oracle::normal_vector(rng, n);
    const auto b = oracle::normal_vector(rng, n);
    CHECK(dtw_cost(a, b, Window::bounded(3)) == dtw_cost(b, a, Window::bounded(3)));
    double previous = dtw_cost(a, b, Window::bounded(0));
    for (std::size_t s = 1; s <= n; ++s) {
      const double c = dtw_cost(a, b, Window::bounded(s));
      CHECK(c <= previous);
      previous = c;
    }
    CHECK(dtw_cost(a, b, Window::unbounded()) == previous);
  }
}

TEST_CASE("shifted copy is aligned along the lag diagonal") {
  Rng rng(2);
  const auto base = oracle::normal_vector(rng, 60);
  const std::size_t lag = 3;
  std::vector<double> lead(base.begin() + 5, base.begin() + 55);
  std::vector<double> follow(base.begin() + 5 - lag, base.begin() + 55 - lag);
  const WarpingPath p = dtw(lead, follow, Window::bounded(5));
  std::size_t on_diagonal = 0;
  for (const auto& s : p.steps) on_diagonal += (s.j == s.i + lag) ? 1 : 0;
  CHECK(on_diagonal >= lead.size() - 2 * lag);
}

TEST_CASE("invalid inputs are rejected") {
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> b{1, 2};
  const std::vector<double> empty;
  CHECK_THROWS_AS(dtw(a, empty, Window::unbounded()), Error);
  try {
    dtw(a, b, Window::bounded(1));
    FAIL("expected BandInfeasible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BandInfeasible);
  }
  CHECK(dtw(a, b, Window::bounded(2)).cost >= 0.0);
}

TEST_CASE("window parsing") {
  CHECK(Window::parse("unbounded") == Window::unbounded());
  CHECK(Window::parse("7") == Window::bounded(7));
  CHECK(Window::bounded(7).to_string() == "7");
  CHECK_THROWS_AS(Window::parse("-1"), Error);
  CHECK_THROWS_AS(Window::parse("abc"), Error);
}

TEST_CASE("vector distances") {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{4, 6, 3};
  CHECK(vector_distance(a, b, VectorMetric::euclidean) == 5.0);
  CHECK(vector_distance(a, b, VectorMetric::manhattan) == 7.0);
  CHECK(vector_distance(a, a, VectorMetric::cosine) == doctest::Approx(0.0));
  const std::vector<double> c{-1, -2, -3};
  CHECK(vector_distance(a, c, VectorMetric::cosine) == doctest::Approx(2.0));
  const std::vector<double> zero{0, 0, 0};
  try {
    vector_distance(a, zero, VectorMetric::cosine);
    FAIL("expected ZeroVector");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVector);
  }
}

TEST_CASE("pairwise distance matrix is symmetric with a zero diagonal") {
  Rng rng(4);
  Matrix x(6, 15);
  for (auto& v : x.data()) v = rng.normal();
  const Matrix d = pairwise_distance_matrix(x, DistanceMetric::dtw_metric(Window::bounded(2), true));
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(d(i, i) == 0.0);
    for (std::size_t j = 0; j < 6; ++j) CHECK(d(i, j) == d(j, i));
  }
  CHECK(d(0, 1) == std::sqrt(dtw_cost(x.row(0), x.row(1), Window::bounded(2))));
}
