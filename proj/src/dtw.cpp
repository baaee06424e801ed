#include "lagdtw/dtw.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "lagdtw/error.hpp"
#include "lagdtw/parallel.hpp"

namespace lagdtw {
namespace {

void check_inputs(Sequence a, Sequence b, const Window& window) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySequence, "DTW needs nonempty sequences");
  const std::size_t gap = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
  if (window.is_bounded() && window.size() < gap)
    throw Error(ErrorCode::BandInfeasible, "window " + std::to_string(window.size()) +
                                               " is narrower than the length difference " +
                                               std::to_string(gap));
}

// In-band column range of row i (1 <= i <= n), clipped to [1, m].
std::pair<std::size_t, std::size_t> band(std::size_t i, std::size_t m, const Window& window) {
  if (!window.is_bounded()) return {1, m};
  const std::size_t s = window.size();
  const std::size_t lo = i > s ? i - s : 1;
  const std::size_t hi = std::min(m, i + s);
  return {std::max<std::size_t>(lo, 1), hi};
}

}  // namespace

Window Window::parse(const std::string& text) {
  if (text == "unbounded" || text == "inf" || text == "none") return unbounded();
  std::size_t value = 0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc{} || result.ptr != text.data() + text.size())
    throw Error(ErrorCode::InvalidArgument, "window must be a non-negative integer or 'unbounded': " + text);
  return bounded(value);
}

std::string Window::to_string() const {
  return size_ ? std::to_string(*size_) : std::string("unbounded");
}

CostMatrix::CostMatrix(std::size_t n, std::size_t m, const Window& window)
    : n_(n), m_(m), lo_(n + 1), hi_(n + 1), start_(n + 1) {
  // Row 0 holds only the origin; the border column is never stored for
  // i >= 1 because it is always unreachable.
  lo_[0] = 0;
  hi_[0] = 0;
  start_[0] = 0;
  std::size_t total = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    const auto [lo, hi] = band(i, m, window);
    lo_[i] = lo;
    hi_[i] = hi;
    start_[i] = total;
    if (hi >= lo) total += hi - lo + 1;
    else hi_[i] = lo - 1;  // empty row
  }
  cells_.assign(total, kUnreachable);
}

CostMatrix dtw_cost_matrix(Sequence a, Sequence b, const Window& window) {
  check_inputs(a, b, window);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  CostMatrix c(n, m, window);
  c.cell(0, 0) = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double ai = a[i - 1];
    for (std::size_t j = c.lo(i); j <= c.hi(i); ++j) {
      const double diag = c.at(i - 1, j - 1);
      const double up = c.at(i - 1, j);
      const double left = j > c.lo(i) ? c.cell(i, j - 1) : CostMatrix::kUnreachable;
      double best = diag;
      if (up < best) best = up;
      if (left < best) best = left;
      c.cell(i, j) = point_distance(ai, b[j - 1]) + best;
    }
  }
  return c;
}

WarpingPath dtw(Sequence a, Sequence b, const Window& window) {
  const CostMatrix c = dtw_cost_matrix(a, b, window);
  const std::size_t n = c.n();
  const std::size_t m = c.m();

  WarpingPath path;
  path.cost = c.at(n, m);
  path.steps.reserve(n + m);
  std::size_t i = n;
  std::size_t j = m;
  path.steps.push_back({i - 1, j - 1});
  while (i > 1 || j > 1) {
    if (i == 1) {
      --j;
    } else if (j == 1) {
      --i;
    } else {
      const double diag = c.at(i - 1, j - 1);
      const double up = c.at(i - 1, j);
      const double left = c.at(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    path.steps.push_back({i - 1, j - 1});
  }
  std::reverse(path.steps.begin(), path.steps.end());
  return path;
}

double dtw_cost(Sequence a, Sequence b, const Window& window) {
  check_inputs(a, b, window);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  constexpr double inf = CostMatrix::kUnreachable;
  std::vector<double> prev(m + 2, inf);
  std::vector<double> curr(m + 2, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const auto [lo, hi] = band(i, m, window);
    const double ai = a[i - 1];
    // Row i reads prev[lo - 1 .. hi]; the previous row wrote its band plus
    // an unreachable cell on each side, and the band shifts by at most one.
    curr[lo - 1] = inf;
    for (std::size_t j = lo; j <= hi; ++j) {
      const double diag = prev[j - 1];
      const double up = prev[j];
      const double left = curr[j - 1];
      double best = diag;
      if (up < best) best = up;
      if (left < best) best = left;
      curr[j] = point_distance(ai, b[j - 1]) + best;
    }
    curr[hi + 1] = inf;
    std::swap(prev, curr);
  }
  return prev[m];
}

bool is_valid_path(const WarpingPath& path, std::size_t n, std::size_t m) {
  const auto& s = path.steps;
  if (s.empty()) return false;
  if (s.front() != PathStep{0, 0} || s.back() != PathStep{n - 1, m - 1}) return false;
  if (s.size() < std::max(n, m) || s.size() > n + m - 1) return false;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (s[k].i < s[k - 1].i || s[k].j < s[k - 1].j) return false;
    if (s[k].i - s[k - 1].i > 1 || s[k].j - s[k - 1].j > 1) return false;
    if (s[k] == s[k - 1]) return false;
  }
  return true;
}

double vector_distance(Sequence a, Sequence b, VectorMetric metric) {
  if (a.size() != b.size())
    throw Error(ErrorCode::LengthMismatch, "vector distance needs equal lengths");
  switch (metric) {
    case VectorMetric::euclidean: {
      double sum = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) sum += point_distance(a[k], b[k]);
      return std::sqrt(sum);
    }
    case VectorMetric::manhattan: {
      double sum = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) sum += std::abs(a[k] - b[k]);
      return sum;
    }
    case VectorMetric::cosine: {
      double dot = 0.0;
      double na = 0.0;
      double nb = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
      }
      if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine distance of a zero vector");
      const double d = 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
      return d < 0.0 ? 0.0 : d;
    }
  }
  return 0.0;
}

DistanceMetric DistanceMetric::vector(VectorMetric metric) {
  switch (metric) {
    case VectorMetric::euclidean: return {Kind::euclidean, Window::unbounded(), false};
    case VectorMetric::manhattan: return {Kind::manhattan, Window::unbounded(), false};
    case VectorMetric::cosine: return {Kind::cosine, Window::unbounded(), false};
  }
  return {};
}

Matrix pairwise_distance_matrix(const Matrix& series, const DistanceMetric& metric) {
  const std::size_t n = series.rows();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "distance matrix needs at least two series");
  Matrix d(n, n, 0.0);
  auto evaluate = [&](std::size_t i, std::size_t j) {
    switch (metric.kind) {
      case DistanceMetric::Kind::dtw: {
        const double cost = dtw_cost(series.row(i), series.row(j), metric.window);
        return metric.root ? std::sqrt(cost) : cost;
      }
      case DistanceMetric::Kind::euclidean:
        return vector_distance(series.row(i), series.row(j), VectorMetric::euclidean);
      case DistanceMetric::Kind::manhattan:
        return vector_distance(series.row(i), series.row(j), VectorMetric::manhattan);
      case DistanceMetric::Kind::cosine:
        return vector_distance(series.row(i), series.row(j), VectorMetric::cosine);
    }
    return 0.0;
  };
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) d(i, j) = evaluate(i, j);
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d(j, i) = d(i, j);
  return d;
}

}  // namespace lagdtw
