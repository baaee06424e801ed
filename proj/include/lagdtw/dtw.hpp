#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lagdtw/matrix.hpp"

namespace lagdtw {

using Sequence = std::span<const double>;

/// Sakoe-Chiba band. A cell (i, j) is admissible iff |i - j| <= size, or
/// always when the window is unbounded.
class Window {
 public:
  static Window unbounded() noexcept { return Window{}; }
  static Window bounded(std::size_t size) noexcept { return Window{size}; }

  /// Accepts a non-negative integer or the word "unbounded".
  static Window parse(const std::string& text);

  bool is_bounded() const noexcept { return size_.has_value(); }
  std::size_t size() const { return size_.value(); }
  bool admits(std::size_t i, std::size_t j) const noexcept {
    return !size_ || (i > j ? i - j : j - i) <= *size_;
  }

  std::string to_string() const;

  bool operator==(const Window&) const = default;

 private:
  Window() = default;
  explicit Window(std::size_t size) : size_(size) {}

  std::optional<std::size_t> size_;
};

/// Index pair (i, j), zero-based.
struct PathStep {
  std::size_t i;
  std::size_t j;
  bool operator==(const PathStep&) const = default;
};

struct WarpingPath {
  std::vector<PathStep> steps;
  double cost = 0.0;  ///< accumulated squared-difference cost along the path
};

/// Cumulative cost table c(i, j) for 0 <= i <= n, 0 <= j <= m, stored only
/// for in-band cells. Out-of-band reads return kUnreachable.
class CostMatrix {
 public:
  static constexpr double kUnreachable = std::numeric_limits<double>::infinity();

  CostMatrix(std::size_t n, std::size_t m, const Window& window);

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }

  double at(std::size_t i, std::size_t j) const noexcept {
    if (j < lo_[i] || j > hi_[i]) return kUnreachable;
    return cells_[start_[i] + (j - lo_[i])];
  }
  double& cell(std::size_t i, std::size_t j) noexcept {
    return cells_[start_[i] + (j - lo_[i])];
  }
  std::size_t lo(std::size_t i) const noexcept { return lo_[i]; }
  std::size_t hi(std::size_t i) const noexcept { return hi_[i]; }

 private:
  std::size_t n_;
  std::size_t m_;
  std::vector<std::size_t> lo_;
  std::vector<std::size_t> hi_;
  std::vector<std::size_t> start_;
  std::vector<double> cells_;
};

/// (a - b)^2
constexpr double point_distance(double a, double b) noexcept {
  const double d = a - b;
  return d * d;
}

/// Fills the cumulative cost table. Border cells are unreachable except
/// c(0, 0) = 0, so c(1, 1) = d(a_1, b_1).
CostMatrix dtw_cost_matrix(Sequence a, Sequence b, const Window& window);

/// Optimal warping path and its accumulated cost. Ties in the backtrack
/// prefer the diagonal predecessor, then (i-1, j), then (i, j-1).
WarpingPath dtw(Sequence a, Sequence b, const Window& window);

/// Cost only, using two rolling rows. Bit-identical to dtw(a, b, w).cost.
double dtw_cost(Sequence a, Sequence b, const Window& window);

/// Checks boundary, continuity, monotonicity and the length bound.
bool is_valid_path(const WarpingPath& path, std::size_t n, std::size_t m);

enum class VectorMetric { euclidean, manhattan, cosine };

double vector_distance(Sequence a, Sequence b, VectorMetric metric);

struct DistanceMetric {
  enum class Kind { dtw, euclidean, manhattan, cosine };

  Kind kind = Kind::dtw;
  Window window = Window::unbounded();
  /// Report sqrt(cost) for the DTW kind. Does not affect path recovery.
  bool root = false;

  static DistanceMetric dtw_metric(Window window, bool root = false) {
    return {Kind::dtw, window, root};
  }
  static DistanceMetric vector(VectorMetric metric);
};

/// Symmetric, zero-diagonal matrix of distances between the rows of `series`.
Matrix pairwise_distance_matrix(const Matrix& series, const DistanceMetric& metric);

}  // namespace lagdtw
