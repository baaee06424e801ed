#include "lagdtw/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "lagdtw/error.hpp"
#include "lagdtw/parallel.hpp"
#include "lagdtw/rng.hpp"

namespace lagdtw {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_k(int k, std::size_t n) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "K must be positive");
  if (static_cast<std::size_t>(k) > n)
    throw Error(ErrorCode::KTooLarge, "K=" + std::to_string(k) + " exceeds " + std::to_string(n) + " points");
}

// Nearest and second-nearest medoid distance per point; `nearest` holds the
// slot in `medoids` (lowest slot on ties).
struct NearestTable {
  std::vector<std::size_t> nearest;
  std::vector<double> first;
  std::vector<double> second;
};

NearestTable nearest_medoids(const Matrix& d, const std::vector<std::size_t>& medoids) {
  const std::size_t n = d.rows();
  NearestTable t{std::vector<std::size_t>(n, 0), std::vector<double>(n, kInf), std::vector<double>(n, kInf)};
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t s = 0; s < medoids.size(); ++s) {
      const double v = d(medoids[s], x);
      if (v < t.first[x]) {
        t.second[x] = t.first[x];
        t.first[x] = v;
        t.nearest[x] = s;
      } else if (v < t.second[x]) {
        t.second[x] = v;
      }
    }
  }
  return t;
}

std::vector<std::size_t> build_init(const Matrix& d, int k) {
  const std::size_t n = d.rows();
  std::vector<std::size_t> medoids;
  std::vector<bool> chosen(n, false);

  std::size_t first = 0;
  double best_total = kInf;
  for (std::size_t c = 0; c < n; ++c) {
    double total = 0.0;
    for (std::size_t x = 0; x < n; ++x) total += d(c, x);
    if (total < best_total) {
      best_total = total;
      first = c;
    }
  }
  medoids.push_back(first);
  chosen[first] = true;
  std::vector<double> dn(n);
  for (std::size_t x = 0; x < n; ++x) dn[x] = d(first, x);

  while (medoids.size() < static_cast<std::size_t>(k)) {
    std::size_t pick = n;
    double best_gain = -1.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (chosen[c]) continue;
      double gain = 0.0;
      for (std::size_t x = 0; x < n; ++x) gain += std::max(0.0, dn[x] - d(c, x));
      if (gain > best_gain) {
        best_gain = gain;
        pick = c;
      }
    }
    medoids.push_back(pick);
    chosen[pick] = true;
    for (std::size_t x = 0; x < n; ++x) dn[x] = std::min(dn[x], d(pick, x));
  }
  return medoids;
}

std::vector<std::size_t> random_init(std::size_t n, int k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t s = 0; s < static_cast<std::size_t>(k); ++s) {
    const std::size_t r = s + static_cast<std::size_t>(rng.below(n - s));
    std::swap(pool[s], pool[r]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

ClusterAssignment assign_to_medoids(const Matrix& d, std::vector<std::size_t> medoids) {
  std::sort(medoids.begin(), medoids.end());
  const std::size_t n = d.rows();
  ClusterAssignment out;
  out.clusters = static_cast<int>(medoids.size());
  out.labels.assign(n, 0);
  const NearestTable t = nearest_medoids(d, medoids);
  for (std::size_t x = 0; x < n; ++x) out.labels[x] = static_cast<int>(t.nearest[x]);
  // A medoid always labels its own cluster, even when it coincides with
  // another medoid at distance zero.
  for (std::size_t s = 0; s < medoids.size(); ++s) out.labels[medoids[s]] = static_cast<int>(s);
  out.medoids = std::move(medoids);
  return out;
}

}  // namespace

double medoid_cost(const Matrix& d, std::span<const std::size_t> medoids) {
  double total = 0.0;
  for (std::size_t x = 0; x < d.rows(); ++x) {
    double best = kInf;
    for (const std::size_t m : medoids) best = std::min(best, d(m, x));
    total += best;
  }
  return total;
}

ClusterAssignment kmedoids(const Matrix& d, int k, std::uint64_t seed, const KMedoidsOptions& options) {
  const std::size_t n = d.rows();
  if (d.cols() != n) throw Error(ErrorCode::ShapeMismatch, "distance matrix must be square");
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "no points to cluster");
  check_k(k, n);

  std::vector<std::size_t> medoids =
      options.init == MedoidInit::build ? build_init(d, k) : random_init(n, k, seed);
  std::sort(medoids.begin(), medoids.end());
  std::vector<bool> is_medoid(n, false);
  for (const auto m : medoids) is_medoid[m] = true;

  for (std::size_t iteration = 0; iteration < options.max_swaps; ++iteration) {
    const NearestTable t = nearest_medoids(d, medoids);
    double current = 0.0;
    for (const double v : t.first) current += v;
    const double tolerance = 1e-12 * (1.0 + std::abs(current));

    // Best swap per outgoing medoid slot, evaluated independently so the
    // reduction below is schedule-free.
    struct Candidate {
      double delta = kInf;
      std::size_t incoming = 0;
    };
    std::vector<Candidate> per_slot(medoids.size());
    parallel_for(medoids.size(), [&](std::size_t slot) {
      Candidate best;
      for (std::size_t o = 0; o < n; ++o) {
        if (is_medoid[o]) continue;
        double delta = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
          const double via_o = d(o, x);
          const double keep = t.nearest[x] == slot ? t.second[x] : t.first[x];
          delta += std::min(keep, via_o) - t.first[x];
        }
        if (delta < best.delta) best = {delta, o};
      }
      per_slot[slot] = best;
    });

    std::size_t best_slot = 0;
    for (std::size_t s = 1; s < per_slot.size(); ++s)
      if (per_slot[s].delta < per_slot[best_slot].delta) best_slot = s;
    if (!(per_slot[best_slot].delta < -tolerance)) break;

    is_medoid[medoids[best_slot]] = false;
    medoids[best_slot] = per_slot[best_slot].incoming;
    is_medoid[medoids[best_slot]] = true;
    std::sort(medoids.begin(), medoids.end());
  }
  return assign_to_medoids(d, std::move(medoids));
}

ClusterAssignment kmeans(const Matrix& x, int k, std::uint64_t seed, const KMeansOptions& options) {
  const std::size_t n = x.rows();
  const std::size_t dim = x.cols();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "no points to cluster");
  check_k(k, n);
  const std::size_t kk = static_cast<std::size_t>(k);

  auto sq = [&](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double diff = a[c] - b[c];
      s += diff * diff;
    }
    return s;
  };

  Matrix centroids(kk, dim);
  if (options.initial_centroids) {
    if (options.initial_centroids->rows() != kk || options.initial_centroids->cols() != dim)
      throw Error(ErrorCode::ShapeMismatch, "initial centroids must be K x T");
    centroids = *options.initial_centroids;
  } else {
    // k-means++ seeding
    Rng rng(seed);
    std::vector<double> nearest(n, kInf);
    std::size_t pick = static_cast<std::size_t>(rng.below(n));
    for (std::size_t c = 0; c < kk; ++c) {
      std::copy(x.row(pick).begin(), x.row(pick).end(), centroids.row(c).begin());
      double total = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        nearest[p] = std::min(nearest[p], sq(x.row(p), centroids.row(c)));
        total += nearest[p];
      }
      if (c + 1 == kk) break;
      if (total <= 0.0) {
        pick = static_cast<std::size_t>(rng.below(n));
        continue;
      }
      double target = rng.uniform() * total;
      pick = n - 1;
      for (std::size_t p = 0; p < n; ++p) {
        target -= nearest[p];
        if (target < 0.0) {
          pick = p;
          break;
        }
      }
    }
  }

  std::vector<int> labels(n, -1);
  std::vector<double> dist(n, 0.0);
  for (std::size_t iteration = 0; iteration < std::max<std::size_t>(options.max_iterations, 1); ++iteration) {
    std::vector<int> next(n, 0);
    for (std::size_t p = 0; p < n; ++p) {
      double best = kInf;
      for (std::size_t c = 0; c < kk; ++c) {
        const double v = sq(x.row(p), centroids.row(c));
        if (v < best) {
          best = v;
          next[p] = static_cast<int>(c);
        }
      }
      dist[p] = best;
    }

    // Empty clusters take the point farthest from its centroid among
    // clusters that can spare one.
    std::vector<std::size_t> sizes(kk, 0);
    for (const int l : next) ++sizes[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < kk; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t p = 0; p < n; ++p) {
        if (sizes[static_cast<std::size_t>(next[p])] <= 1) continue;
        if (far == n || dist[p] > dist[far]) far = p;
      }
      --sizes[static_cast<std::size_t>(next[far])];
      next[far] = static_cast<int>(c);
      ++sizes[c];
      dist[far] = 0.0;
      std::copy(x.row(far).begin(), x.row(far).end(), centroids.row(c).begin());
    }

    const bool converged = next == labels;
    labels = std::move(next);
    if (converged) break;

    Matrix sums(kk, dim, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      auto row = sums.row(static_cast<std::size_t>(labels[p]));
      for (std::size_t c = 0; c < dim; ++c) row[c] += x(p, c);
    }
    for (std::size_t c = 0; c < kk; ++c)
      for (std::size_t col = 0; col < dim; ++col) centroids(c, col) = sums(c, col) / static_cast<double>(sizes[c]);
  }

  ClusterAssignment out;
  out.clusters = k;
  out.labels = std::move(labels);
  return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "label vectors differ in length");
  if (a.size() < 2) throw Error(ErrorCode::InvalidArgument, "ARI needs at least two items");

  std::map<std::pair<int, int>, long long> joint;
  std::map<int, long long> rows;
  std::map<int, long long> cols;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ++joint[{a[k], b[k]}];
    ++rows[a[k]];
    ++cols[b[k]];
  }
  auto pairs = [](long long c) { return static_cast<double>(c) * static_cast<double>(c - 1) / 2.0; };
  double index = 0.0;
  for (const auto& [key, c] : joint) index += pairs(c);
  double sum_a = 0.0;
  for (const auto& [key, c] : rows) sum_a += pairs(c);
  double sum_b = 0.0;
  for (const auto& [key, c] : cols) sum_b += pairs(c);
  const double total = pairs(static_cast<long long>(a.size()));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace lagdtw
