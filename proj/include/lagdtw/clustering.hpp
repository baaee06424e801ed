#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lagdtw/matrix.hpp"

namespace lagdtw {

/// Partition of n items into K nonempty clusters. Labels are zero-based
/// (0..K-1); files written by the CLI use one-based cluster ids.
struct ClusterAssignment {
  std::vector<int> labels;
  std::vector<std::size_t> medoids;  ///< ascending; label c belongs to medoids[c]
  int clusters = 0;

  bool same_cluster(std::size_t a, std::size_t b) const { return labels[a] == labels[b]; }
};

enum class MedoidInit {
  build,   ///< PAM BUILD, deterministic
  random,  ///< K distinct points drawn from the seed
};

struct KMedoidsOptions {
  MedoidInit init = MedoidInit::build;
  std::size_t max_swaps = 10000;
};

/// PAM: initialization followed by best-improvement SWAP until no swap
/// lowers the total distance to medoids. Ties prefer the lowest
/// (medoid-out, point-in) pair. Deterministic for fixed (D, K, seed).
ClusterAssignment kmedoids(const Matrix& distances, int k, std::uint64_t seed,
                           const KMedoidsOptions& options = {});

/// Sum over points of the distance to the nearest medoid.
double medoid_cost(const Matrix& distances, std::span<const std::size_t> medoids);

struct KMeansOptions {
  std::size_t max_iterations = 300;
  /// K x T starting centroids; k-means++ seeding is used when absent.
  std::optional<Matrix> initial_centroids;
};

/// Lloyd iteration on squared Euclidean distance over the raw rows.
ClusterAssignment kmeans(const Matrix& series, int k, std::uint64_t seed,
                         const KMeansOptions& options = {});

/// Pair-counting Adjusted Rand Index. Returns 1 when both partitions are
/// identical (including the degenerate all-in-one / all-singleton cases).
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace lagdtw
