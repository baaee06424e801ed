#pragma once

#include <cstdint>
#include <random>

namespace lagdtw {

/// Seedable generator with a platform-independent output stream.
/// std::mt19937_64 is fully specified by the standard; the distributions are
/// not, so the uniform and normal transforms are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via the Box-Muller transform.
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Derives an independent sub-seed from a master seed and a stream index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace lagdtw
