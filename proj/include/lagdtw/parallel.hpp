#pragma once

#include <cstddef>
#include <functional>

namespace lagdtw {

/// Caps the number of worker threads used by parallel loops. 0 means
/// hardware concurrency. Results never depend on this value.
void set_thread_count(unsigned count) noexcept;
unsigned thread_count() noexcept;

/// Runs body(i) for i in [0, count). Each index is visited exactly once;
/// callers write results into per-index slots so the output is independent
/// of scheduling. Nested calls run inline on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace lagdtw
