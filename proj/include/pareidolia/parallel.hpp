#pragma once

#include <cstdint>
#include <functional>

namespace pareidolia {

/// Worker count: PAREIDOLIA_THREADS when set (clamped to >= 1), otherwise
/// the hardware concurrency.
int thread_budget() noexcept;

/// Runs fn(i) for every i in [0, n) on up to max_threads workers
/// (0 = thread_budget()).  Callers keep results deterministic by writing
/// into index-addressed storage and reducing in index order afterwards;
/// nothing here depends on scheduling.  The first exception thrown by fn
/// is rethrown on the calling thread after all workers finish.
void parallel_for_index(std::uint64_t n, int max_threads,
                        const std::function<void(std::uint64_t)>& fn);

}  // namespace pareidolia
