#pragma once

#include <cstddef>
#include <functional>

namespace wsp {

/// Number of workers: hardware concurrency capped by the WSP_THREADS
/// environment variable (re-read on every call so tests can change it).
int worker_count() noexcept;

/// Runs fn(i) for every i in [0, n), possibly concurrently. fn must be safe
/// to call for distinct i from different threads; writing results into
/// per-index slots keeps the outcome independent of the schedule. The first
/// exception thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace wsp
