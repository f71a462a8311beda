#pragma once

#include <cstddef>
#include <functional>

namespace isingdetect {

/// Worker count from ISING_DETECT_THREADS (unset or 0 = hardware concurrency).
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on up to `workers` threads (0 = worker_count()).
/// Every index runs exactly once; the first exception thrown is rethrown after
/// all workers have joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, std::size_t workers = 0);

}  // namespace isingdetect
