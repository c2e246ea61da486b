#pragma once

#include <cstddef>
#include <functional>

namespace plaqed {

/// Worker count from PLAQED_WORKERS, defaulting to 1.
int default_workers();

/// Runs body(begin, end) over contiguous chunks of [0, n) on up to `workers`
/// threads. Each index is handled by exactly one chunk, so writes indexed by
/// position are deterministic regardless of scheduling.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace plaqed
