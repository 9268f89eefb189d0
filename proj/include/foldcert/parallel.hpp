#pragma once

#include <cstddef>
#include <functional>

namespace foldcert {

/// Runs fn(i) for i in [0, n) on a small thread pool. Results must be
/// written by fn into index-addressed storage so that the merge is
/// deterministic regardless of scheduling. fn must not throw; catch and
/// encode failures in the per-index result.
void parallel_for_index(std::size_t n, const std::function<void(std::size_t)>& fn,
                        unsigned max_threads = 0);

}  // namespace foldcert
