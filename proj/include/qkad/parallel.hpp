#pragma once

#include <cstddef>
#include <functional>

namespace qkad {

// Runs fn(i) for every i in [0, n), possibly from several threads. Each index
// is visited exactly once; callers must write only to per-index slots so the
// result is independent of the schedule. threads == 0 picks the hardware
// concurrency. The first exception thrown by fn is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

}  // namespace qkad
