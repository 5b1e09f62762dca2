#pragma once

#include <cstddef>
#include <functional>

namespace deepfeat {

// Runs body(begin, end) over a block partition of [0, count) on up to
// `threads` workers. Callers write results into disjoint preallocated slots,
// so the outcome is identical for every thread count. Exceptions thrown by
// workers are rethrown on the calling thread (lowest block first).
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace deepfeat
