#pragma once

#include <functional>

#include "gax/types.hpp"

namespace gax {

// Process-wide worker count used by the data-parallel loops in this library.
// Results never depend on it: every loop writes to disjoint, index-addressed
// outputs.
void set_num_threads(int threads);
int num_threads();

// Calls body(begin_chunk, end_chunk) over a static partition of [begin, end).
void parallel_for(Index begin, Index end,
                  const std::function<void(Index, Index)>& body,
                  Index min_chunk = 1);

}  // namespace gax
