#pragma once

#include <cstddef>
#include <functional>

namespace cellscape {

/// Worker count used by the pixel/row-parallel kernels. 0 selects the
/// hardware concurrency. Results never depend on this value.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs body(begin, end) over contiguous sub-ranges of [begin, end).
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace cellscape
