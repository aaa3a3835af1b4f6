#pragma once

#include <cstddef>
#include <functional>

namespace apa {

/// Worker count used by batch operations. 0 selects the hardware
/// concurrency. Results never depend on this value.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Iterations must be independent and write
/// only to their own output slots. The first exception thrown by any
/// iteration is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace apa
