#pragma once

#include <cstddef>
#include <functional>

namespace skewlab {

void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index is processed exactly once; callers
// write into per-index slots and reduce in index order to stay deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace skewlab
