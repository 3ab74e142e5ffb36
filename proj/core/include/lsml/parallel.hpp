#pragma once

#include <cstddef>
#include <functional>

namespace lsml {

/// Maximum number of worker threads used by library kernels. Defaults to the
/// LSML_THREADS environment variable, or the hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n). Work is split into contiguous chunks; body
/// must only write to state owned by index i so that results do not depend
/// on the number of threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lsml
