#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace mpctune::par {

/// Worker cap for parallel_for. 1 selects the serial path. Values above the
/// hardware/OpenMP limit are clipped. Thread-safe.
void set_max_threads(int n);
int max_threads();

/// True when the library was built with OpenMP.
bool openmp_enabled();

namespace detail {
void run_indexed(std::size_t n, const std::function<void(std::size_t)>& body,
                 bool parallel);
}

/// Runs body(0) .. body(n-1). With max_threads() > 1 and OpenMP available the
/// iterations run on a thread pool; otherwise a plain serial loop is used.
/// Callers must make iterations independent (each writes its own slot), which
/// keeps results identical between the two paths. The first exception thrown
/// by any iteration is rethrown on the calling thread.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
  detail::run_indexed(n, std::function<void(std::size_t)>(std::forward<F>(body)),
                      max_threads() > 1);
}

/// Serial reference path with identical semantics; kept callable directly so
/// tests and benchmarks can compare against the parallel path.
template <typename F>
void serial_for(std::size_t n, F&& body) {
  detail::run_indexed(n, std::function<void(std::size_t)>(std::forward<F>(body)),
                      false);
}

}  // namespace mpctune::par
