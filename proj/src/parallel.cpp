#include "mpctune/parallel.hpp"

#include <atomic>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mpctune::par {

namespace {
std::atomic<int> g_max_threads{
#ifdef _OPENMP
    0  // 0 = use omp_get_max_threads() at call time
#else
    1
#endif
};
}  // namespace

void set_max_threads(int n) { g_max_threads.store(n < 1 ? 1 : n); }

int max_threads() {
  int n = g_max_threads.load();
#ifdef _OPENMP
  const int hw = omp_get_max_threads();
  if (n == 0 || n > hw) n = hw;
#else
  n = 1;
#endif
  return n;
}

bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

namespace detail {

void run_indexed(std::size_t n, const std::function<void(std::size_t)>& body,
                 bool parallel) {
  if (!parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
#ifdef _OPENMP
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const int threads = max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
#else
  for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace detail

}  // namespace mpctune::par
