#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace fairstyle::detail {

/// Runs body(i) for i in [0, n), across OpenMP threads when `parallel` is
/// set. The exception of the lowest failing index is rethrown, so errors are
/// the same as in a serial run.
template <class Body>
void parallel_for(std::size_t n, bool parallel, Body&& body) {
  if (!parallel) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first_error;
  std::size_t first_index = n;
  std::mutex mutex;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(mutex);
      if (static_cast<std::size_t>(i) < first_index) {
        first_index = static_cast<std::size_t>(i);
        first_error = std::current_exception();
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fairstyle::detail
