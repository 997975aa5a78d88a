#pragma once

#include <cstddef>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace memliou {

// Every grid kernel takes an execution policy. Serial is the reference
// implementation; Parallel distributes loop indices over OpenMP threads.
// Slots are written by index and reductions happen serially in index order,
// so both policies produce bit-identical results.
enum class Exec { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

// Exceptions thrown by the body are captured and the one with the lowest
// index is rethrown after the loop, so failures are deterministic too.
template <typename F>
void for_each_index(std::size_t n, Exec exec, F&& body) {
#ifdef _OPENMP
  if (exec == Exec::Parallel && n > 1) {
    std::exception_ptr first_error = nullptr;
    std::size_t first_index = n;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(memliou_for_each_index_error)
        {
          if (static_cast<std::size_t>(i) < first_index) {
            first_index = static_cast<std::size_t>(i);
            first_error = std::current_exception();
          }
        }
      }
    }
    if (first_error) std::rethrow_exception(first_error);
    return;
  }
#else
  (void)exec;
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace memliou
