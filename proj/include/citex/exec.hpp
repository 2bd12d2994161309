#pragma once

#include <cstddef>
#include <exception>

namespace citex {

// Execution policy for the batch kernels. Every parallel kernel has a
// serial twin that produces bit-identical output; tests compare the two
// and tools/bench measures the gap.
enum class Exec { serial, parallel };

int max_threads();

// Runs fn(i) for i in [0, n). Parallel mode distributes iterations over
// OpenMP threads; results must be written to index-addressed slots so the
// two modes agree exactly. Exceptions may not escape an OpenMP region, so
// the lowest-index failure is captured and rethrown after the join.
template <typename Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::parallel) {
    std::exception_ptr error;
    std::size_t error_index = n;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(citex_for_each_index)
        {
          if (static_cast<std::size_t>(i) < error_index) {
            error_index = static_cast<std::size_t>(i);
            error = std::current_exception();
          }
        }
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (std::size_t i = 0; i < n; ++i) fn(i);
  }
}

}  // namespace citex
