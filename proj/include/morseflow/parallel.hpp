#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace morseflow {

/// Run body(i) for i in [0, count). threads == 1 is the serial reference
/// path; threads == 0 uses the OpenMP default. Bodies must not touch
/// shared mutable state: results are written to per-index slots only, so
/// serial and parallel runs produce identical output.
template <typename Body>
void parallel_for(std::ptrdiff_t count, int threads, Body&& body) {
  if (threads == 1) {
    for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
    return;
  }
#ifdef _OPENMP
  if (threads > 1) omp_set_num_threads(threads);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
#else
  for (std::ptrdiff_t i = 0; i < count; ++i) body(i);
#endif
}

}  // namespace morseflow
