#pragma once

// Loop execution policy. Every parallel loop in the library runs its body on
// independent work items whose randomness comes from a per-item substream, so
// the serial policy is a bit-exact reference for the OpenMP one.

#include <cstdint>
#include <exception>

namespace entver {

enum class Exec { serial, parallel };

template <class Body>
void for_each_index(std::int64_t n, Exec exec, Body&& body) {
  if (exec == Exec::parallel) {
    // Exceptions must not escape an OpenMP region; the first one is rethrown afterwards.
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
#pragma omp critical(entver_loop_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::int64_t i = 0; i < n; ++i) body(i);
  }
}

/// Thread count the OpenMP runtime would use (1 without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace entver
