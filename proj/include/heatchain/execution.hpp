#pragma once

#include <exception>
#include <vector>

namespace heatchain {

/// Ensemble kernels run either as a plain loop (the reference) or as an OpenMP loop.
/// Both paths produce identical results: work items are independent and reductions
/// happen serially over per-item results.
enum class Exec { serial, parallel };

/// Upper bound on OpenMP threads used by parallel kernels; <= 0 leaves the runtime default.
void set_max_threads(int jobs);
int max_threads();

/// Runs body(i) for i in [0, count). Exceptions thrown by items are collected and the
/// one from the lowest index is rethrown after the loop, so both modes fail identically.
template <class Body>
void for_each_index(long count, Exec exec, Body&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count > 0 ? count : 0));
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (long i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace heatchain
