#pragma once

#include <exception>
#include <vector>

namespace varsel {

/// Execution policy for the data-parallel kernels. `serial` is the reference
/// path used by the tests; both policies produce bit-identical results.
enum class Exec { serial, parallel };

/// Sets the OpenMP worker count (no-op without OpenMP). Values < 1 are
/// ignored.
void set_thread_count(int threads);

int thread_count();

/// Runs body(i) for i in [0, count). Under Exec::parallel iterations are
/// spread over OpenMP threads; each iteration must write only its own slot.
/// If iterations throw, the exception from the lowest index is rethrown, so
/// failures are reported identically for any thread count.
template <class Body>
void for_each_index(int count, Exec exec, Body&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count > 0 ? count : 0));
#pragma omp parallel for schedule(dynamic, 1) if (exec == Exec::parallel && count > 1)
  for (int i = 0; i < count; ++i) {
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

}  // namespace varsel
