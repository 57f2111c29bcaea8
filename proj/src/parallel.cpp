#include "fnc/parallel.hpp"

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>

#ifdef FNC_HAVE_OPENMP
#include <omp.h>
#endif

namespace fnc {

int worker_count() {
#ifdef FNC_HAVE_OPENMP
  int n = omp_get_max_threads();
#else
  int n = 1;
#endif
  if (const char* env = std::getenv("FNC_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1 && cap < n) n = cap;
    } catch (const std::exception&) {
      // unparseable cap is ignored
    }
  }
  return n;
}

void for_each_index(ExecutionPolicy policy, std::size_t n,
                    const std::function<void(std::size_t)>& fn) {
  if (policy == ExecutionPolicy::serial || worker_count() <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef FNC_HAVE_OPENMP
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
#else
  for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace fnc
