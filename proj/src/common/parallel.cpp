#include "varsel/common/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace varsel {

void set_thread_count(int threads) {
  if (threads < 1) return;
#ifdef _OPENMP
  omp_set_num_threads(threads);
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace varsel
