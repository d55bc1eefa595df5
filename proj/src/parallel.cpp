#include "ramplight/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ramplight {

void configure_threads() {
#ifdef _OPENMP
  if (const char* env = std::getenv("RAMPLIGHT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) omp_set_num_threads(n);
    } catch (...) {
      // ignore malformed values, keep the runtime default
    }
  }
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace ramplight
