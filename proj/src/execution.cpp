#include "heatchain/execution.hpp"

#include <omp.h>

namespace heatchain {

void set_max_threads(int jobs) {
  if (jobs > 0) omp_set_num_threads(jobs);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace heatchain
