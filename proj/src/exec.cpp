#include "citex/exec.hpp"

#include <omp.h>

namespace citex {

int max_threads() { return omp_get_max_threads(); }

}  // namespace citex
