#include "tna/runtime.hpp"

#include <omp.h>

namespace tna {

namespace {
int startup_default() {
    static const int n = omp_get_max_threads();
    return n;
}
}  // namespace

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
    omp_set_num_threads(n > 0 ? n : startup_default());
}

}  // namespace tna
