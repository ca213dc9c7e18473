#pragma once

namespace tna {

// Number of OpenMP threads parallel regions will use.
int max_threads();

// Caps the OpenMP thread count; n <= 0 restores the startup default.
// Results of every kernel are bit-identical across thread counts, so this
// only affects speed.
void set_threads(int n);

}  // namespace tna
