// Thread-count control for the OpenMP kernels.
//
// All parallel kernels in this project assign each output element (or each
// output row) to exactly one thread and keep the per-element summation order
// fixed, so results are bit-identical for any thread count, including the
// serial reference path.
#pragma once

namespace canopysr {

// Sets the number of OpenMP threads used by the kernels (0 = hardware default).
void set_num_threads(int n);

int num_threads();

} // namespace canopysr
