#include "canopysr/kernels.hpp"

namespace canopysr::kernels {

void pixel_shuffle(const double* x, double* y, int c, int r, int h, int w) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int cc = 0; cc < c; ++cc)
    for (int yy = 0; yy < h; ++yy)
      for (int i = 0; i < r; ++i) {
        double* out_row =
            y + ((static_cast<std::size_t>(cc) * h + yy) * r + i) * (static_cast<std::size_t>(r) * w);
        for (int xx = 0; xx < w; ++xx) {
          const double* in =
              x + ((static_cast<std::size_t>(cc) * r * r + i * r) * h + yy) * w + xx;
          for (int j = 0; j < r; ++j)
            out_row[xx * r + j] = in[static_cast<std::size_t>(j) * h * w];
        }
      }
}

void pixel_unshuffle(const double* y, double* x, int c, int r, int h, int w) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int cc = 0; cc < c; ++cc)
    for (int yy = 0; yy < h; ++yy)
      for (int i = 0; i < r; ++i) {
        const double* in_row =
            y + ((static_cast<std::size_t>(cc) * h + yy) * r + i) * (static_cast<std::size_t>(r) * w);
        for (int xx = 0; xx < w; ++xx) {
          double* out =
              x + ((static_cast<std::size_t>(cc) * r * r + i * r) * h + yy) * w + xx;
          for (int j = 0; j < r; ++j)
            out[static_cast<std::size_t>(j) * h * w] = in_row[xx * r + j];
        }
      }
}

namespace ref {

void pixel_shuffle(const double* x, double* y, int c, int r, int h, int w) {
  for (int cc = 0; cc < c; ++cc)
    for (int yy = 0; yy < h; ++yy)
      for (int xx = 0; xx < w; ++xx)
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < r; ++j)
            y[(static_cast<std::size_t>(cc) * r * h + yy * r + i) * (static_cast<std::size_t>(r) * w) +
              xx * r + j] =
                x[((static_cast<std::size_t>(cc) * r * r + i * r + j) * h + yy) * w + xx];
}

} // namespace ref

} // namespace canopysr::kernels
