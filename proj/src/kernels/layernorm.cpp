#include "canopysr/kernels.hpp"

#include <cmath>

namespace canopysr::kernels {

void layernorm_forward(const double* x, const double* gamma, const double* beta,
                       double* y, double* xhat, double* inv_sigma, int c, int h,
                       int w, double eps) {
  const std::size_t hw = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (long long p = 0; p < static_cast<long long>(hw); ++p) {
    double mean = 0.0;
    for (int cc = 0; cc < c; ++cc)
      mean += x[cc * hw + p];
    mean /= c;
    double var = 0.0;
    for (int cc = 0; cc < c; ++cc) {
      const double d = x[cc * hw + p] - mean;
      var += d * d;
    }
    var /= c;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_sigma[p] = is;
    for (int cc = 0; cc < c; ++cc) {
      const double xh = (x[cc * hw + p] - mean) * is;
      xhat[cc * hw + p] = xh;
      y[cc * hw + p] = gamma[cc] * xh + beta[cc];
    }
  }
}

void layernorm_backward(const double* dy, const double* gamma, const double* xhat,
                        const double* inv_sigma, double* dx, double* dgamma,
                        double* dbeta, int c, int h, int w) {
  const std::size_t hw = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (long long p = 0; p < static_cast<long long>(hw); ++p) {
    double s1 = 0.0, s2 = 0.0;
    for (int cc = 0; cc < c; ++cc) {
      const double g = dy[cc * hw + p] * gamma[cc];
      s1 += g;
      s2 += g * xhat[cc * hw + p];
    }
    const double is = inv_sigma[p];
    for (int cc = 0; cc < c; ++cc) {
      const double g = dy[cc * hw + p] * gamma[cc];
      dx[cc * hw + p] = is * (g - s1 / c - xhat[cc * hw + p] * s2 / c);
    }
  }
  // Parameter grads: one channel per thread, pixel order fixed.
#pragma omp parallel for schedule(static)
  for (int cc = 0; cc < c; ++cc) {
    double dg = 0.0, db = 0.0;
    for (std::size_t p = 0; p < hw; ++p) {
      dg += dy[cc * hw + p] * xhat[cc * hw + p];
      db += dy[cc * hw + p];
    }
    dgamma[cc] += dg;
    dbeta[cc] += db;
  }
}

} // namespace canopysr::kernels
