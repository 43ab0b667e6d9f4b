#include "canopysr/imageops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace canopysr {

namespace {

// Catmull-Rom kernel (cubic convolution, a = -0.5).
double cubic(double t) {
  const double a = -0.5;
  t = std::abs(t);
  if (t < 1.0)
    return ((a + 2) * t - (a + 3)) * t * t + 1;
  if (t < 2.0)
    return ((a * t - 5 * a) * t + 8 * a) * t - 4 * a;
  return 0.0;
}

std::size_t clamp_idx(long long i, std::size_t n) {
  return std::size_t(std::clamp(i, 0ll, (long long)n - 1));
}

} // namespace

Tensor bicubic_upsample(const Tensor& img, int factor) {
  if (img.ndim() != 2)
    throw std::invalid_argument("bicubic_upsample expects a (H, W) map");
  if (factor < 1)
    throw std::invalid_argument("factor must be >= 1");
  const std::size_t h = img.dim(0), w = img.dim(1);
  const std::size_t oh = h * factor, ow = w * factor;
  Tensor out({oh, ow});

  // Per output coordinate: 4 source taps and their weights, precomputed per
  // axis since the sampling offsets repeat with period `factor`.
  auto taps = [&](std::size_t o, std::size_t n, long long idx[4], double wt[4]) {
    const double s = (double(o) + 0.5) / factor - 0.5;
    const long long base = (long long)std::floor(s);
    const double fr = s - double(base);
    for (int k = 0; k < 4; ++k) {
      idx[k] = base - 1 + k;
      wt[k] = cubic(double(k - 1) - fr);
    }
    (void)n;
  };

#pragma omp parallel for schedule(static)
  for (long long oy = 0; oy < (long long)oh; ++oy) {
    long long iy[4], ix[4];
    double wy[4], wx[4];
    taps(std::size_t(oy), h, iy, wy);
    for (std::size_t ox = 0; ox < ow; ++ox) {
      taps(ox, w, ix, wx);
      double acc = 0.0;
      for (int ky = 0; ky < 4; ++ky) {
        const std::size_t sy = clamp_idx(iy[ky], h);
        double row = 0.0;
        for (int kx = 0; kx < 4; ++kx)
          row += wx[kx] * img.at(sy, clamp_idx(ix[kx], w));
        acc += wy[ky] * row;
      }
      out.at(std::size_t(oy), ox) = acc;
    }
  }
  return out;
}

Tensor box_downsample2(const Tensor& img) {
  if (img.ndim() != 2 || img.dim(0) % 2 != 0 || img.dim(1) % 2 != 0)
    throw std::invalid_argument("box_downsample2 expects even (H, W)");
  const std::size_t oh = img.dim(0) / 2, ow = img.dim(1) / 2;
  Tensor out({oh, ow});
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x)
      out.at(y, x) = 0.25 * (img.at(2 * y, 2 * x) + img.at(2 * y, 2 * x + 1) +
                             img.at(2 * y + 1, 2 * x) + img.at(2 * y + 1, 2 * x + 1));
  return out;
}

Tensor gaussian_blur(const Tensor& img, double sigma) {
  if (img.ndim() != 2)
    throw std::invalid_argument("gaussian_blur expects a (H, W) map");
  if (sigma <= 0)
    return img;
  const int radius = int(std::ceil(3 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += taps[i + radius];
  }
  for (auto& t : taps)
    t /= sum;

  const std::size_t h = img.dim(0), w = img.dim(1);
  Tensor tmp({h, w}), out({h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += taps[k + radius] * img.at(y, clamp_idx((long long)x + k, w));
      tmp.at(y, x) = acc;
    }
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += taps[k + radius] * tmp.at(clamp_idx((long long)y + k, h), x);
      out.at(y, x) = acc;
    }
  return out;
}

Tensor crop2d(const Tensor& img, std::size_t y0, std::size_t x0, std::size_t h,
              std::size_t w) {
  if (img.ndim() != 2 || y0 + h > img.dim(0) || x0 + w > img.dim(1))
    throw std::invalid_argument("crop outside image bounds");
  Tensor out({h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      out.at(y, x) = img.at(y0 + y, x0 + x);
  return out;
}

} // namespace canopysr
