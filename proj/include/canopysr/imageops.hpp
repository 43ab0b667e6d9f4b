#pragma once

#include "canopysr/tensor.hpp"

namespace canopysr {

// Catmull-Rom bicubic upsampling of a (H, W) map by an integer factor,
// center-aligned, edge-replicated.
Tensor bicubic_upsample(const Tensor& img, int factor);

// 2x2 block averaging; both sides must be even.
Tensor box_downsample2(const Tensor& img);

// Separable Gaussian blur, radius = ceil(3*sigma), edge-replicated.
Tensor gaussian_blur(const Tensor& img, double sigma);

// Sub-rectangle of a (H, W) map.
Tensor crop2d(const Tensor& img, std::size_t y0, std::size_t x0, std::size_t h,
              std::size_t w);

} // namespace canopysr
