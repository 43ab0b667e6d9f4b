// Training objectives.
//
// Both losses are patch-balanced: values are averaged within each patch
// first and then across the batch, so large patches do not dominate small
// ones. Patches contributing no valid terms are excluded from the outer
// mean. Masked pixels never contribute to values or gradients.
#pragma once

#include <cstdint>
#include <vector>

#include "canopysr/tensor.hpp"

namespace canopysr {

struct LossConfig {
  double w_height = 1.0; // weight of the masked MAE term
  double w_wgdl = 1.0;   // weight of the gradient-difference term
  double lambda_min = 0.1;
  int gdl_exponent = 2; // 1 or 2
};

struct LossValue {
  double total = 0.0;
  double height = 0.0;
  double wgdl = 0.0;
};

// Backward differences of a (H, W) map:
//   gx[i][j] = img[i][j+1] - img[i][j]  stored as (H, W-1)
//   gy[i][j] = img[i+1][j] - img[i][j]  stored as (H-1, W)
// (the first column/row of the difference grids carries no defined value and
// is simply not stored).
struct GradPair {
  Tensor gx;
  Tensor gy;
};
GradPair gradients(const Tensor& img);

// Mean absolute error within one patch over valid pixels. If dpred is given,
// scale * d(mean)/d(pred) is accumulated into it. Returns the mean and the
// number of valid pixels (value 0 when none).
struct PatchTerm {
  double value = 0.0;
  std::size_t terms = 0;
};
PatchTerm mae_patch(const double* pred, const double* target,
                    const std::uint8_t* valid, int h, int w, double scale = 0.0,
                    double* dpred = nullptr);

// Weighted gradient-difference loss within one patch: per direction, weights
// lambda_min + (1 - lambda_min) * |grad target| / max |grad target| (max over
// the patch's valid positions of that direction; all-lambda_min when the
// target is flat), applied to ||grad pred| - |grad target||^exponent and
// averaged over valid positions; the two directions are averaged. A gradient
// position is valid only when both pixels forming the difference are valid.
// `terms` counts valid positions over both directions.
PatchTerm wgdl_patch(const double* pred, const double* target,
                     const std::uint8_t* valid, int h, int w, double lambda_min,
                     int exponent, double scale = 0.0, double* dpred = nullptr);

// Batch forms over (B, H, W) tensors with a B*H*W mask. Throw
// std::domain_error when every patch is excluded. If dpred is given it is
// overwritten with dL/dpred.
double patch_balanced_mae(const Tensor& pred, const Tensor& target,
                          const std::vector<std::uint8_t>& valid,
                          Tensor* dpred = nullptr);
double wgdl(const Tensor& pred, const Tensor& target,
            const std::vector<std::uint8_t>& valid, double lambda_min,
            int exponent, Tensor* dpred = nullptr);
LossValue total_loss(const Tensor& pred, const Tensor& target,
                     const std::vector<std::uint8_t>& valid,
                     const LossConfig& cfg, Tensor* dpred = nullptr);

// Support for streaming batches one sample at a time: the outer-mean patch
// counts must be known before per-sample gradients can be scaled.
struct BatchCounts {
  int mae_patches = 0;
  int wgdl_patches = 0;
};
BatchCounts count_loss_patches(const std::vector<std::uint8_t>& valid, int b,
                               int h, int w);

// One sample's contribution to the batch total_loss (already divided by the
// batch counts). Accumulates dL/dpred for this sample into dpred if given.
LossValue sample_loss(const Tensor& pred, const Tensor& target,
                      const std::uint8_t* valid, const LossConfig& cfg,
                      const BatchCounts& counts, Tensor* dpred = nullptr);

} // namespace canopysr
