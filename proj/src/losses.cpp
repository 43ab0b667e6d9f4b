#include "canopysr/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace canopysr {

namespace {

double sgn(double v) { return v > 0 ? 1.0 : v < 0 ? -1.0 : 0.0; }

void check_exponent(int exponent) {
  if (exponent != 1 && exponent != 2)
    throw std::invalid_argument("gdl exponent must be 1 or 2");
}

void check_batch_shapes(const Tensor& pred, const Tensor& target,
                        const std::vector<std::uint8_t>& valid) {
  if (pred.ndim() != 3 || !pred.same_shape(target) || valid.size() != pred.size())
    throw std::invalid_argument("batch shapes disagree");
}

} // namespace

GradPair gradients(const Tensor& img) {
  if (img.ndim() != 2)
    throw std::invalid_argument("gradients expects a (H, W) map");
  const std::size_t h = img.dim(0), w = img.dim(1);
  GradPair g;
  g.gx = Tensor({h, w > 0 ? w - 1 : 0});
  g.gy = Tensor({h > 0 ? h - 1 : 0, w});
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 1; j < w; ++j)
      g.gx.at(i, j - 1) = img.at(i, j) - img.at(i, j - 1);
  for (std::size_t i = 1; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      g.gy.at(i - 1, j) = img.at(i, j) - img.at(i - 1, j);
  return g;
}

PatchTerm mae_patch(const double* pred, const double* target,
                    const std::uint8_t* valid, int h, int w, double scale,
                    double* dpred) {
  PatchTerm out;
  double sum = 0.0;
  const std::size_t n = std::size_t(h) * w;
  for (std::size_t p = 0; p < n; ++p)
    if (valid[p]) {
      sum += std::abs(pred[p] - target[p]);
      ++out.terms;
    }
  if (out.terms == 0)
    return out;
  out.value = sum / double(out.terms);
  if (dpred) {
    const double s = scale / double(out.terms);
    for (std::size_t p = 0; p < n; ++p)
      if (valid[p])
        dpred[p] += s * sgn(pred[p] - target[p]);
  }
  return out;
}

PatchTerm wgdl_patch(const double* pred, const double* target,
                     const std::uint8_t* valid, int h, int w, double lambda_min,
                     int exponent, double scale, double* dpred) {
  check_exponent(exponent);
  PatchTerm out;
  double dir_means = 0.0;

  // dir 0: horizontal differences (j, j-1); dir 1: vertical (i, i-1).
  for (int dir = 0; dir < 2; ++dir) {
    const int stride = dir == 0 ? 1 : w;
    const int i_end = dir == 0 ? h : h - 1;
    const int j_begin = dir == 0 ? 1 : 0;

    double max_gy = 0.0;
    std::size_t count = 0;
    for (int i = 0; i < i_end; ++i)
      for (int j = j_begin; j < w; ++j) {
        const std::size_t p = std::size_t(i) * w + j + (dir == 1 ? w : 0);
        if (!valid[p] || !valid[p - stride])
          continue;
        const double gy = std::abs(target[p] - target[p - stride]);
        if (gy > max_gy)
          max_gy = gy;
        ++count;
      }
    out.terms += count;
    if (count == 0)
      continue;

    double sum = 0.0;
    for (int i = 0; i < i_end; ++i)
      for (int j = j_begin; j < w; ++j) {
        const std::size_t p = std::size_t(i) * w + j + (dir == 1 ? w : 0);
        if (!valid[p] || !valid[p - stride])
          continue;
        const double gx = pred[p] - pred[p - stride];
        const double gy = std::abs(target[p] - target[p - stride]);
        const double weight =
            max_gy > 0 ? lambda_min + (1.0 - lambda_min) * gy / max_gy : lambda_min;
        const double diff = std::abs(gx) - gy;
        sum += weight * (exponent == 2 ? diff * diff : std::abs(diff));
        if (dpred) {
          const double dterm = exponent == 2 ? 2.0 * diff : sgn(diff);
          const double d = scale * 0.5 / double(count) * weight * dterm * sgn(gx);
          dpred[p] += d;
          dpred[p - stride] -= d;
        }
      }
    dir_means += sum / double(count);
  }
  out.value = dir_means / 2.0;
  return out;
}

namespace {

// Shared two-pass batch reduction: collect per-patch terms, then distribute
// gradients scaled by the count of contributing patches.
template <typename PatchFn>
double balanced_batch(const Tensor& pred, const Tensor& target,
                      const std::vector<std::uint8_t>& valid, Tensor* dpred,
                      const char* what, PatchFn&& patch_fn) {
  const int b = int(pred.dim(0));
  const int h = int(pred.dim(1));
  const int w = int(pred.dim(2));
  const std::size_t stride = std::size_t(h) * w;

  std::vector<double> values(b);
  std::vector<std::size_t> terms(b);
  int counted = 0;
  for (int i = 0; i < b; ++i) {
    const PatchTerm t = patch_fn(pred.data() + i * stride, target.data() + i * stride,
                                 valid.data() + i * stride, 0.0, nullptr);
    values[i] = t.value;
    terms[i] = t.terms;
    if (t.terms > 0)
      ++counted;
  }
  if (counted == 0)
    throw std::domain_error(std::string(what) + ": no valid terms in the whole batch");

  double sum = 0.0;
  for (int i = 0; i < b; ++i)
    if (terms[i] > 0)
      sum += values[i];

  if (dpred) {
    *dpred = Tensor(pred.shape());
    const double scale = 1.0 / double(counted);
    for (int i = 0; i < b; ++i)
      if (terms[i] > 0)
        patch_fn(pred.data() + i * stride, target.data() + i * stride,
                 valid.data() + i * stride, scale, dpred->data() + i * stride);
  }
  return sum / double(counted);
}

} // namespace

double patch_balanced_mae(const Tensor& pred, const Tensor& target,
                          const std::vector<std::uint8_t>& valid, Tensor* dpred) {
  check_batch_shapes(pred, target, valid);
  const int h = int(pred.dim(1)), w = int(pred.dim(2));
  return balanced_batch(pred, target, valid, dpred, "patch_balanced_mae",
                        [&](const double* p, const double* t, const std::uint8_t* v,
                            double s, double* d) { return mae_patch(p, t, v, h, w, s, d); });
}

double wgdl(const Tensor& pred, const Tensor& target,
            const std::vector<std::uint8_t>& valid, double lambda_min,
            int exponent, Tensor* dpred) {
  check_batch_shapes(pred, target, valid);
  check_exponent(exponent);
  const int h = int(pred.dim(1)), w = int(pred.dim(2));
  return balanced_batch(pred, target, valid, dpred, "wgdl",
                        [&](const double* p, const double* t, const std::uint8_t* v,
                            double s, double* d) {
                          return wgdl_patch(p, t, v, h, w, lambda_min, exponent, s, d);
                        });
}

LossValue total_loss(const Tensor& pred, const Tensor& target,
                     const std::vector<std::uint8_t>& valid,
                     const LossConfig& cfg, Tensor* dpred) {
  // Components with zero weight are skipped entirely, so e.g. a batch with
  // valid pixels but no valid gradient pairs still trains with w_wgdl = 0.
  LossValue out;
  Tensor dh, dw;
  if (cfg.w_height != 0.0)
    out.height = patch_balanced_mae(pred, target, valid, dpred ? &dh : nullptr);
  if (cfg.w_wgdl != 0.0)
    out.wgdl = wgdl(pred, target, valid, cfg.lambda_min, cfg.gdl_exponent,
                    dpred ? &dw : nullptr);
  out.total = cfg.w_height * out.height + cfg.w_wgdl * out.wgdl;
  if (dpred) {
    *dpred = Tensor(pred.shape());
    for (std::size_t i = 0; i < dpred->size(); ++i)
      (*dpred)[i] = (cfg.w_height != 0.0 ? cfg.w_height * dh[i] : 0.0) +
                    (cfg.w_wgdl != 0.0 ? cfg.w_wgdl * dw[i] : 0.0);
  }
  return out;
}

BatchCounts count_loss_patches(const std::vector<std::uint8_t>& valid, int b,
                               int h, int w) {
  BatchCounts c;
  const std::size_t stride = std::size_t(h) * w;
  for (int i = 0; i < b; ++i) {
    const std::uint8_t* v = valid.data() + i * stride;
    bool any_pixel = false, any_pair = false;
    for (int y = 0; y < h && !any_pair; ++y)
      for (int x = 0; x < w; ++x) {
        if (!v[std::size_t(y) * w + x])
          continue;
        any_pixel = true;
        if ((x + 1 < w && v[std::size_t(y) * w + x + 1]) ||
            (y + 1 < h && v[std::size_t(y + 1) * w + x])) {
          any_pair = true;
          break;
        }
      }
    if (any_pixel)
      ++c.mae_patches;
    if (any_pair)
      ++c.wgdl_patches;
  }
  return c;
}

LossValue sample_loss(const Tensor& pred, const Tensor& target,
                      const std::uint8_t* valid, const LossConfig& cfg,
                      const BatchCounts& counts, Tensor* dpred) {
  if (pred.ndim() != 2 || !pred.same_shape(target))
    throw std::invalid_argument("sample shapes disagree");
  const int h = int(pred.dim(0)), w = int(pred.dim(1));
  LossValue out;
  if (cfg.w_height != 0.0 && counts.mae_patches > 0) {
    const double s = cfg.w_height / double(counts.mae_patches);
    const PatchTerm t =
        mae_patch(pred.data(), target.data(), valid, h, w, s, dpred ? dpred->data() : nullptr);
    if (t.terms > 0)
      out.height = t.value / double(counts.mae_patches);
  }
  if (cfg.w_wgdl != 0.0 && counts.wgdl_patches > 0) {
    const double s = cfg.w_wgdl / double(counts.wgdl_patches);
    const PatchTerm t =
        wgdl_patch(pred.data(), target.data(), valid, h, w, cfg.lambda_min,
                   cfg.gdl_exponent, s, dpred ? dpred->data() : nullptr);
    if (t.terms > 0)
      out.wgdl = t.value / double(counts.wgdl_patches);
  }
  out.total = cfg.w_height * out.height + cfg.w_wgdl * out.wgdl;
  return out;
}

} // namespace canopysr
