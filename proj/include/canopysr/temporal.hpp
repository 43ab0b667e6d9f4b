// Collapses a feature series to one map with per-pixel attention. Keys and
// values come from the date-encoded features; the single query is produced
// from the encoding of the target date, so the module can be asked "what did
// the scene look like on this day" for any day.
#pragma once

#include <cstdint>
#include <vector>

#include "canopysr/layers.hpp"
#include "canopysr/modelcfg.hpp"

namespace canopysr {

class TemporalFusion {
public:
  TemporalFusion(const ModelConfig& cfg, Rng& rng);

  // feats: (t, f1, h, w); offsets: day offset of each observation; valid:
  // 1 = real observation, 0 = padding. Returns (f2, h, w).
  Tensor forward(const Tensor& feats, const std::vector<double>& offsets,
                 double target_offset, const std::vector<std::uint8_t>& valid);
  // Returns the gradient with respect to the raw (un-encoded) features.
  Tensor backward(const Tensor& dy);

  // Softmax weights of the last forward, (heads, t, h, w).
  const Tensor& attention() const { return attn_; }

  void set_training(bool on);
  std::vector<Param*> params();

  Param wq; // (heads * d_attn, f1): master query projection, split per head
  Param wk; // (heads, d_head, d_attn)
  Param wv; // (heads, d_head, d_attn)

private:
  Conv2d mix_;    // 1x1: heads * d_attn -> f2
  LayerNorm norm_;
  int f1_, heads_, d_attn_;
  double tau_;
  bool training_ = true;

  Tensor encoded_;              // (t, f1, h, w), cached for backward
  Tensor attn_;                 // (heads, t, h, w)
  Tensor query_;                // (heads, d_attn)
  std::vector<double> target_encoding_;
  std::vector<std::uint8_t> valid_;
};

} // namespace canopysr
