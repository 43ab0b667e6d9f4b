// Upsampling trunk and per-pixel regression head that sit on top of the fused
// feature map. The trunk grows the grid by the configured power-of-two factor
// through sub-pixel convolutions whose init keeps every r x r output block
// constant, so a freshly built model starts free of checkerboard structure.
#pragma once

#include <vector>

#include "canopysr/layers.hpp"
#include "canopysr/modelcfg.hpp"

namespace canopysr {

class SRHead {
public:
  SRHead(const ModelConfig& cfg, Rng& rng);

  Tensor forward(const Tensor& x); // (f2, h, w) -> (f2, r*h, r*w)
  Tensor backward(const Tensor& dy);

  void set_training(bool on);
  std::vector<Param*> params();

  int factor() const { return factor_; }

private:
  std::vector<Conv2d> convs_; // per stage: f2 -> 4*f2
  PixelShuffle shuffle_{2};
  // Only built when factor > 1; factor 1 keeps the head a strict identity.
  std::vector<Conv2d> final_; // 3x3: f2 -> f2
  ReLU relu_;
  int factor_;
};

// Three pointwise convolutions mapping fused features to one height channel.
class MlpHead {
public:
  MlpHead(const ModelConfig& cfg, Rng& rng);

  Tensor forward(const Tensor& x); // (f2, h, w) -> (1, h, w)
  Tensor backward(const Tensor& dy);

  void set_training(bool on);
  std::vector<Param*> params();

private:
  Conv2d fc1_, fc2_, fc3_;
  ReLU relu1_, relu2_;
};

} // namespace canopysr
