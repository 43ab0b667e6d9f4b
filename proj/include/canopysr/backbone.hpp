// Shared-weight spatial feature extractor applied to every observation of a
// series. Two shallow convs feed a chain of residual dense blocks; all block
// outputs are fused and a global residual from the first conv is added back.
#pragma once

#include <vector>

#include "canopysr/layers.hpp"
#include "canopysr/modelcfg.hpp"

namespace canopysr {

class DenseBlock {
public:
  DenseBlock(const std::string& name, int f1, int growth, int layers);

  Tensor forward(const Tensor& x);  // (t, f1, h, w) -> (t, f1, h, w)
  Tensor backward(const Tensor& dy);

  void set_training(bool on);
  std::vector<Param*> params();
  void init(Rng& rng);

private:
  std::vector<Conv2d> convs_; // layer l: f1 + l*growth -> growth
  std::vector<ReLU> relus_;
  Conv2d fuse_;               // 1x1: f1 + layers*growth -> f1
  int f1_, growth_;
};

class Backbone {
public:
  Backbone(const ModelConfig& cfg, Rng& rng);

  Tensor forward(const Tensor& x);  // (t, input_channels, h, w) -> (t, f1, h, w)
  Tensor backward(const Tensor& dy);

  void set_training(bool on);
  std::vector<Param*> params();

  // Radius, in input pixels, of the set of inputs one output pixel can see.
  int receptive_radius() const { return 3 + n_blocks_ * layers_per_block_; }

private:
  Conv2d sfe1_, sfe2_;
  std::vector<DenseBlock> blocks_;
  Conv2d gff_mix_;  // 1x1: n_blocks*f1 -> f1
  Conv2d gff_conv_; // 3x3: f1 -> f1
  int f1_, n_blocks_, layers_per_block_;
};

} // namespace canopysr
