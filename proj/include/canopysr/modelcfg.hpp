#pragma once

#include <stdexcept>

namespace canopysr {

// Architecture hyperparameters. Defaults reproduce the published
// configuration; the per-resolution presets adjust block counts and the
// upsampling factor.
struct ModelConfig {
  int input_channels = 17;
  int f1 = 64;    // backbone output dim, equals the attention embedding d
  int growth = 24;
  int n_blocks = 5;
  int layers_per_block = 5;
  int heads = 4;
  int d_attn = 16; // per-head hidden dimension
  int f2 = 64;     // fused feature dim
  int factor = 2;  // super-resolution factor r, power of 2
  int mlp_hidden1 = 128;
  int mlp_hidden2 = 64;
  double tau = 365.0;
  double init_noise = 1e-4;
  double ln_eps = 1e-5;

  int d_head() const { return f1 / heads; }

  void validate() const {
    if (f1 <= 0 || growth <= 0 || n_blocks <= 0 || layers_per_block <= 0)
      throw std::invalid_argument("backbone dimensions must be positive");
    if (f1 % 2 != 0)
      throw std::invalid_argument("f1 must be even (positional encoding pairs)");
    if (heads <= 0 || f1 % heads != 0)
      throw std::invalid_argument("heads must divide f1");
    if (d_attn <= 0 || f2 <= 0)
      throw std::invalid_argument("attention dims must be positive");
    if (factor < 1 || (factor & (factor - 1)) != 0)
      throw std::invalid_argument("factor must be a power of 2");
    if (mlp_hidden1 <= 0 || mlp_hidden2 <= 0)
      throw std::invalid_argument("mlp dims must be positive");
  }

  // 10 m keeps the native grid and a lighter backbone; 5 m and 2.5 m add
  // one and two x2 upsampling stages over the deeper 5x5 backbone.
  static ModelConfig for_resolution(double meters) {
    ModelConfig c;
    if (meters == 10.0) {
      c.factor = 1;
      c.n_blocks = 4;
      c.layers_per_block = 4;
    } else if (meters == 5.0) {
      c.factor = 2;
    } else if (meters == 2.5) {
      c.factor = 4;
    } else {
      throw std::invalid_argument("resolution must be 10, 5 or 2.5");
    }
    return c;
  }
};

} // namespace canopysr
