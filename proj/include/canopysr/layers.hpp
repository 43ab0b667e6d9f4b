// Network building blocks with explicit forward/backward passes. Layers own
// their parameters and gradients; forward caches whatever backward needs
// (only while training), backward returns the input gradient and accumulates
// parameter gradients with +=.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "canopysr/rng.hpp"
#include "canopysr/tensor.hpp"

namespace canopysr {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  explicit Param(std::string n, std::vector<std::size_t> shape)
      : name(std::move(n)), value(shape), grad(std::move(shape)) {}
  void zero_grad() { grad.fill(0.0); }
};

// Weight initializers.
void init_he(Tensor& w, Rng& rng);                 // std = sqrt(2 / fan_in)
// Sub-pixel convolution init: each group of r^2 output kernels is replicated
// from one base kernel so the following pixel shuffle emits identical values
// across every r x r block; `noise` adds multiplicative i.i.d. perturbation
// of that relative magnitude to break the symmetry for training.
void init_subpixel(Tensor& w, int r, double noise, Rng& rng);
// Same, but the base kernels carry only a center tap. Convolutions at grids
// finer than the first shuffle must start as per-pixel maps, otherwise their
// taps mix across block borders and reintroduce checkerboard structure.
void init_subpixel_delta(Tensor& w, int r, double noise, Rng& rng);
void init_delta(Tensor& w, double noise, Rng& rng); // center tap only

class Conv2d {
public:
  // 3x3 (or any odd k) stride-1 shape-preserving convolution.
  Conv2d(std::string name, int cin, int cout, int k);

  // x: (n, cin, h, w) or (cin, h, w); output has the same rank.
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

  void set_training(bool on) { training_ = on; }
  std::vector<Param*> params() { return {&weight, &bias}; }

  Param weight; // (cout, cin, k, k)
  Param bias;   // (cout)
  int cin, cout, k;

private:
  Tensor x_cache_;
  bool cached_3d_ = false;
  bool training_ = true;
};

class ReLU {
public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy) const;
  void set_training(bool on) { training_ = on; }

private:
  std::vector<std::uint8_t> mask_;
  bool training_ = true;
};

// Per-pixel normalization over channels with learnable scale/shift.
class LayerNorm {
public:
  LayerNorm(std::string name, int channels, double eps = 1e-5);

  Tensor forward(const Tensor& x); // (c, h, w)
  Tensor backward(const Tensor& dy);

  void set_training(bool on) { training_ = on; }
  std::vector<Param*> params() { return {&gamma, &beta}; }

  Param gamma, beta;
  int channels;
  double eps;

private:
  Tensor xhat_, inv_sigma_;
  bool training_ = true;
};

// (c*r^2, h, w) -> (c, r*h, r*w); stateless.
class PixelShuffle {
public:
  explicit PixelShuffle(int r) : r(r) {}
  Tensor forward(const Tensor& x) const;
  Tensor backward(const Tensor& dy) const;
  int r;
};

} // namespace canopysr
