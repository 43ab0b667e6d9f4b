#include "canopysr/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "canopysr/kernels.hpp"

namespace canopysr {

void init_he(Tensor& w, Rng& rng) {
  if (w.ndim() != 4)
    throw std::invalid_argument("init_he expects (cout, cin, k, k) weights");
  const double fan_in = double(w.dim(1) * w.dim(2) * w.dim(3));
  const double stddev = std::sqrt(2.0 / fan_in);
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = normal(rng, 0.0, stddev);
}

namespace {

// Replicates base kernels across each group of r^2 output channels, with
// optional multiplicative symmetry-breaking noise. `delta_base` restricts the
// base kernels to their center tap.
void subpixel_init(Tensor& w, int r, double noise, Rng& rng, bool delta_base) {
  if (w.ndim() != 4)
    throw std::invalid_argument("subpixel init expects (cout, cin, k, k) weights");
  const std::size_t cout = w.dim(0), cin = w.dim(1), k = w.dim(2);
  const std::size_t group = std::size_t(r) * r;
  if (cout % group != 0)
    throw std::invalid_argument("output channels not divisible by r^2");
  const std::size_t kernel_sz = cin * k * k;
  const std::size_t center = (k / 2) * k + k / 2;

  Tensor base({cout / group, cin, k, k});
  init_he(base, rng);
  if (delta_base)
    for (std::size_t g = 0; g < cout / group; ++g)
      for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t t = 0; t < k * k; ++t)
          if (t != center)
            base[(g * cin + c) * k * k + t] = 0.0;

  for (std::size_t oc = 0; oc < cout; ++oc) {
    const std::size_t g = oc / group;
    for (std::size_t t = 0; t < kernel_sz; ++t)
      w[oc * kernel_sz + t] = base[g * kernel_sz + t];
  }
  if (noise > 0)
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] *= 1.0 + noise * normal(rng);
}

} // namespace

void init_subpixel(Tensor& w, int r, double noise, Rng& rng) {
  subpixel_init(w, r, noise, rng, false);
}

void init_subpixel_delta(Tensor& w, int r, double noise, Rng& rng) {
  subpixel_init(w, r, noise, rng, true);
}

void init_delta(Tensor& w, double noise, Rng& rng) {
  subpixel_init(w, 1, noise, rng, true);
}

Conv2d::Conv2d(std::string name, int cin, int cout, int k)
    : weight(name + ".weight",
             {std::size_t(cout), std::size_t(cin), std::size_t(k), std::size_t(k)}),
      bias(name + ".bias", {std::size_t(cout)}), cin(cin), cout(cout), k(k) {
  if (k % 2 == 0)
    throw std::invalid_argument("kernel size must be odd");
}

Tensor Conv2d::forward(const Tensor& x) {
  const bool is3d = x.ndim() == 3;
  if (!is3d && x.ndim() != 4)
    throw std::invalid_argument("conv input must be (n, c, h, w) or (c, h, w)");
  const int n = is3d ? 1 : int(x.dim(0));
  const int c = int(x.dim(is3d ? 0 : 1));
  const int h = int(x.dim(is3d ? 1 : 2));
  const int w = int(x.dim(is3d ? 2 : 3));
  if (c != cin)
    throw std::invalid_argument("conv '" + weight.name + "': expected " +
                                std::to_string(cin) + " channels, got " +
                                std::to_string(c));
  Tensor y(is3d ? std::vector<std::size_t>{std::size_t(cout), std::size_t(h), std::size_t(w)}
                : std::vector<std::size_t>{std::size_t(n), std::size_t(cout),
                                           std::size_t(h), std::size_t(w)});
  kernels::conv2d_forward(x.data(), weight.value.data(), bias.value.data(),
                          y.data(), n, cin, h, w, cout, k);
  if (training_) {
    x_cache_ = x;
    cached_3d_ = is3d;
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  if (x_cache_.empty())
    throw std::logic_error("conv backward without a cached forward");
  const bool is3d = cached_3d_;
  const int n = is3d ? 1 : int(x_cache_.dim(0));
  const int h = int(x_cache_.dim(is3d ? 1 : 2));
  const int w = int(x_cache_.dim(is3d ? 2 : 3));
  Tensor dx(x_cache_.shape());
  kernels::conv2d_backward_input(dy.data(), weight.value.data(), dx.data(), n,
                                 cin, h, w, cout, k);
  kernels::conv2d_backward_params(x_cache_.data(), dy.data(), weight.grad.data(),
                                  bias.grad.data(), n, cin, h, w, cout, k);
  return dx;
}

Tensor ReLU::forward(const Tensor& x) {
  Tensor y(x.shape());
  if (training_)
    mask_.assign(x.size(), 0);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0) {
      y[i] = x[i];
      if (training_)
        mask_[i] = 1;
    }
  return y;
}

Tensor ReLU::backward(const Tensor& dy) const {
  if (mask_.size() != dy.size())
    throw std::logic_error("relu backward without a cached forward");
  Tensor dx(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i)
    dx[i] = mask_[i] ? dy[i] : 0.0;
  return dx;
}

LayerNorm::LayerNorm(std::string name, int channels, double eps)
    : gamma(name + ".gamma", {std::size_t(channels)}),
      beta(name + ".beta", {std::size_t(channels)}), channels(channels), eps(eps) {
  gamma.value.fill(1.0);
}

Tensor LayerNorm::forward(const Tensor& x) {
  if (x.ndim() != 3 || int(x.dim(0)) != channels)
    throw std::invalid_argument("layernorm expects (c, h, w)");
  const int h = int(x.dim(1)), w = int(x.dim(2));
  Tensor y(x.shape());
  Tensor xhat(x.shape());
  Tensor inv_sigma({std::size_t(h), std::size_t(w)});
  kernels::layernorm_forward(x.data(), gamma.value.data(), beta.value.data(),
                             y.data(), xhat.data(), inv_sigma.data(), channels,
                             h, w, eps);
  if (training_) {
    xhat_ = std::move(xhat);
    inv_sigma_ = std::move(inv_sigma);
  }
  return y;
}

Tensor LayerNorm::backward(const Tensor& dy) {
  if (xhat_.empty())
    throw std::logic_error("layernorm backward without a cached forward");
  const int h = int(dy.dim(1)), w = int(dy.dim(2));
  Tensor dx(dy.shape());
  kernels::layernorm_backward(dy.data(), gamma.value.data(), xhat_.data(),
                              inv_sigma_.data(), dx.data(), gamma.grad.data(),
                              beta.grad.data(), channels, h, w);
  return dx;
}

Tensor PixelShuffle::forward(const Tensor& x) const {
  if (x.ndim() != 3 || x.dim(0) % (std::size_t(r) * r) != 0)
    throw std::invalid_argument("pixel shuffle needs channels divisible by r^2");
  const int c = int(x.dim(0)) / (r * r);
  const int h = int(x.dim(1)), w = int(x.dim(2));
  Tensor y({std::size_t(c), std::size_t(r) * h, std::size_t(r) * w});
  kernels::pixel_shuffle(x.data(), y.data(), c, r, h, w);
  return y;
}

Tensor PixelShuffle::backward(const Tensor& dy) const {
  const int c = int(dy.dim(0));
  const int h = int(dy.dim(1)) / r, w = int(dy.dim(2)) / r;
  Tensor dx({std::size_t(c) * r * r, std::size_t(h), std::size_t(w)});
  kernels::pixel_unshuffle(dy.data(), dx.data(), c, r, h, w);
  return dx;
}

} // namespace canopysr
