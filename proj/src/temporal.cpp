#include "canopysr/temporal.hpp"

#include <cmath>
#include <stdexcept>

#include "canopysr/encodings.hpp"
#include "canopysr/kernels.hpp"

namespace canopysr {

namespace {

// Kernel working buffers are fixed-size; see kernels/attention.cpp.
constexpr int kMaxSeries = 64;
constexpr int kMaxDAttn = 64;

void init_projection(Tensor& w, std::size_t fan_in, Rng& rng) {
  const double stddev = std::sqrt(1.0 / double(fan_in));
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = normal(rng, 0.0, stddev);
}

} // namespace

TemporalFusion::TemporalFusion(const ModelConfig& cfg, Rng& rng)
    : wq("temporal.wq", {std::size_t(cfg.heads) * cfg.d_attn, std::size_t(cfg.f1)}),
      wk("temporal.wk",
         {std::size_t(cfg.heads), std::size_t(cfg.d_head()), std::size_t(cfg.d_attn)}),
      wv("temporal.wv",
         {std::size_t(cfg.heads), std::size_t(cfg.d_head()), std::size_t(cfg.d_attn)}),
      mix_("temporal.mix", cfg.heads * cfg.d_attn, cfg.f2, 1),
      norm_("temporal.norm", cfg.f2, cfg.ln_eps), f1_(cfg.f1), heads_(cfg.heads),
      d_attn_(cfg.d_attn), tau_(cfg.tau) {
  if (cfg.d_attn > kMaxDAttn)
    throw std::invalid_argument("d_attn exceeds the attention kernel limit");
  init_projection(wq.value, cfg.f1, rng);
  init_projection(wk.value, cfg.d_head(), rng);
  init_projection(wv.value, cfg.d_head(), rng);
  init_he(mix_.weight.value, rng);
}

Tensor TemporalFusion::forward(const Tensor& feats,
                               const std::vector<double>& offsets,
                               double target_offset,
                               const std::vector<std::uint8_t>& valid) {
  if (feats.ndim() != 4 || int(feats.dim(1)) != f1_)
    throw std::invalid_argument("temporal fusion expects (t, f1, h, w) features");
  const int t = int(feats.dim(0));
  const int h = int(feats.dim(2)), w = int(feats.dim(3));
  if (offsets.size() != std::size_t(t) || valid.size() != std::size_t(t))
    throw std::invalid_argument("offsets/valid length must match the series");
  if (t > kMaxSeries)
    throw std::invalid_argument("series exceeds the attention kernel limit");
  bool any_valid = false;
  for (std::uint8_t v : valid)
    any_valid |= v != 0;
  if (!any_valid)
    throw std::invalid_argument("cannot attend over a fully padded series");

  const std::size_t plane = std::size_t(h) * w;
  Tensor encoded = feats;
  for (int i = 0; i < t; ++i) {
    const std::vector<double> pe = positional_encoding(offsets[i], f1_, tau_);
    for (int c = 0; c < f1_; ++c) {
      double* row = encoded.data() + (std::size_t(i) * f1_ + c) * plane;
      for (std::size_t p = 0; p < plane; ++p)
        row[p] += pe[c];
    }
  }

  target_encoding_ = positional_encoding(target_offset, f1_, tau_);
  query_ = Tensor({std::size_t(heads_), std::size_t(d_attn_)});
  for (std::size_t i = 0; i < query_.size(); ++i) {
    double q = 0.0;
    for (int j = 0; j < f1_; ++j)
      q += wq.value[i * f1_ + j] * target_encoding_[j];
    query_[i] = q;
  }

  Tensor out({std::size_t(heads_) * d_attn_, std::size_t(h), std::size_t(w)});
  attn_ = Tensor({std::size_t(heads_), std::size_t(t), std::size_t(h), std::size_t(w)});
  kernels::attention_forward(encoded.data(), wk.value.data(), wv.value.data(),
                             query_.data(), valid.data(), out.data(),
                             attn_.data(), t, heads_, f1_ / heads_, d_attn_, h, w);
  if (training_) {
    encoded_ = std::move(encoded);
    valid_ = valid;
  }
  return norm_.forward(mix_.forward(out));
}

Tensor TemporalFusion::backward(const Tensor& dy) {
  if (encoded_.empty())
    throw std::logic_error("temporal backward without a cached forward");
  const int t = int(encoded_.dim(0));
  const int h = int(encoded_.dim(2)), w = int(encoded_.dim(3));
  Tensor dout = mix_.backward(norm_.backward(dy));
  Tensor dfeats(encoded_.shape());
  Tensor dquery({std::size_t(heads_), std::size_t(d_attn_)});
  kernels::attention_backward(encoded_.data(), wk.value.data(), wv.value.data(),
                              query_.data(), valid_.data(), attn_.data(),
                              dout.data(), dfeats.data(), wk.grad.data(),
                              wv.grad.data(), dquery.data(), t, heads_,
                              f1_ / heads_, d_attn_, h, w);
  // Query is wq * e for the target-date encoding e, so dwq = dquery (x) e.
  for (std::size_t i = 0; i < dquery.size(); ++i)
    for (int j = 0; j < f1_; ++j)
      wq.grad[i * f1_ + j] += dquery[i] * target_encoding_[j];
  // The date encoding enters additively, so dfeats already matches the raw
  // feature gradient.
  return dfeats;
}

void TemporalFusion::set_training(bool on) {
  training_ = on;
  mix_.set_training(on);
  norm_.set_training(on);
}

std::vector<Param*> TemporalFusion::params() {
  std::vector<Param*> out{&wq, &wk, &wv};
  for (Param* p : mix_.params())
    out.push_back(p);
  for (Param* p : norm_.params())
    out.push_back(p);
  return out;
}

} // namespace canopysr
