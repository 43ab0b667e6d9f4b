#include "canopysr/srhead.hpp"

namespace canopysr {

SRHead::SRHead(const ModelConfig& cfg, Rng& rng) : factor_(cfg.factor) {
  int stages = 0;
  for (int r = factor_; r > 1; r /= 2)
    ++stages;
  convs_.reserve(stages);
  for (int s = 0; s < stages; ++s) {
    convs_.emplace_back("srhead.up" + std::to_string(s), cfg.f2, 4 * cfg.f2, 3);
    // The first stage sees the coarse grid, so plain group replication is
    // enough for block-constant output. Later stages convolve the already
    // upsampled grid, where off-center taps reach across block borders; their
    // base kernels keep only the center tap.
    if (s == 0)
      init_subpixel(convs_.back().weight.value, 2, cfg.init_noise, rng);
    else
      init_subpixel_delta(convs_.back().weight.value, 2, cfg.init_noise, rng);
  }
  if (factor_ > 1) {
    final_.emplace_back("srhead.final", cfg.f2, cfg.f2, 3);
    init_delta(final_.back().weight.value, cfg.init_noise, rng);
  }
}

Tensor SRHead::forward(const Tensor& x) {
  if (factor_ == 1)
    return x;
  Tensor y = x;
  for (auto& conv : convs_)
    y = shuffle_.forward(conv.forward(y));
  return relu_.forward(final_.front().forward(y));
}

Tensor SRHead::backward(const Tensor& dy) {
  if (factor_ == 1)
    return dy;
  Tensor d = final_.front().backward(relu_.backward(dy));
  for (std::size_t s = convs_.size(); s-- > 0;)
    d = convs_[s].backward(shuffle_.backward(d));
  return d;
}

void SRHead::set_training(bool on) {
  for (auto& c : convs_)
    c.set_training(on);
  for (auto& c : final_)
    c.set_training(on);
  relu_.set_training(on);
}

std::vector<Param*> SRHead::params() {
  std::vector<Param*> out;
  for (auto& c : convs_)
    for (Param* p : c.params())
      out.push_back(p);
  for (auto& c : final_)
    for (Param* p : c.params())
      out.push_back(p);
  return out;
}

MlpHead::MlpHead(const ModelConfig& cfg, Rng& rng)
    : fc1_("mlp.fc1", cfg.f2, cfg.mlp_hidden1, 1),
      fc2_("mlp.fc2", cfg.mlp_hidden1, cfg.mlp_hidden2, 1),
      fc3_("mlp.fc3", cfg.mlp_hidden2, 1, 1) {
  init_he(fc1_.weight.value, rng);
  init_he(fc2_.weight.value, rng);
  init_he(fc3_.weight.value, rng);
}

Tensor MlpHead::forward(const Tensor& x) {
  Tensor y = relu1_.forward(fc1_.forward(x));
  y = relu2_.forward(fc2_.forward(y));
  return fc3_.forward(y);
}

Tensor MlpHead::backward(const Tensor& dy) {
  Tensor d = fc3_.backward(dy);
  d = fc2_.backward(relu2_.backward(d));
  return fc1_.backward(relu1_.backward(d));
}

void MlpHead::set_training(bool on) {
  fc1_.set_training(on);
  fc2_.set_training(on);
  fc3_.set_training(on);
  relu1_.set_training(on);
  relu2_.set_training(on);
}

std::vector<Param*> MlpHead::params() {
  std::vector<Param*> out;
  for (Conv2d* c : {&fc1_, &fc2_, &fc3_})
    for (Param* p : c->params())
      out.push_back(p);
  return out;
}

} // namespace canopysr
