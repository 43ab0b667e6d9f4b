#include "canopysr/backbone.hpp"

#include <cstring>
#include <stdexcept>

namespace canopysr {

namespace {

// Channel-axis concat/split for (n, c, h, w) tensors.
Tensor concat_channels(const Tensor& a, const Tensor& b) {
  const std::size_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  const std::size_t plane = a.dim(2) * a.dim(3);
  Tensor out({n, ca + cb, a.dim(2), a.dim(3)});
  for (std::size_t i = 0; i < n; ++i) {
    std::memcpy(out.data() + i * (ca + cb) * plane, a.data() + i * ca * plane,
                ca * plane * sizeof(double));
    std::memcpy(out.data() + (i * (ca + cb) + ca) * plane,
                b.data() + i * cb * plane, cb * plane * sizeof(double));
  }
  return out;
}

Tensor slice_channels(const Tensor& x, std::size_t from, std::size_t count) {
  const std::size_t n = x.dim(0), c = x.dim(1);
  const std::size_t plane = x.dim(2) * x.dim(3);
  Tensor out({n, count, x.dim(2), x.dim(3)});
  for (std::size_t i = 0; i < n; ++i)
    std::memcpy(out.data() + i * count * plane,
                x.data() + (i * c + from) * plane, count * plane * sizeof(double));
  return out;
}

void add_into(Tensor& acc, const Tensor& x) {
  for (std::size_t i = 0; i < acc.size(); ++i)
    acc[i] += x[i];
}

} // namespace

DenseBlock::DenseBlock(const std::string& name, int f1, int growth, int layers)
    : fuse_(name + ".fuse", f1 + layers * growth, f1, 1), f1_(f1), growth_(growth) {
  convs_.reserve(layers);
  relus_.resize(layers);
  for (int l = 0; l < layers; ++l)
    convs_.emplace_back(name + ".conv" + std::to_string(l), f1 + l * growth,
                        growth, 3);
}

void DenseBlock::init(Rng& rng) {
  for (auto& c : convs_)
    init_he(c.weight.value, rng);
  init_he(fuse_.weight.value, rng);
}

Tensor DenseBlock::forward(const Tensor& x) {
  Tensor state = x;
  for (std::size_t l = 0; l < convs_.size(); ++l) {
    Tensor y = relus_[l].forward(convs_[l].forward(state));
    state = concat_channels(state, y);
  }
  Tensor out = fuse_.forward(state);
  add_into(out, x); // local residual
  return out;
}

Tensor DenseBlock::backward(const Tensor& dy) {
  Tensor dstate = fuse_.backward(dy);
  for (std::size_t l = convs_.size(); l-- > 0;) {
    const std::size_t keep = std::size_t(f1_) + l * growth_;
    Tensor dgrow = slice_channels(dstate, keep, growth_);
    Tensor dprev = slice_channels(dstate, 0, keep);
    add_into(dprev, convs_[l].backward(relus_[l].backward(dgrow)));
    dstate = std::move(dprev);
  }
  add_into(dstate, dy); // local residual
  return dstate;
}

void DenseBlock::set_training(bool on) {
  for (auto& c : convs_)
    c.set_training(on);
  for (auto& r : relus_)
    r.set_training(on);
  fuse_.set_training(on);
}

std::vector<Param*> DenseBlock::params() {
  std::vector<Param*> out;
  for (auto& c : convs_)
    for (Param* p : c.params())
      out.push_back(p);
  for (Param* p : fuse_.params())
    out.push_back(p);
  return out;
}

Backbone::Backbone(const ModelConfig& cfg, Rng& rng)
    : sfe1_("backbone.sfe1", cfg.input_channels, cfg.f1, 3),
      sfe2_("backbone.sfe2", cfg.f1, cfg.f1, 3),
      gff_mix_("backbone.gff_mix", cfg.n_blocks * cfg.f1, cfg.f1, 1),
      gff_conv_("backbone.gff_conv", cfg.f1, cfg.f1, 3), f1_(cfg.f1),
      n_blocks_(cfg.n_blocks), layers_per_block_(cfg.layers_per_block) {
  blocks_.reserve(cfg.n_blocks);
  for (int b = 0; b < cfg.n_blocks; ++b)
    blocks_.emplace_back("backbone.block" + std::to_string(b), cfg.f1,
                         cfg.growth, cfg.layers_per_block);
  init_he(sfe1_.weight.value, rng);
  init_he(sfe2_.weight.value, rng);
  for (auto& b : blocks_)
    b.init(rng);
  init_he(gff_mix_.weight.value, rng);
  init_he(gff_conv_.weight.value, rng);
}

Tensor Backbone::forward(const Tensor& x) {
  if (x.ndim() != 4)
    throw std::invalid_argument("backbone expects (t, c, h, w)");
  Tensor s1 = sfe1_.forward(x);
  Tensor state = sfe2_.forward(s1);
  Tensor cat;
  for (auto& b : blocks_) {
    state = b.forward(state);
    cat = cat.empty() ? state : concat_channels(cat, state);
  }
  Tensor out = gff_conv_.forward(gff_mix_.forward(cat));
  add_into(out, s1); // global residual
  return out;
}

Tensor Backbone::backward(const Tensor& dy) {
  Tensor dcat = gff_mix_.backward(gff_conv_.backward(dy));
  Tensor d = slice_channels(dcat, std::size_t(n_blocks_ - 1) * f1_, f1_);
  for (std::size_t b = blocks_.size(); b-- > 0;) {
    d = blocks_[b].backward(d);
    if (b > 0)
      add_into(d, slice_channels(dcat, (b - 1) * f1_, f1_));
  }
  Tensor ds1 = sfe2_.backward(d);
  add_into(ds1, dy); // global residual
  return sfe1_.backward(ds1);
}

void Backbone::set_training(bool on) {
  sfe1_.set_training(on);
  sfe2_.set_training(on);
  for (auto& b : blocks_)
    b.set_training(on);
  gff_mix_.set_training(on);
  gff_conv_.set_training(on);
}

std::vector<Param*> Backbone::params() {
  std::vector<Param*> out;
  for (Param* p : sfe1_.params())
    out.push_back(p);
  for (Param* p : sfe2_.params())
    out.push_back(p);
  for (auto& b : blocks_)
    for (Param* p : b.params())
      out.push_back(p);
  for (Param* p : gff_mix_.params())
    out.push_back(p);
  for (Param* p : gff_conv_.params())
    out.push_back(p);
  return out;
}

} // namespace canopysr
