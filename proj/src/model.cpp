#include "canopysr/model.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "canopysr/errors.hpp"

namespace canopysr {

nlohmann::json model_config_to_json(const ModelConfig& cfg) {
  return {{"input_channels", cfg.input_channels},
          {"f1", cfg.f1},
          {"growth", cfg.growth},
          {"n_blocks", cfg.n_blocks},
          {"layers_per_block", cfg.layers_per_block},
          {"heads", cfg.heads},
          {"d_attn", cfg.d_attn},
          {"f2", cfg.f2},
          {"factor", cfg.factor},
          {"mlp_hidden1", cfg.mlp_hidden1},
          {"mlp_hidden2", cfg.mlp_hidden2},
          {"tau", cfg.tau},
          {"init_noise", cfg.init_noise},
          {"ln_eps", cfg.ln_eps}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw ConfigError("model config must be an object");
  ModelConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const nlohmann::json& v = it.value();
    if (k == "input_channels") cfg.input_channels = v.get<int>();
    else if (k == "f1") cfg.f1 = v.get<int>();
    else if (k == "growth") cfg.growth = v.get<int>();
    else if (k == "n_blocks") cfg.n_blocks = v.get<int>();
    else if (k == "layers_per_block") cfg.layers_per_block = v.get<int>();
    else if (k == "heads") cfg.heads = v.get<int>();
    else if (k == "d_attn") cfg.d_attn = v.get<int>();
    else if (k == "f2") cfg.f2 = v.get<int>();
    else if (k == "factor") cfg.factor = v.get<int>();
    else if (k == "mlp_hidden1") cfg.mlp_hidden1 = v.get<int>();
    else if (k == "mlp_hidden2") cfg.mlp_hidden2 = v.get<int>();
    else if (k == "tau") cfg.tau = v.get<double>();
    else if (k == "init_noise") cfg.init_noise = v.get<double>();
    else if (k == "ln_eps") cfg.ln_eps = v.get<double>();
    else throw ConfigError("unknown model config key: " + k);
  }
  return cfg;
}

namespace {

ModelConfig validated(ModelConfig cfg) {
  cfg.validate();
  return cfg;
}

} // namespace

Model::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(validated(cfg)) {
  Rng rng = make_rng(seed);
  backbone_.emplace(cfg_, rng);
  temporal_.emplace(cfg_, rng);
  srhead_.emplace(cfg_, rng);
  mlp_.emplace(cfg_, rng);
}

Tensor Model::forward(const Tensor& x, const std::vector<double>& offsets,
                      double target_offset,
                      const std::vector<std::uint8_t>& valid) {
  if (x.ndim() != 4 || int(x.dim(1)) != cfg_.input_channels)
    throw std::invalid_argument("model expects (t, input_channels, h, w)");
  const std::size_t t = x.dim(0);
  if (offsets.size() != t || valid.size() != t)
    throw std::invalid_argument("offsets/valid length must match the series");
  kept_.clear();
  for (std::size_t i = 0; i < t; ++i)
    if (valid[i])
      kept_.push_back(int(i));
  if (kept_.empty())
    throw std::invalid_argument("every timestep of the series is padding");
  in_shape_ = x.shape();

  const std::size_t row = x.dim(1) * x.dim(2) * x.dim(3);
  Tensor xt({kept_.size(), x.dim(1), x.dim(2), x.dim(3)});
  std::vector<double> kept_offsets(kept_.size());
  for (std::size_t i = 0; i < kept_.size(); ++i) {
    std::memcpy(xt.data() + i * row, x.data() + std::size_t(kept_[i]) * row,
                row * sizeof(double));
    kept_offsets[i] = offsets[std::size_t(kept_[i])];
  }
  const std::vector<std::uint8_t> all_valid(kept_.size(), 1);

  Tensor fused = temporal_->forward(backbone_->forward(xt), kept_offsets,
                                    target_offset, all_valid);
  Tensor pred = mlp_->forward(srhead_->forward(fused));
  pred.reshape({pred.dim(1), pred.dim(2)});
  return pred;
}

Tensor Model::backward(const Tensor& dpred) {
  if (in_shape_.empty())
    throw std::logic_error("model backward without a cached forward");
  Tensor d = dpred;
  d.reshape({1, dpred.dim(0), dpred.dim(1)});
  Tensor dxt = backbone_->backward(
      temporal_->backward(srhead_->backward(mlp_->backward(d))));
  Tensor dx(in_shape_);
  const std::size_t row = in_shape_[1] * in_shape_[2] * in_shape_[3];
  for (std::size_t i = 0; i < kept_.size(); ++i)
    std::memcpy(dx.data() + std::size_t(kept_[i]) * row, dxt.data() + i * row,
                row * sizeof(double));
  return dx;
}

void Model::set_training(bool on) {
  backbone_->set_training(on);
  temporal_->set_training(on);
  srhead_->set_training(on);
  mlp_->set_training(on);
}

std::vector<Param*> Model::params() {
  std::vector<Param*> out;
  for (Param* p : backbone_->params())
    out.push_back(p);
  for (Param* p : temporal_->params())
    out.push_back(p);
  for (Param* p : srhead_->params())
    out.push_back(p);
  for (Param* p : mlp_->params())
    out.push_back(p);
  return out;
}

void Model::zero_grad() {
  for (Param* p : params())
    p->zero_grad();
}

std::size_t Model::param_count() {
  std::size_t n = 0;
  for (Param* p : params())
    n += p->value.size();
  return n;
}

int Model::receptive_radius() const {
  int radius = backbone_->receptive_radius();
  if (cfg_.factor > 1) {
    int stages = 0;
    for (int r = cfg_.factor; r > 1; r /= 2)
      ++stages;
    radius += stages + 1; // one 3x3 conv per stage plus the final conv
  }
  return radius;
}

void Model::write_params(Container& c) {
  for (Param* p : params())
    c.add_f64(p->name, p->value);
}

void Model::read_params(const Container& c) {
  for (Param* p : params()) {
    Tensor v = c.get_f64(p->name);
    if (!v.same_shape(p->value))
      throw ParseError(p->name, "checkpoint parameter shape mismatch");
    p->value = std::move(v);
  }
}

void save_checkpoint(Model& model, const std::string& path,
                     const nlohmann::json& extra_meta,
                     const Container* extra_arrays) {
  Container c;
  c.kind = "checkpoint";
  c.meta["format"] = kCheckpointVersion;
  c.meta["model"] = model_config_to_json(model.config());
  if (extra_meta.is_object())
    for (auto it = extra_meta.begin(); it != extra_meta.end(); ++it)
      c.meta[it.key()] = it.value();
  model.write_params(c);
  if (extra_arrays)
    for (const NamedArray& a : extra_arrays->arrays()) {
      if (a.dtype != "f8")
        throw std::invalid_argument("extra checkpoint arrays must be f8");
      c.add_f64(a.name, reinterpret_cast<const double*>(a.raw.data()), a.shape);
    }
  c.write(path);
}

Model load_checkpoint(const std::string& path, Container* raw) {
  Container c = Container::read(path);
  if (c.kind != "checkpoint")
    throw ParseError("kind", "expected a checkpoint container, got '" + c.kind + "'");
  if (!c.meta.contains("format") || c.meta["format"].get<int>() != kCheckpointVersion)
    throw ParseError("format", "unsupported checkpoint version");
  Model model(model_config_from_json(c.meta.at("model")), 0);
  model.read_params(c);
  if (raw)
    *raw = std::move(c);
  return model;
}

} // namespace canopysr
