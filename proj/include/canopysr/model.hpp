// Full network: shared backbone over the series, date-queried temporal
// fusion, sub-pixel upsampling, per-pixel regression. One sample in, one
// height map out; batching is the trainer's loop.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "canopysr/backbone.hpp"
#include "canopysr/container.hpp"
#include "canopysr/modelcfg.hpp"
#include "canopysr/srhead.hpp"
#include "canopysr/temporal.hpp"

namespace canopysr {

nlohmann::json model_config_to_json(const ModelConfig& cfg);
// Missing keys keep their defaults; unknown keys raise ConfigError.
ModelConfig model_config_from_json(const nlohmann::json& j);

class Model {
public:
  Model(const ModelConfig& cfg, std::uint64_t seed);

  // x: (t, input_channels, h, w). Padded timesteps (valid = 0) are dropped
  // before any compute, so padding cannot leak into the output.
  // Returns the (factor*h, factor*w) height map.
  Tensor forward(const Tensor& x, const std::vector<double>& offsets,
                 double target_offset, const std::vector<std::uint8_t>& valid);
  // Returns the input gradient, (t, input_channels, h, w); zero rows for
  // padded timesteps.
  Tensor backward(const Tensor& dpred);

  void set_training(bool on);
  std::vector<Param*> params();
  void zero_grad();
  std::size_t param_count();

  const ModelConfig& config() const { return cfg_; }
  // Attention of the last forward, (heads, t_kept, h, w), plus which input
  // timesteps the rows correspond to.
  const Tensor& attention() const { return temporal_->attention(); }
  const std::vector<int>& kept_timesteps() const { return kept_; }

  // Input pixels per side one output pixel can depend on; the inference
  // tiler uses this as its default overlap.
  int receptive_radius() const;

  void write_params(Container& c);
  void read_params(const Container& c); // ParseError on missing/mismatched

private:
  ModelConfig cfg_;
  // Deferred so all four parts can draw from one seeded init stream in a
  // fixed order; always engaged after construction.
  std::optional<Backbone> backbone_;
  std::optional<TemporalFusion> temporal_;
  std::optional<SRHead> srhead_;
  std::optional<MlpHead> mlp_;
  std::vector<int> kept_;
  std::vector<std::size_t> in_shape_;
};

// Checkpoint files: container kind "checkpoint", format version + model
// config in meta, one array per parameter. `extra` lets the trainer attach
// optimizer/scheduler state through the same container.
inline constexpr int kCheckpointVersion = 1;
void save_checkpoint(Model& model, const std::string& path,
                     const nlohmann::json& extra_meta = {},
                     const Container* extra_arrays = nullptr);
Model load_checkpoint(const std::string& path, Container* raw = nullptr);

} // namespace canopysr
