// Run configuration: one JSON tree covering model, loss, training, data and
// evaluation. Parsing is strict (unknown keys are ConfigError) and the
// resolved tree echoes back into the run directory as a valid input config.
#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "canopysr/losses.hpp"
#include "canopysr/modelcfg.hpp"
#include "canopysr/sampler.hpp"
#include "canopysr/synth.hpp"

namespace canopysr {

struct TrainConfig {
  int batch_size = 32;
  int accum_steps = 4; // effective batch = batch_size * accum_steps
  double lr = 1e-3;
  double restart_decay = 0.25;
  int cycle_epochs = 10;
  int cycle_mult = 1;
  double lr_min = 0.0;
  int max_epochs = 100;
  std::int64_t max_steps = 0; // optimizer steps; 0 = epochs decide
  int patience = 10;          // early stopping on validation MAE; 0 = off
  std::int64_t checkpoint_every = 0; // extra step checkpoints; 0 = off
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0; // L2 term added to the gradient
  std::uint64_t seed = 1;
};

struct DataConfig {
  double resolution = 2.5; // meters; selects the model preset
  SamplerConfig sampler;
  int windows_per_patch = 1; // training samples drawn per patch per epoch
  SynthConfig synth;
};

struct EvalConfig {
  int fap_bins = 32;
};

struct RunConfig {
  ModelConfig model;
  LossConfig loss;
  TrainConfig train;
  DataConfig data;
  EvalConfig eval;

  // Preset for a target resolution; the synth factor follows the model's
  // upsampling factor so generated references match.
  static RunConfig defaults(double resolution);
  void validate() const;
};

nlohmann::json run_config_to_json(const RunConfig& cfg);
// Starts from the defaults selected by data.resolution (2.5 m when absent)
// and overlays the given keys. Unknown keys anywhere raise ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
// File front ends; the loader accepts // and /* */ comments.
RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);

} // namespace canopysr
