// Optimization loop: Adam with gradient accumulation, cosine annealing with
// warm restarts, per-step JSONL logging, checkpoint/resume, early stopping.
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "canopysr/config.hpp"
#include "canopysr/container.hpp"
#include "canopysr/model.hpp"
#include "canopysr/sampler.hpp"

namespace canopysr {

// Cosine annealing with warm restarts. Cycle k spans cycle_len * mult^k
// optimizer steps and peaks at lr0 * decay^k; within a cycle at position s,
// lr = lr_min + (peak - lr_min) * (1 + cos(pi * s/len_k)) / 2.
// Step 0 therefore returns exactly lr0 and each restart exactly its peak.
double lr_schedule(std::int64_t step, std::int64_t cycle_len, int cycle_mult,
                   double lr0, double decay, double lr_min);

// Adam over a parameter list. Gradients are consumed as-is (the training
// loop accumulates already-averaged per-sample contributions), so no extra
// scaling happens here. Moments serialize into checkpoint containers as
// adam.m.<param> / adam.v.<param> plus an adam_t meta entry.
class Adam {
public:
  Adam(std::vector<Param*> params, const TrainConfig& cfg);

  void step(double lr); // one update from current grads; does not zero them
  std::int64_t steps() const { return t_; }

  void save(Container& c) const;
  void load(const Container& c); // ParseError on missing/mismatched state

private:
  std::vector<Param*> params_;
  std::vector<Tensor> m_, v_;
  double beta1_, beta2_, eps_, weight_decay_;
  std::int64_t t_ = 0;
};

struct ValStats {
  LossValue loss;
  double mae = 0.0; // pooled over every valid pixel of the split
  std::size_t n_pixels = 0;
};

struct TrainResult {
  std::int64_t steps = 0;
  int epochs = 0;
  double best_val_mae = 0.0;
};

// Owns one model + optimizer and a run directory. Epochs walk a shuffled
// pool holding each training patch windows_per_patch times; every optimizer
// step draws batch*accum windows, computes the patch-balance counts over
// that whole effective batch, then streams micro-batches through the padded
// batch path so each sample's gradient lands pre-averaged. The parameter
// update is therefore identical for any accum split of the same windows.
//
// Run directory layout: config.json (echo), checkpoints/{best,last,step_N}.ckpt,
// logs/train.jsonl (one record per optimizer step plus one per validation).
class Trainer {
public:
  Trainer(const RunConfig& cfg, const std::string& data_dir,
          const std::string& out_dir);

  // Restores weights, optimizer moments, schedule position, RNG and epoch
  // pool; a resumed deterministic run continues bit-compatibly.
  void resume(const std::string& checkpoint_path);

  TrainResult run();
  void optimizer_step(); // exposed for step-level tests

  // Deterministic split evaluation: equal_range timesteps, centered windows.
  ValStats validate();
  ValStats train_stats();

  Model& model() { return *model_; }
  const ChannelStats& stats() const { return stats_; }
  std::int64_t global_step() const { return step_; }
  std::int64_t steps_per_epoch() const { return steps_per_epoch_; }
  std::size_t train_size() const { return train_.size(); }

private:
  struct Drawn {
    int patch = 0;
    std::vector<int> timesteps;
    WindowPlacement at;
  };

  int next_pool_index();
  Drawn draw();
  WindowSample materialize(const Drawn& d, bool standardized);
  ValStats split_stats(const std::vector<PatchFile>& patches);
  void save_state(const std::string& path);
  void log_line(const nlohmann::json& record);

  RunConfig cfg_;
  std::string out_dir_;
  std::vector<PatchFile> train_, val_;
  ChannelStats stats_;
  std::optional<Model> model_;
  std::optional<Adam> adam_;
  Rng data_rng_;
  std::vector<int> pool_;
  std::size_t pool_pos_ = 0;
  std::int64_t steps_per_epoch_ = 0;
  std::int64_t cycle_len_ = 0;
  std::int64_t step_ = 0;
  double best_val_ = 0.0;
  int bad_epochs_ = 0;
  std::ofstream log_;
};

} // namespace canopysr
