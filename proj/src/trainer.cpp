#include "canopysr/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "canopysr/errors.hpp"
#include "canopysr/losses.hpp"

namespace canopysr {

namespace fs = std::filesystem;

double lr_schedule(std::int64_t step, std::int64_t cycle_len, int cycle_mult,
                   double lr0, double decay, double lr_min) {
  if (cycle_len < 1)
    throw std::invalid_argument("cycle_len must be positive");
  if (cycle_mult < 1)
    throw std::invalid_argument("cycle_mult must be at least 1");
  if (step < 0)
    throw std::invalid_argument("schedule step must be non-negative");
  std::int64_t s = step, len = cycle_len;
  int k = 0;
  while (s >= len) {
    s -= len;
    ++k;
    len *= cycle_mult;
  }
  // Late cycles can decay below the floor; the floor wins.
  const double peak = std::max(lr_min, lr0 * std::pow(decay, double(k)));
  return lr_min +
         (peak - lr_min) * (1.0 + std::cos(M_PI * double(s) / double(len))) / 2.0;
}

Adam::Adam(std::vector<Param*> params, const TrainConfig& cfg)
    : params_(std::move(params)),
      beta1_(cfg.beta1),
      beta2_(cfg.beta2),
      eps_(cfg.adam_eps),
      weight_decay_(cfg.weight_decay) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Param* p : params_) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void Adam::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, double(t_));
  const double c2 = 1.0 - std::pow(beta2_, double(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param& p = *params_[i];
    double* w = p.value.data();
    const double* g = p.grad.data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    const std::size_t n = p.value.size();
    for (std::size_t j = 0; j < n; ++j) {
      const double grad = g[j] + weight_decay_ * w[j];
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * grad;
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * grad * grad;
      w[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
    }
  }
}

void Adam::save(Container& c) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    c.add_f64("adam.m." + params_[i]->name, m_[i]);
    c.add_f64("adam.v." + params_[i]->name, v_[i]);
  }
  c.meta["adam_t"] = t_;
}

void Adam::load(const Container& c) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor m = c.get_f64("adam.m." + params_[i]->name);
    Tensor v = c.get_f64("adam.v." + params_[i]->name);
    if (!m.same_shape(m_[i]) || !v.same_shape(v_[i]))
      throw ParseError("adam." + params_[i]->name, "moment shape mismatch");
    m_[i] = std::move(m);
    v_[i] = std::move(v);
  }
  if (!c.meta.contains("adam_t"))
    throw ParseError("adam_t", "missing optimizer step count");
  t_ = c.meta.at("adam_t").get<std::int64_t>();
}

namespace {

std::string resolve(const std::string& dir, const std::string& entry) {
  fs::path p(entry);
  return p.is_absolute() ? entry : (fs::path(dir) / p).string();
}

Tensor slice_input(const PaddedBatch& pb, std::size_t b) {
  const auto& s = pb.inputs.shape(); // (B, T, C, H, W)
  Tensor x({s[1], s[2], s[3], s[4]});
  std::copy_n(pb.inputs.data() + b * x.size(), x.size(), x.data());
  return x;
}

Tensor slice_target(const PaddedBatch& pb, std::size_t b) {
  const auto& s = pb.targets.shape(); // (B, H, W)
  Tensor t({s[1], s[2]});
  std::copy_n(pb.targets.data() + b * t.size(), t.size(), t.data());
  return t;
}

// The model predicts over the margin ring too; supervision covers only the
// core, so the loss sees a crop and the margin gradient stays zero.
Tensor crop_core(const Tensor& full, std::size_t m) {
  const std::size_t h = full.dim(0), w = full.dim(1);
  Tensor out({h - 2 * m, w - 2 * m});
  for (std::size_t i = 0; i < h - 2 * m; ++i)
    std::copy_n(full.data() + (i + m) * w + m, w - 2 * m,
                out.data() + i * (w - 2 * m));
  return out;
}

void scatter_core(const Tensor& core, std::size_t m, Tensor& full) {
  const std::size_t w = full.dim(1), cw = core.dim(1);
  for (std::size_t i = 0; i < core.dim(0); ++i)
    std::copy_n(core.data() + i * cw, cw, full.data() + (i + m) * w + m);
}

} // namespace

Trainer::Trainer(const RunConfig& cfg, const std::string& data_dir,
                 const std::string& out_dir)
    : cfg_(cfg),
      out_dir_(out_dir),
      data_rng_(make_rng(cfg.train.seed + 1)),
      best_val_(std::numeric_limits<double>::infinity()) {
  cfg_.validate();

  std::vector<std::string> train_paths;
  for (const ManifestEntry& e :
       read_manifest((fs::path(data_dir) / "manifest.txt").string())) {
    const std::string path = resolve(data_dir, e.path);
    if (e.split == "train") {
      train_paths.push_back(path);
      train_.push_back(load_patch(path));
    } else if (e.split == "val") {
      val_.push_back(load_patch(path));
    }
  }
  if (train_.empty())
    throw ConfigError("dataset has no training patches");
  stats_ = compute_channel_stats(train_paths);

  model_.emplace(cfg_.model, cfg_.train.seed);
  model_->set_training(true);
  adam_.emplace(model_->params(), cfg_.train);

  const std::int64_t per_epoch =
      std::int64_t(train_.size()) * cfg_.data.windows_per_patch;
  const std::int64_t effective =
      std::int64_t(cfg_.train.batch_size) * cfg_.train.accum_steps;
  steps_per_epoch_ = std::max<std::int64_t>(1, per_epoch / effective);
  cycle_len_ = std::max<std::int64_t>(1, cfg_.train.cycle_epochs * steps_per_epoch_);

  fs::create_directories(fs::path(out_dir_) / "checkpoints");
  fs::create_directories(fs::path(out_dir_) / "logs");
  save_run_config(cfg_, (fs::path(out_dir_) / "config.json").string());
  log_.open((fs::path(out_dir_) / "logs" / "train.jsonl").string(), std::ios::app);
}

int Trainer::next_pool_index() {
  if (pool_pos_ >= pool_.size()) {
    pool_.clear();
    for (std::size_t i = 0; i < train_.size(); ++i)
      for (int w = 0; w < cfg_.data.windows_per_patch; ++w)
        pool_.push_back(int(i));
    std::shuffle(pool_.begin(), pool_.end(), data_rng_);
    pool_pos_ = 0;
  }
  return pool_[pool_pos_++];
}

Trainer::Drawn Trainer::draw() {
  Drawn d;
  d.patch = next_pool_index();
  const PatchFile& p = train_[std::size_t(d.patch)];
  d.timesteps = sample_timesteps(p.sits.valid_length, cfg_.data.sampler, data_rng_);
  d.at = place_window(p, cfg_.data.sampler, /*centered=*/false, &data_rng_);
  return d;
}

WindowSample Trainer::materialize(const Drawn& d, bool standardized) {
  WindowSample ws = extract_window(train_[std::size_t(d.patch)], d.timesteps,
                                   d.at, cfg_.data.sampler);
  if (standardized)
    standardize(ws.input, stats_);
  return ws;
}

void Trainer::optimizer_step() {
  const auto started = std::chrono::steady_clock::now();
  const int batch = cfg_.train.batch_size;
  const int accum = cfg_.train.accum_steps;
  const std::size_t effective = std::size_t(batch) * std::size_t(accum);
  const int out = cfg_.data.sampler.window * cfg_.model.factor;

  // The patch-balance denominators span the whole effective batch, so the
  // windows are drawn (and their masks read) before any gradient work.
  std::vector<Drawn> drawn;
  std::vector<std::uint8_t> valid_all;
  BatchCounts counts;
  for (int attempt = 0;; ++attempt) {
    drawn.clear();
    valid_all.clear();
    drawn.reserve(effective);
    valid_all.reserve(effective * std::size_t(out) * std::size_t(out));
    for (std::size_t i = 0; i < effective; ++i) {
      drawn.push_back(draw());
      WindowSample ws = materialize(drawn.back(), /*standardized=*/false);
      valid_all.insert(valid_all.end(), ws.target_valid.begin(),
                       ws.target_valid.end());
    }
    counts = count_loss_patches(valid_all, int(effective), out, out);
    if (counts.mae_patches > 0 || counts.wgdl_patches > 0)
      break;
    if (attempt >= 100)
      throw std::runtime_error(
          "100 consecutive batches with every pixel masked; check the data");
    log_line({{"step", step_}, {"skipped", "all pixels masked"}});
  }

  model_->zero_grad();
  LossValue sum;
  std::size_t i = 0;
  for (int m = 0; m < accum; ++m) {
    std::vector<WindowSample> micro;
    micro.reserve(std::size_t(batch));
    for (int b = 0; b < batch; ++b)
      micro.push_back(materialize(drawn[i++], /*standardized=*/true));
    const PaddedBatch pb = pad_series(micro);
    const std::size_t target_px = std::size_t(out) * std::size_t(out);
    const std::size_t crop =
        std::size_t(cfg_.model.factor) * std::size_t(cfg_.data.sampler.margin);
    for (int b = 0; b < batch; ++b) {
      const Tensor x = slice_input(pb, std::size_t(b));
      Tensor full = model_->forward(x, pb.offsets[std::size_t(b)],
                                    pb.target_offsets[std::size_t(b)],
                                    pb.valid[std::size_t(b)]);
      const Tensor pred = crop_core(full, crop);
      Tensor dcore(pred.shape());
      const LossValue lv =
          sample_loss(pred, slice_target(pb, std::size_t(b)),
                      pb.target_valid.data() + std::size_t(b) * target_px,
                      cfg_.loss, counts, &dcore);
      if (!std::isfinite(lv.total)) {
        save_state((fs::path(out_dir_) / "checkpoints" / "diagnostic.ckpt").string());
        throw std::runtime_error(
            "non-finite loss at step " + std::to_string(step_) +
            "; diagnostic checkpoint written under " + out_dir_);
      }
      sum.total += lv.total;
      sum.height += lv.height;
      sum.wgdl += lv.wgdl;
      Tensor dfull(full.shape());
      scatter_core(dcore, crop, dfull);
      model_->backward(dfull);
    }
  }

  const double lr = lr_schedule(step_, cycle_len_, cfg_.train.cycle_mult,
                                cfg_.train.lr, cfg_.train.restart_decay,
                                cfg_.train.lr_min);
  adam_->step(lr);
  ++step_;

  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - started)
                        .count();
  log_line({{"step", step_},
            {"epoch", step_ / steps_per_epoch_},
            {"lr", lr},
            {"loss", sum.total},
            {"height", sum.height},
            {"wgdl", sum.wgdl},
            {"ms", ms}});

  if (cfg_.train.checkpoint_every > 0 && step_ % cfg_.train.checkpoint_every == 0)
    save_state((fs::path(out_dir_) / "checkpoints" /
                ("step_" + std::to_string(step_) + ".ckpt"))
                   .string());
}

ValStats Trainer::split_stats(const std::vector<PatchFile>& patches) {
  if (patches.empty())
    throw std::invalid_argument("cannot evaluate an empty split");
  SamplerConfig scfg = cfg_.data.sampler;
  scfg.strategy = SampleStrategy::equal_range;
  const std::size_t out =
      std::size_t(scfg.window) * std::size_t(cfg_.model.factor);

  model_->set_training(false);
  Tensor preds({patches.size(), out, out});
  Tensor targets({patches.size(), out, out});
  std::vector<std::uint8_t> valid;
  valid.reserve(patches.size() * out * out);
  double abs_err = 0.0;
  std::size_t n_valid = 0;
  Rng unused = make_rng(0); // equal_range never consumes randomness
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const PatchFile& p = patches[i];
    const std::vector<int> steps = sample_timesteps(p.sits.valid_length, scfg, unused);
    const WindowPlacement at = place_window(p, scfg, /*centered=*/true, nullptr);
    WindowSample ws = extract_window(p, steps, at, scfg);
    standardize(ws.input, stats_);
    const std::vector<std::uint8_t> all_valid(steps.size(), 1);
    const Tensor pred = crop_core(
        model_->forward(ws.input, ws.offsets, ws.target_offset, all_valid),
        std::size_t(cfg_.model.factor) * std::size_t(scfg.margin));
    std::copy_n(pred.data(), pred.size(), preds.data() + i * out * out);
    std::copy_n(ws.target.data(), ws.target.size(),
                targets.data() + i * out * out);
    valid.insert(valid.end(), ws.target_valid.begin(), ws.target_valid.end());
    for (std::size_t j = 0; j < ws.target_valid.size(); ++j)
      if (ws.target_valid[j]) {
        abs_err += std::abs(pred.data()[j] - ws.target.data()[j]);
        ++n_valid;
      }
  }
  model_->set_training(true);

  ValStats stats;
  stats.loss = total_loss(preds, targets, valid, cfg_.loss);
  stats.mae = n_valid ? abs_err / double(n_valid)
                      : std::numeric_limits<double>::quiet_NaN();
  stats.n_pixels = n_valid;
  return stats;
}

ValStats Trainer::validate() { return split_stats(val_); }
ValStats Trainer::train_stats() { return split_stats(train_); }

TrainResult Trainer::run() {
  const std::int64_t max_steps = cfg_.train.max_steps;
  const auto out_of_steps = [&] { return max_steps > 0 && step_ >= max_steps; };
  bool stop = false;
  while (!stop && !out_of_steps() &&
         step_ / steps_per_epoch_ < cfg_.train.max_epochs) {
    const std::int64_t epoch_end =
        (step_ / steps_per_epoch_ + 1) * steps_per_epoch_;
    while (step_ < epoch_end && !out_of_steps())
      optimizer_step();

    if (!val_.empty()) {
      const ValStats v = validate();
      log_line({{"step", step_},
                {"epoch", step_ / steps_per_epoch_},
                {"val_mae", v.mae},
                {"val_loss", v.loss.total},
                {"val_height", v.loss.height},
                {"val_wgdl", v.loss.wgdl}});
      if (v.mae < best_val_) {
        best_val_ = v.mae;
        bad_epochs_ = 0;
        save_state((fs::path(out_dir_) / "checkpoints" / "best.ckpt").string());
      } else if (++bad_epochs_ >= cfg_.train.patience && cfg_.train.patience > 0) {
        stop = true;
      }
    }
    save_state((fs::path(out_dir_) / "checkpoints" / "last.ckpt").string());
  }
  return {step_, int(step_ / steps_per_epoch_), best_val_};
}

void Trainer::save_state(const std::string& path) {
  Container extra;
  extra.kind = "state";
  adam_->save(extra);
  extra.add_f64("stats.mean", stats_.mean.data(), {kSpectralBands});
  extra.add_f64("stats.stddev", stats_.stddev.data(), {kSpectralBands});
  nlohmann::json meta = extra.meta;
  meta["run_config"] = run_config_to_json(cfg_);
  meta["step"] = step_;
  std::ostringstream rng_text;
  rng_text << data_rng_;
  meta["rng"] = rng_text.str();
  meta["pool"] = pool_;
  meta["pool_pos"] = pool_pos_;
  if (std::isfinite(best_val_))
    meta["best_val"] = best_val_;
  meta["bad_epochs"] = bad_epochs_;
  save_checkpoint(*model_, path, meta, &extra);
}

void Trainer::resume(const std::string& checkpoint_path) {
  Container raw;
  (void)load_checkpoint(checkpoint_path, &raw); // validates kind and version
  if (raw.meta.at("model") != model_config_to_json(cfg_.model))
    throw ConfigError("checkpoint was written with a different model config");
  model_->read_params(raw);
  adam_->load(raw);
  const nlohmann::json& m = raw.meta;
  step_ = m.at("step").get<std::int64_t>();
  std::istringstream rng_text(m.at("rng").get<std::string>());
  rng_text >> data_rng_;
  pool_ = m.at("pool").get<std::vector<int>>();
  pool_pos_ = m.at("pool_pos").get<std::size_t>();
  best_val_ = m.contains("best_val")
                  ? m.at("best_val").get<double>()
                  : std::numeric_limits<double>::infinity();
  bad_epochs_ = m.at("bad_epochs").get<int>();
}

void Trainer::log_line(const nlohmann::json& record) {
  log_ << record.dump() << "\n";
  log_.flush();
}

} // namespace canopysr
