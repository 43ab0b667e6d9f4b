#include "canopysr/config.hpp"

#include <fstream>

#include "canopysr/errors.hpp"
#include "canopysr/model.hpp"

namespace canopysr {

RunConfig RunConfig::defaults(double resolution) {
  RunConfig cfg;
  cfg.model = ModelConfig::for_resolution(resolution);
  cfg.data.resolution = resolution;
  cfg.data.synth.factor = cfg.model.factor;
  return cfg;
}

void RunConfig::validate() const {
  model.validate();
  if (loss.w_height < 0 || loss.w_wgdl < 0)
    throw ConfigError("loss weights must be non-negative");
  if (loss.lambda_min < 0 || loss.lambda_min > 1)
    throw ConfigError("lambda_min must lie in [0, 1]");
  if (loss.gdl_exponent != 1 && loss.gdl_exponent != 2)
    throw ConfigError("gdl_exponent must be 1 or 2");
  if (train.batch_size < 1 || train.accum_steps < 1)
    throw ConfigError("batch_size and accum_steps must be positive");
  if (train.lr <= 0 || train.cycle_epochs < 1 || train.cycle_mult < 1)
    throw ConfigError("learning-rate schedule parameters must be positive");
  if (data.sampler.t_min > data.sampler.t_max || data.sampler.t_min < 1)
    throw ConfigError("sampler needs 1 <= t_min <= t_max");
  if (data.sampler.window < 1 || data.sampler.margin < 0)
    throw ConfigError("sampler window/margin out of range");
  if (data.windows_per_patch < 1)
    throw ConfigError("windows_per_patch must be positive");
  if (eval.fap_bins < 1)
    throw ConfigError("fap_bins must be positive");
}

namespace {

using nlohmann::json;

// Applies `j`'s keys through `set`, rejecting anything unrecognized.
template <typename F>
void walk_object(const json& j, const std::string& where, F&& set) {
  if (!j.is_object())
    throw ConfigError("config section '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!set(it.key(), it.value()))
      throw ConfigError("unknown config key: " + where + "." + it.key());
}

template <typename T, std::size_t N>
json array_to_json(const std::array<T, N>& a) {
  json out = json::array();
  for (const T& v : a)
    out.push_back(v);
  return out;
}

template <typename T, std::size_t N>
void array_from_json(const json& j, const std::string& where, std::array<T, N>& out) {
  if (!j.is_array() || j.size() != N)
    throw ConfigError(where + " must be an array of " + std::to_string(N));
  for (std::size_t i = 0; i < N; ++i)
    out[i] = j[i].get<T>();
}

json loss_to_json(const LossConfig& c) {
  return {{"w_height", c.w_height},
          {"w_wgdl", c.w_wgdl},
          {"lambda_min", c.lambda_min},
          {"gdl_exponent", c.gdl_exponent}};
}

void loss_from_json(const json& j, LossConfig& c) {
  walk_object(j, "loss", [&](const std::string& k, const json& v) {
    if (k == "w_height") c.w_height = v.get<double>();
    else if (k == "w_wgdl") c.w_wgdl = v.get<double>();
    else if (k == "lambda_min") c.lambda_min = v.get<double>();
    else if (k == "gdl_exponent") c.gdl_exponent = v.get<int>();
    else return false;
    return true;
  });
}

json train_to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},
          {"accum_steps", c.accum_steps},
          {"lr", c.lr},
          {"restart_decay", c.restart_decay},
          {"cycle_epochs", c.cycle_epochs},
          {"cycle_mult", c.cycle_mult},
          {"lr_min", c.lr_min},
          {"max_epochs", c.max_epochs},
          {"max_steps", c.max_steps},
          {"patience", c.patience},
          {"checkpoint_every", c.checkpoint_every},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"adam_eps", c.adam_eps},
          {"weight_decay", c.weight_decay},
          {"seed", c.seed}};
}

void train_from_json(const json& j, TrainConfig& c) {
  walk_object(j, "train", [&](const std::string& k, const json& v) {
    if (k == "batch_size") c.batch_size = v.get<int>();
    else if (k == "accum_steps") c.accum_steps = v.get<int>();
    else if (k == "lr") c.lr = v.get<double>();
    else if (k == "restart_decay") c.restart_decay = v.get<double>();
    else if (k == "cycle_epochs") c.cycle_epochs = v.get<int>();
    else if (k == "cycle_mult") c.cycle_mult = v.get<int>();
    else if (k == "lr_min") c.lr_min = v.get<double>();
    else if (k == "max_epochs") c.max_epochs = v.get<int>();
    else if (k == "max_steps") c.max_steps = v.get<std::int64_t>();
    else if (k == "patience") c.patience = v.get<int>();
    else if (k == "checkpoint_every") c.checkpoint_every = v.get<std::int64_t>();
    else if (k == "beta1") c.beta1 = v.get<double>();
    else if (k == "beta2") c.beta2 = v.get<double>();
    else if (k == "adam_eps") c.adam_eps = v.get<double>();
    else if (k == "weight_decay") c.weight_decay = v.get<double>();
    else if (k == "seed") c.seed = v.get<std::uint64_t>();
    else return false;
    return true;
  });
}

json synth_to_json(const SynthConfig& c) {
  return {{"scene_size", c.scene_size},
          {"ref_border", c.ref_border},
          {"factor", c.factor},
          {"n_images", c.n_images},
          {"crown_density", c.crown_density},
          {"height_min", c.height_min},
          {"height_max", c.height_max},
          {"radius_jitter", c.radius_jitter},
          {"phenology_amp", c.phenology_amp},
          {"phenology_phase", c.phenology_phase},
          {"cloud_prob", c.cloud_prob},
          {"noise", c.noise},
          {"crop_parcels", c.crop_parcels},
          {"year", c.year},
          {"origin_x", c.origin_x},
          {"origin_y", c.origin_y},
          {"seed", c.seed},
          {"band_base", array_to_json(c.band_base)},
          {"band_gain", array_to_json(c.band_gain)}};
}

void synth_from_json(const json& j, SynthConfig& c) {
  walk_object(j, "data.synth", [&](const std::string& k, const json& v) {
    if (k == "scene_size") c.scene_size = v.get<int>();
    else if (k == "ref_border") c.ref_border = v.get<int>();
    else if (k == "factor") c.factor = v.get<int>();
    else if (k == "n_images") c.n_images = v.get<int>();
    else if (k == "crown_density") c.crown_density = v.get<double>();
    else if (k == "height_min") c.height_min = v.get<double>();
    else if (k == "height_max") c.height_max = v.get<double>();
    else if (k == "radius_jitter") c.radius_jitter = v.get<double>();
    else if (k == "phenology_amp") c.phenology_amp = v.get<double>();
    else if (k == "phenology_phase") c.phenology_phase = v.get<double>();
    else if (k == "cloud_prob") c.cloud_prob = v.get<double>();
    else if (k == "noise") c.noise = v.get<double>();
    else if (k == "crop_parcels") c.crop_parcels = v.get<int>();
    else if (k == "year") c.year = v.get<int>();
    else if (k == "origin_x") c.origin_x = v.get<double>();
    else if (k == "origin_y") c.origin_y = v.get<double>();
    else if (k == "seed") c.seed = v.get<std::uint64_t>();
    else if (k == "band_base") array_from_json(v, "data.synth.band_base", c.band_base);
    else if (k == "band_gain") array_from_json(v, "data.synth.band_gain", c.band_gain);
    else return false;
    return true;
  });
}

json data_to_json(const DataConfig& c) {
  return {{"resolution", c.resolution},
          {"t_max", c.sampler.t_max},
          {"t_min", c.sampler.t_min},
          {"window", c.sampler.window},
          {"margin", c.sampler.margin},
          {"strategy",
           c.sampler.strategy == SampleStrategy::random ? "random" : "equal_range"},
          {"windows_per_patch", c.windows_per_patch},
          {"synth", synth_to_json(c.synth)}};
}

void data_from_json(const json& j, DataConfig& c) {
  walk_object(j, "data", [&](const std::string& k, const json& v) {
    if (k == "resolution") c.resolution = v.get<double>();
    else if (k == "t_max") c.sampler.t_max = v.get<int>();
    else if (k == "t_min") c.sampler.t_min = v.get<int>();
    else if (k == "window") c.sampler.window = v.get<int>();
    else if (k == "margin") c.sampler.margin = v.get<int>();
    else if (k == "strategy") {
      const std::string s = v.get<std::string>();
      if (s == "random") c.sampler.strategy = SampleStrategy::random;
      else if (s == "equal_range") c.sampler.strategy = SampleStrategy::equal_range;
      else throw ConfigError("data.strategy must be 'random' or 'equal_range'");
    }
    else if (k == "windows_per_patch") c.windows_per_patch = v.get<int>();
    else if (k == "synth") synth_from_json(v, c.synth);
    else return false;
    return true;
  });
}

json eval_to_json(const EvalConfig& c) { return {{"fap_bins", c.fap_bins}}; }

void eval_from_json(const json& j, EvalConfig& c) {
  walk_object(j, "eval", [&](const std::string& k, const json& v) {
    if (k == "fap_bins") c.fap_bins = v.get<int>();
    else return false;
    return true;
  });
}

} // namespace

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  return {{"model", model_config_to_json(cfg.model)},
          {"loss", loss_to_json(cfg.loss)},
          {"train", train_to_json(cfg.train)},
          {"data", data_to_json(cfg.data)},
          {"eval", eval_to_json(cfg.eval)}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw ConfigError("run config must be a JSON object");
  double resolution = 2.5;
  if (j.contains("data") && j["data"].is_object() && j["data"].contains("resolution"))
    resolution = j["data"]["resolution"].get<double>();
  RunConfig cfg;
  try {
    cfg = RunConfig::defaults(resolution);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "model") {
      if (!it.value().is_object())
        throw ConfigError("config section 'model' must be an object");
      // Overlay onto the resolution defaults; the parser rejects unknown keys.
      nlohmann::json merged = model_config_to_json(cfg.model);
      for (auto mit = it.value().begin(); mit != it.value().end(); ++mit)
        merged[mit.key()] = mit.value();
      cfg.model = model_config_from_json(merged);
    } else if (k == "loss") {
      loss_from_json(it.value(), cfg.loss);
    } else if (k == "train") {
      train_from_json(it.value(), cfg.train);
    } else if (k == "data") {
      data_from_json(it.value(), cfg.data);
    } else if (k == "eval") {
      eval_from_json(it.value(), cfg.eval);
    } else {
      throw ConfigError("unknown config key: " + k);
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.good())
    throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return run_config_from_json(j);
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  out << run_config_to_json(cfg).dump(2) << "\n";
}

} // namespace canopysr
