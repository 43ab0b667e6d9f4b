#include "canopysr/inference.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "canopysr/errors.hpp"

namespace canopysr {

namespace {

// (t, c, h, w) crop of the selected timesteps over [x0, x0+w0) x [y0, y0+h0).
Tensor gather_window(const SITSPatch& sits, const std::vector<int>& steps,
                     int x0, int y0, int w0, int h0) {
  Tensor out({steps.size(), std::size_t(kInputChannels), std::size_t(h0),
              std::size_t(w0)});
  const std::size_t sh = sits.images.dim(2);
  const std::size_t sw = sits.images.dim(3);
  for (std::size_t i = 0; i < steps.size(); ++i)
    for (int c = 0; c < kInputChannels; ++c) {
      const double* src = sits.images.data() +
                          ((std::size_t(steps[i]) * kInputChannels +
                            std::size_t(c)) *
                               sh +
                           std::size_t(y0)) *
                              sw +
                          std::size_t(x0);
      double* dst = out.data() + ((i * kInputChannels + std::size_t(c)) *
                                      std::size_t(h0)) *
                                     std::size_t(w0);
      for (int r = 0; r < h0; ++r)
        std::memcpy(dst + std::size_t(r) * std::size_t(w0),
                    src + std::size_t(r) * sw, std::size_t(w0) * sizeof(double));
    }
  return out;
}

} // namespace

GeoRaster predict_patch(Model& model, const ChannelStats& stats,
                        const SITSPatch& sits, const PredictOptions& opt) {
  if (sits.images.ndim() != 4 || int(sits.images.dim(1)) != kInputChannels)
    throw std::invalid_argument("predict_patch expects a (t, 17, h, w) series");
  const int h = sits.height();
  const int w = sits.width();
  const int factor = model.config().factor;

  SamplerConfig scfg;
  scfg.t_max = opt.t_max;
  scfg.t_min = opt.t_min;
  scfg.strategy = opt.strategy;
  Rng rng = make_rng(opt.seed);
  const std::vector<int> steps = sample_timesteps(sits.valid_length, scfg, rng);

  std::vector<double> offsets(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i)
    offsets[i] = double(normalize_doy_s2(sits.dates[std::size_t(steps[i])]));
  const double target_offset = double(normalize_doy_lidar(opt.target_doy));
  const std::vector<std::uint8_t> all_valid(steps.size(), 1);

  const int margin = opt.margin < 0 ? model.receptive_radius() : opt.margin;
  const int tile = opt.tile <= 0 ? std::max(h, w) : opt.tile;

  model.set_training(false);
  GeoRaster out;
  out.values = Tensor({std::size_t(factor) * std::size_t(h),
                       std::size_t(factor) * std::size_t(w)});
  out.geo = sits.geo.window(0, 0, factor);
  const std::size_t out_w = out.values.dim(1);

  for (int y0 = 0; y0 < h; y0 += tile)
    for (int x0 = 0; x0 < w; x0 += tile) {
      const int ch = std::min(tile, h - y0);
      const int cw = std::min(tile, w - x0);
      const int ey0 = std::max(0, y0 - margin);
      const int ex0 = std::max(0, x0 - margin);
      const int ey1 = std::min(h, y0 + ch + margin);
      const int ex1 = std::min(w, x0 + cw + margin);

      Tensor input = gather_window(sits, steps, ex0, ey0, ex1 - ex0, ey1 - ey0);
      standardize(input, stats);
      const Tensor pred = model.forward(input, offsets, target_offset,
                                        all_valid);

      const int ry = (y0 - ey0) * factor; // core origin inside the tile output
      const int rx = (x0 - ex0) * factor;
      for (int r = 0; r < ch * factor; ++r) {
        const double* src = pred.data() +
                            std::size_t(ry + r) * pred.dim(1) + std::size_t(rx);
        double* dst = out.values.data() +
                      (std::size_t(y0) * std::size_t(factor) + std::size_t(r)) *
                          out_w +
                      std::size_t(x0) * std::size_t(factor);
        std::memcpy(dst, src, std::size_t(cw * factor) * sizeof(double));
      }
    }
  return out;
}

RunCheckpoint load_run_checkpoint(const std::string& path) {
  Container raw;
  Model model = load_checkpoint(path, &raw);
  if (!raw.meta.contains("run_config"))
    throw ParseError("checkpoint", "no run config stored in '" + path + "'");

  RunConfig cfg = run_config_from_json(raw.meta.at("run_config"));
  cfg.model = model.config(); // the weights decide

  ChannelStats stats;
  const Tensor mean = raw.get_f64("stats.mean");
  const Tensor stddev = raw.get_f64("stats.stddev");
  if (mean.size() != std::size_t(kSpectralBands) ||
      stddev.size() != std::size_t(kSpectralBands))
    throw ParseError("checkpoint", "malformed channel statistics");
  std::copy_n(mean.data(), kSpectralBands, stats.mean.begin());
  std::copy_n(stddev.data(), kSpectralBands, stats.stddev.begin());
  return {std::move(model), cfg, stats};
}

} // namespace canopysr
