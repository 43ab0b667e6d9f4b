#include "canopysr/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "canopysr/encodings.hpp"
#include "canopysr/errors.hpp"

namespace canopysr {

std::vector<int> sample_timesteps(int n_available, const SamplerConfig& cfg,
                                  Rng& rng) {
  if (n_available < cfg.t_min)
    throw TooFewObservations(n_available, cfg.t_min);
  std::vector<int> all(static_cast<std::size_t>(n_available));
  std::iota(all.begin(), all.end(), 0);
  if (n_available <= cfg.t_max)
    return all;
  std::vector<int> picked;
  picked.reserve(std::size_t(cfg.t_max));
  if (cfg.strategy == SampleStrategy::random) {
    std::sample(all.begin(), all.end(), std::back_inserter(picked), cfg.t_max, rng);
  } else {
    for (int j = 0; j < cfg.t_max; ++j)
      picked.push_back(int(std::int64_t(j) * n_available / cfg.t_max));
  }
  return picked;
}

Layout patch_layout(const PatchFile& patch) {
  const double in_px = patch.sits.geo.pixel_size;
  const double ref_px = patch.reference.geo.pixel_size;
  const double fr = in_px / ref_px;
  Layout l;
  l.factor = int(std::lround(fr));
  if (l.factor < 1 || std::abs(fr - l.factor) > 1e-9)
    throw std::invalid_argument("reference grid is not an integer refinement");
  const double ox = (patch.reference.geo.origin_x - patch.sits.geo.origin_x) / in_px;
  const double oy = (patch.sits.geo.origin_y - patch.reference.geo.origin_y) / in_px;
  l.off_x = int(std::lround(ox));
  l.off_y = int(std::lround(oy));
  if (std::abs(ox - l.off_x) > 1e-9 || std::abs(oy - l.off_y) > 1e-9)
    throw std::invalid_argument("reference origin is not grid aligned");
  l.n = patch.sits.width();
  l.ref_w = patch.reference.width();
  l.ref_h = patch.reference.height();
  return l;
}

WindowPlacement place_window(const PatchFile& patch, const SamplerConfig& cfg,
                             bool centered, Rng* rng) {
  const Layout l = patch_layout(patch);
  const int lo_x = std::max(l.off_x, cfg.margin);
  const int hi_x = std::min(l.off_x + l.ref_w / l.factor, l.n - cfg.margin) - cfg.window;
  const int lo_y = std::max(l.off_y, cfg.margin);
  const int hi_y = std::min(l.off_y + l.ref_h / l.factor,
                            patch.sits.height() - cfg.margin) -
                   cfg.window;
  if (hi_x < lo_x || hi_y < lo_y)
    throw std::invalid_argument("window does not fit inside the patch");
  if (centered)
    return {lo_x + (hi_x - lo_x) / 2, lo_y + (hi_y - lo_y) / 2};
  if (!rng)
    throw std::invalid_argument("random placement needs an rng");
  return {uniform_int(*rng, lo_x, hi_x), uniform_int(*rng, lo_y, hi_y)};
}

WindowSample extract_window(const PatchFile& patch,
                            const std::vector<int>& timesteps,
                            WindowPlacement at, const SamplerConfig& cfg) {
  const Layout l = patch_layout(patch);
  const int side = cfg.window + 2 * cfg.margin;
  const int ix = at.x - cfg.margin, iy = at.y - cfg.margin;
  const int rx = (at.x - l.off_x) * l.factor, ry = (at.y - l.off_y) * l.factor;
  const int rside = cfg.window * l.factor;
  if (ix < 0 || iy < 0 || ix + side > l.n || iy + side > patch.sits.height() ||
      rx < 0 || ry < 0 || rx + rside > l.ref_w || ry + rside > l.ref_h)
    throw std::invalid_argument("window does not fit inside the patch");

  WindowSample s;
  s.input = Tensor({timesteps.size(), std::size_t(kInputChannels),
                    std::size_t(side), std::size_t(side)});
  s.offsets.reserve(timesteps.size());
  const std::size_t plane = std::size_t(l.n) * patch.sits.height();
  for (std::size_t k = 0; k < timesteps.size(); ++k) {
    const int t = timesteps[k];
    if (t < 0 || t >= patch.sits.valid_length)
      throw std::invalid_argument("timestep index outside the valid series");
    s.offsets.push_back(double(normalize_doy_s2(patch.sits.dates[std::size_t(t)])));
    for (int c = 0; c < kInputChannels; ++c) {
      const double* src = patch.sits.images.data() +
                          (std::size_t(t) * kInputChannels + c) * plane;
      double* dst = s.input.data() +
                    (k * kInputChannels + c) * std::size_t(side) * side;
      for (int row = 0; row < side; ++row)
        std::memcpy(dst + std::size_t(row) * side,
                    src + std::size_t(iy + row) * l.n + ix,
                    std::size_t(side) * sizeof(double));
    }
  }
  s.target_offset = double(normalize_doy_lidar(patch.reference.lidar_date));

  s.target = Tensor({std::size_t(rside), std::size_t(rside)});
  s.target_valid.assign(std::size_t(rside) * rside, 0);
  for (int row = 0; row < rside; ++row) {
    std::memcpy(s.target.data() + std::size_t(row) * rside,
                patch.reference.heights.data() +
                    std::size_t(ry + row) * l.ref_w + rx,
                std::size_t(rside) * sizeof(double));
    for (int col = 0; col < rside; ++col)
      s.target_valid[std::size_t(row) * rside + col] =
          patch.reference.valid_mask[std::size_t(ry + row) * l.ref_w + rx + col];
  }

  s.input_geo = patch.sits.geo;
  s.input_geo.origin_x += ix * patch.sits.geo.pixel_size;
  s.input_geo.origin_y -= iy * patch.sits.geo.pixel_size;
  s.target_geo = patch.reference.geo;
  s.target_geo.origin_x += rx * patch.reference.geo.pixel_size;
  s.target_geo.origin_y -= ry * patch.reference.geo.pixel_size;
  return s;
}

ChannelStats compute_channel_stats(const std::vector<std::string>& patch_paths) {
  std::array<double, kSpectralBands> sum{}, sumsq{};
  double count = 0.0;
  for (const std::string& path : patch_paths) {
    const PatchFile patch = load_patch(path);
    const std::size_t plane =
        std::size_t(patch.sits.width()) * patch.sits.height();
    for (int t = 0; t < patch.sits.valid_length; ++t)
      for (int b = 0; b < kSpectralBands; ++b) {
        const double* src = patch.sits.images.data() +
                            (std::size_t(t) * kInputChannels + b) * plane;
        for (std::size_t p = 0; p < plane; ++p) {
          sum[std::size_t(b)] += src[p];
          sumsq[std::size_t(b)] += src[p] * src[p];
        }
      }
    count += double(patch.sits.valid_length) * double(plane);
  }
  if (count == 0.0)
    throw std::invalid_argument("no pixels to compute channel stats from");
  ChannelStats stats;
  for (int b = 0; b < kSpectralBands; ++b) {
    stats.mean[std::size_t(b)] = sum[std::size_t(b)] / count;
    const double var =
        sumsq[std::size_t(b)] / count -
        stats.mean[std::size_t(b)] * stats.mean[std::size_t(b)];
    stats.stddev[std::size_t(b)] = std::sqrt(std::max(0.0, var));
  }
  return stats;
}

namespace {

void scale_bands(Tensor& images, const ChannelStats& stats, bool forward) {
  if (images.ndim() != 4 || int(images.dim(1)) != kInputChannels)
    throw std::invalid_argument("standardize expects (t, 17, h, w)");
  const std::size_t plane = images.dim(2) * images.dim(3);
  for (std::size_t t = 0; t < images.dim(0); ++t)
    for (int b = 0; b < kSpectralBands; ++b) {
      const double mu = stats.mean[std::size_t(b)];
      const double sd = stats.stddev[std::size_t(b)];
      if (sd == 0.0)
        throw std::domain_error("zero stddev for spectral channel " +
                                std::to_string(b));
      double* px = images.data() + (t * kInputChannels + std::size_t(b)) * plane;
      for (std::size_t p = 0; p < plane; ++p)
        px[p] = forward ? (px[p] - mu) / sd : px[p] * sd + mu;
    }
}

} // namespace

void standardize(Tensor& images, const ChannelStats& stats) {
  scale_bands(images, stats, true);
}

void unstandardize(Tensor& images, const ChannelStats& stats) {
  scale_bands(images, stats, false);
}

PaddedBatch pad_series(const std::vector<WindowSample>& samples) {
  if (samples.empty())
    throw std::invalid_argument("cannot pad an empty batch");
  std::size_t t_max = 0;
  for (const WindowSample& s : samples)
    t_max = std::max(t_max, s.input.dim(0));
  const std::size_t b = samples.size();
  const std::size_t c = samples[0].input.dim(1);
  const std::size_t h = samples[0].input.dim(2);
  const std::size_t w = samples[0].input.dim(3);
  const std::size_t th = samples[0].target.dim(0);
  const std::size_t tw = samples[0].target.dim(1);

  PaddedBatch out;
  out.inputs = Tensor({b, t_max, c, h, w});
  out.targets = Tensor({b, th, tw});
  out.valid.assign(b, std::vector<std::uint8_t>(t_max, 0));
  out.offsets.assign(b, std::vector<double>(t_max, 0.0));
  out.target_valid.assign(b * th * tw, 0);
  out.target_offsets.resize(b);
  for (std::size_t i = 0; i < b; ++i) {
    const WindowSample& s = samples[i];
    if (s.input.dim(1) != c || s.input.dim(2) != h || s.input.dim(3) != w ||
        s.target.dim(0) != th || s.target.dim(1) != tw)
      throw std::invalid_argument("batch samples disagree on shape");
    const std::size_t t = s.input.dim(0);
    std::memcpy(out.inputs.data() + i * t_max * c * h * w, s.input.data(),
                t * c * h * w * sizeof(double));
    for (std::size_t k = 0; k < t; ++k) {
      out.valid[i][k] = 1;
      out.offsets[i][k] = s.offsets[k];
    }
    std::memcpy(out.targets.data() + i * th * tw, s.target.data(),
                th * tw * sizeof(double));
    std::memcpy(out.target_valid.data() + i * th * tw, s.target_valid.data(),
                th * tw);
    out.target_offsets[i] = s.target_offset;
  }
  return out;
}

} // namespace canopysr
