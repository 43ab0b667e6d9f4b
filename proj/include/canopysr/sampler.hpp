// Training-time sampling: temporal subset selection, window cropping with
// aligned reference cores, per-channel standardization and batch padding.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "canopysr/patch.hpp"
#include "canopysr/rng.hpp"

namespace canopysr {

enum class SampleStrategy { random, equal_range };

struct SamplerConfig {
  int t_max = kMaxSeriesLength;
  int t_min = kMinObservations;
  int window = 64; // core size, input pixels
  int margin = 8;  // extra input context per side, cropped from the output
  SampleStrategy strategy = SampleStrategy::random;
};

// n <= t_max keeps everything; above that, `random` draws t_max sorted
// distinct indices uniformly and `equal_range` takes the first acquisition
// of each of t_max equal temporal bins: floor(j*n/t_max).
// Throws TooFewObservations below t_min.
std::vector<int> sample_timesteps(int n_available, const SamplerConfig& cfg,
                                  Rng& rng);

// How the reference grid sits on the input grid: integer refinement factor
// plus the coverage origin in input pixels. std::invalid_argument when the
// two grids do not align.
struct Layout {
  int n = 0;                // patch side, input pixels
  int factor = 1;           // reference refinement
  int off_x = 0, off_y = 0; // reference origin in input pixels
  int ref_w = 0, ref_h = 0; // reference size, reference pixels
};
Layout patch_layout(const PatchFile& patch);

struct WindowPlacement {
  int x = 0, y = 0; // core origin, patch pixel coordinates
};

// Valid placements keep the input crop inside the patch and the core inside
// the reference coverage. Centered mode is deterministic; random mode draws
// uniformly. Throws std::invalid_argument when nothing fits.
WindowPlacement place_window(const PatchFile& patch, const SamplerConfig& cfg,
                             bool centered, Rng* rng);

struct WindowSample {
  Tensor input;                // (t, 17, window + 2*margin, same)
  std::vector<double> offsets; // encoder offset per timestep
  double target_offset = 0.0;
  Tensor target;               // (factor*window, factor*window)
  std::vector<std::uint8_t> target_valid;
  GeoRef input_geo, target_geo;
};

WindowSample extract_window(const PatchFile& patch,
                            const std::vector<int>& timesteps,
                            WindowPlacement at, const SamplerConfig& cfg);

struct ChannelStats {
  std::array<double, kSpectralBands> mean{};
  std::array<double, kSpectralBands> stddev{};
};

// Spectral-channel statistics pooled over every timestep and pixel of the
// given patches (the training split).
ChannelStats compute_channel_stats(const std::vector<std::string>& patch_paths);

// In-place (x - mean)/std on the spectral channels; cloud and angle channels
// already live on comparable scales and are left alone.
// Throws std::domain_error on a zero stddev.
void standardize(Tensor& images, const ChannelStats& stats);
void unstandardize(Tensor& images, const ChannelStats& stats);

// Series padded to the longest in the batch with zeros; valid marks real
// timesteps. Target layout matches the batch loss API.
struct PaddedBatch {
  Tensor inputs;  // (B, T, C, H, W)
  Tensor targets; // (B, factor*window, factor*window)
  std::vector<std::vector<std::uint8_t>> valid;   // B x T
  std::vector<std::vector<double>> offsets;       // B x T, 0 on padding
  std::vector<std::uint8_t> target_valid;         // B * (f*w)^2
  std::vector<double> target_offsets;             // B
};

PaddedBatch pad_series(const std::vector<WindowSample>& samples);

} // namespace canopysr
