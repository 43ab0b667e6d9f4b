// Whole-patch prediction: temporal subset selection, standardization and
// tiled forward passes stitched into one georeferenced height map.
#pragma once

#include <cstdint>
#include <string>

#include "canopysr/config.hpp"
#include "canopysr/encodings.hpp"
#include "canopysr/geotiff.hpp"
#include "canopysr/model.hpp"
#include "canopysr/sampler.hpp"

namespace canopysr {

struct PredictOptions {
  int tile = 0;    // core tile side in input pixels, 0 runs the whole patch
  int margin = -1; // context per side, negative uses the receptive radius
  int t_max = kMaxSeriesLength;
  int t_min = kMinObservations;
  SampleStrategy strategy = SampleStrategy::equal_range;
  int target_doy = kDoyJul1; // date the prediction should be valid for
  std::uint64_t seed = 0;    // consulted only by the random strategy
};

// Height map covering the whole patch at the model's output resolution.
// With at least the receptive radius of margin, tiled and whole-patch runs
// agree on every pixel because each output pixel then sees its full input
// neighborhood either way.
GeoRaster predict_patch(Model& model, const ChannelStats& stats,
                        const SITSPatch& sits, const PredictOptions& opt);

// A trained model plus everything needed to run it on new inputs.
struct RunCheckpoint {
  Model model;
  RunConfig config;
  ChannelStats stats;
};

// ParseError when the file lacks the training-time statistics or config.
RunCheckpoint load_run_checkpoint(const std::string& path);

} // namespace canopysr
