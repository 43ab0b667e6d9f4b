// Whole-split evaluation: predict each patch at its LiDAR acquisition date,
// align the prediction with the reference grid and pool the errors.
#pragma once

#include <string>
#include <vector>

#include "canopysr/inference.hpp"
#include "canopysr/metrics.hpp"

namespace canopysr {

// Pooled pixel pairs plus per-raster spectral profiles, the raw material of
// a report. Kept separate from evaluate_patches so any prediction source
// (including the reference itself) goes through one reporting path.
struct EvalPairs {
  std::vector<double> pred, target;
  std::vector<std::uint8_t> valid;
  std::vector<FapProfile> fap_pred, fap_reference;
  std::size_t n_patches = 0;

  // Crops `prediction` to the reference coverage of `patch` and appends the
  // aligned pixels; adds FAP profiles when the crop is square and >= 8.
  void add_patch(const PatchFile& patch, const GeoRaster& prediction,
                 int fap_bins);
};

EvalReport report_from_pairs(const EvalPairs& pairs);

// std::invalid_argument when the model's upsampling factor does not match a
// patch's reference grid.
EvalReport evaluate_patches(Model& model, const ChannelStats& stats,
                            const std::vector<std::string>& patch_paths,
                            const PredictOptions& opt, int fap_bins = 32);

} // namespace canopysr
