#include "canopysr/evalrun.hpp"

#include <stdexcept>
#include <string>

namespace canopysr {

namespace {

FapProfile mean_profile(const std::vector<FapProfile>& profiles) {
  FapProfile out;
  if (profiles.empty())
    return out;
  out = profiles[0];
  std::size_t kept = 1;
  for (std::size_t i = 1; i < profiles.size(); ++i) {
    const FapProfile& p = profiles[i];
    if (p.freq.size() != out.freq.size())
      continue; // different raster size, bins do not line up
    for (std::size_t k = 0; k < out.freq.size(); ++k) {
      out.value[k] += p.value[k];
      out.magnitude[k] += p.magnitude[k];
    }
    ++kept;
  }
  for (std::size_t k = 0; k < out.freq.size(); ++k) {
    out.value[k] /= double(kept);
    out.magnitude[k] /= double(kept);
  }
  return out;
}

} // namespace

void EvalPairs::add_patch(const PatchFile& patch, const GeoRaster& prediction,
                          int fap_bins) {
  const Layout lay = patch_layout(patch);
  const std::size_t pw = prediction.values.dim(1);
  const int f = lay.factor;

  Tensor cropped({std::size_t(lay.ref_h), std::size_t(lay.ref_w)});
  for (int r = 0; r < lay.ref_h; ++r)
    for (int c = 0; c < lay.ref_w; ++c)
      cropped.data()[std::size_t(r) * std::size_t(lay.ref_w) + std::size_t(c)] =
          prediction.values
              .data()[(std::size_t(lay.off_y) * std::size_t(f) +
                       std::size_t(r)) *
                          pw +
                      std::size_t(lay.off_x) * std::size_t(f) + std::size_t(c)];

  const std::size_t n = cropped.size();
  pred.insert(pred.end(), cropped.data(), cropped.data() + n);
  target.insert(target.end(), patch.reference.heights.data(),
                patch.reference.heights.data() + n);
  valid.insert(valid.end(), patch.reference.valid_mask.begin(),
               patch.reference.valid_mask.end());
  ++n_patches;

  if (lay.ref_h == lay.ref_w && lay.ref_h >= 8) {
    fap_pred.push_back(fap(cropped, fap_bins));
    fap_reference.push_back(fap(patch.reference.heights, fap_bins));
  }
}

EvalReport report_from_pairs(const EvalPairs& pairs) {
  EvalReport report;
  report.metrics = basic_metrics(pairs.pred.data(), pairs.target.data(),
                                 pairs.valid.data(), pairs.pred.size());
  report.bins = bin_errors(pairs.pred.data(), pairs.target.data(),
                           pairs.valid.data(), pairs.pred.size());
  report.fap_pred = mean_profile(pairs.fap_pred);
  report.fap_reference = mean_profile(pairs.fap_reference);
  report.n_patches = pairs.n_patches;
  for (std::uint8_t v : pairs.valid)
    report.n_pixels += v != 0;
  return report;
}

EvalReport evaluate_patches(Model& model, const ChannelStats& stats,
                            const std::vector<std::string>& patch_paths,
                            const PredictOptions& opt, int fap_bins) {
  EvalPairs pairs;
  for (const std::string& path : patch_paths) {
    const PatchFile patch = load_patch(path);
    const Layout lay = patch_layout(patch);
    if (lay.factor != model.config().factor)
      throw std::invalid_argument(
          "model upsamples by " + std::to_string(model.config().factor) +
          " but the reference grid of '" + path + "' is " +
          std::to_string(lay.factor) + "x finer than the input");
    PredictOptions o = opt;
    o.target_doy = patch.reference.lidar_date;
    pairs.add_patch(patch, predict_patch(model, stats, patch.sits, o),
                    fap_bins);
  }
  return report_from_pairs(pairs);
}

} // namespace canopysr
