// Evaluation metrics: pixel-level error statistics, per-height-bin error
// distributions and Frequency Attenuation Profiles.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "canopysr/tensor.hpp"

namespace canopysr {

struct BasicMetrics {
  double mae = 0;
  double rmse = 0;
  double rmae = 0;             // mean of |error| / target
  std::optional<double> r2;    // absent when the target has zero variance
};

// Requires at least 2 valid pixels (throws std::domain_error otherwise).
BasicMetrics basic_metrics(const double* pred, const double* target,
                           const std::uint8_t* valid, std::size_t n);

// Error distribution of one target-height bin. Quartiles use linear
// interpolation; whiskers sit on the most extreme errors within 1.5*IQR of
// the quartiles. Statistics are meaningless when count == 0.
struct BinStat {
  double lo = 0, hi = 0; // target range [lo, hi), hi may be +inf
  std::size_t count = 0;
  double fraction = 0;
  double median = 0, q1 = 0, q3 = 0;
  double whisker_lo = 0, whisker_hi = 0;
};

// Height-bin edges 1.5, 5, 10, 15, 20, 25, 30, +inf (7 bins).
extern const std::vector<double> kHeightBinEdges;

std::vector<BinStat> bin_errors(const double* pred, const double* target,
                                const std::uint8_t* valid, std::size_t n);

// Radial spectral profile of a square image. `magnitude` holds the raw
// per-annulus mean DFT magnitude (the DC coefficient lands in the lowest
// bin); `value` is the normalized log profile 1 + log10(M_k / M_0), so the
// lowest-frequency bin reads exactly 1. Empty annuli (possible on small
// images) are omitted. `freq` holds bin centers in units of the Nyquist
// frequency.
struct FapProfile {
  std::vector<double> freq;
  std::vector<double> value;
  std::vector<double> magnitude;
};

// Square side >= 8 required; 32 annuli by default.
FapProfile fap(const Tensor& img, int nbins = 32);

struct EvalReport {
  BasicMetrics metrics;
  std::vector<BinStat> bins;
  FapProfile fap_pred;      // mean profile over evaluated predictions
  FapProfile fap_reference; // same for the reference rasters
  std::size_t n_patches = 0;
  std::size_t n_pixels = 0;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

} // namespace canopysr
