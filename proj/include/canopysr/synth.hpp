// Synthetic forest scenes: a crown-max canopy field drives both the pooled
// reference raster and the optical series, so the inputs genuinely carry the
// signal the model is asked to regress. Deliberately simple physics; the
// point is a learnable, fully reproducible desk-scale dataset.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "canopysr/patch.hpp"

namespace canopysr {

struct SynthConfig {
  int scene_size = 48;  // patch side in 10 m pixels
  int ref_border = 8;   // reference inset from each patch edge, 10 m pixels
  int factor = 4;       // reference grid refinement; resolution = 10/factor m
  int n_images = 10;    // acquisitions across the May..October window
  double crown_density = 0.06; // expected crowns per 10 m cell
  double height_min = 3.0;
  double height_max = 28.0;
  double radius_jitter = 0.15; // relative spread of the radius-height link
  double phenology_amp = 0.25;
  double phenology_phase = 200.0; // DOY of peak greenness
  double cloud_prob = 0.15;       // expected cloud disks per image / 2
  double noise = 0.005;           // reflectance noise sigma
  int crop_parcels = 1;           // rectangles where low vegetation is masked
  int year = 2021;
  double origin_x = 700000.0;
  double origin_y = 6600000.0;
  std::uint64_t seed = 1;

  // Reflectance response: band value = base + gain * cover * season(doy).
  // Order follows the spectral channel layout (B02..B12); the positive NIR
  // and negative red gains give the usual vegetation-index behaviour.
  std::array<double, 10> band_base{0.06, 0.08, 0.10, 0.12, 0.14,
                                   0.15, 0.16, 0.16, 0.20, 0.15};
  std::array<double, 10> band_gain{-0.02, 0.02, -0.06, 0.05, 0.15,
                                   0.20,  0.22, 0.22,  -0.08, -0.06};
};

PatchFile generate_synthetic(const SynthConfig& cfg);

// Writes n patches (seed, seed+1, ...) plus a manifest with train/val/test
// splits; returns the manifest entries. Patch i sits one scene east of i-1.
std::vector<ManifestEntry> write_synthetic_dataset(const SynthConfig& base,
                                                   int n,
                                                   const std::string& dir);

} // namespace canopysr
