// Core data types: satellite image time series patches, reference height
// rasters and raw LiDAR point-cloud samples, plus QA filtering and the
// on-disk patch format.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "canopysr/geo.hpp"
#include "canopysr/tensor.hpp"

namespace canopysr {

// Input channel layout. The 10 spectral bands are, in order:
// B02, B03, B04, B05, B06, B07, B08, B8A, B11, B12.
inline constexpr int kSpectralBands = 10;
inline constexpr int kCloudChannel = 10;
inline constexpr int kAngleChannel0 = 11;
inline constexpr int kInputChannels = 17;

inline constexpr int kMinObservations = 5;
inline constexpr int kMaxSeriesLength = 12;

// One Sentinel-2-style time series over a spatial window. `images` is
// (T, 17, H, W): spectral bands, the binary cloud mask and six angle
// channels held constant across each image. Entries past `valid_length`
// are zero padding.
struct SITSPatch {
  Tensor images;
  std::vector<int> dates; // day-of-year per timestep, year dropped
  int valid_length = 0;
  GeoRef geo;

  int t_len() const { return images.ndim() == 4 ? int(images.dim(0)) : 0; }
  int height() const { return images.ndim() == 4 ? int(images.dim(2)) : 0; }
  int width() const { return images.ndim() == 4 ? int(images.dim(3)) : 0; }
};

// LiDAR-derived 95th-percentile height grid at the target resolution.
// Heights are meters; valid pixels carry heights >= 1.5 m, everything else
// is zero and excluded from losses and metrics.
struct ReferenceRaster {
  Tensor heights;                       // (H, W)
  std::vector<std::uint8_t> valid_mask; // H*W, 1 = contributes
  int lidar_date = 182;                 // day-of-year of the acquisition
  double resolution = 10.0;             // meters per pixel
  GeoRef geo;

  int height() const { return heights.ndim() == 2 ? int(heights.dim(0)) : 0; }
  int width() const { return heights.ndim() == 2 ? int(heights.dim(1)) : 0; }
};

enum class PointClass : std::uint8_t { vegetation, ground, building, other };

struct ClassedPoint {
  double x = 0, y = 0, z = 0;
  PointClass cls = PointClass::other;
};

// Simple (non-self-intersecting) polygon, closed implicitly.
struct Polygon {
  std::vector<std::array<double, 2>> ring;
};

struct PointCloudSample {
  std::vector<ClassedPoint> points;
  std::vector<Polygon> crop_parcels;
};

// One candidate acquisition before QA filtering.
struct CandidateImage {
  Tensor bands;                  // (10, H, W)
  Tensor cloud;                  // (H, W), 1 = cloudy
  std::array<double, 6> angles{}; // trigonometric encoding
  int year = 0;
  int doy = 0;
  double cloud_fraction = 0.0;
  double missing_fraction = 0.0;
};

// Drops candidates with cloud fraction > 0.5 or missing fraction > 0.1,
// keeps May-October acquisitions of lidar_year only, sorts by date and
// assembles the 17-channel stack. Throws TooFewObservations if fewer than
// kMinObservations survive.
SITSPatch filter_series(const std::vector<CandidateImage>& candidates,
                        int lidar_year, const GeoRef& geo);

// Contents of one on-disk patch container.
struct PatchFile {
  SITSPatch sits;
  ReferenceRaster reference;
};

// Throws on invariant violations: DateOutOfRange for day-of-year outside
// [1, 366], TooFewObservations for valid_length < kMinObservations,
// ParseError for non-increasing or out-of-season dates, shape mismatches,
// negative heights or valid pixels below 1.5 m.
void validate_patch(const SITSPatch& sits);
void validate_raster(const ReferenceRaster& raster);

void save_patch(const PatchFile& patch, const std::string& path);
PatchFile load_patch(const std::string& path);

// Manifest: one "<patch-path> <split>" pair per line, paths relative to the
// manifest's directory.
struct ManifestEntry {
  std::string path;
  std::string split;
};
std::vector<ManifestEntry> read_manifest(const std::string& path);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);

} // namespace canopysr
