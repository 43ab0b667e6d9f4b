#include "canopysr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <stdexcept>

#include "canopysr/encodings.hpp"
#include "canopysr/numeric.hpp"
#include "canopysr/rng.hpp"

namespace canopysr {

namespace {

constexpr int kSub = 3; // canopy subsamples per reference pixel, per side
constexpr double kPi = 3.14159265358979323846;

struct Crown {
  double x, y;   // center, meters from the patch's top-left corner
  double radius; // meters
  double height;
};

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

int draw_count(double mean, Rng& rng) {
  if (mean <= 0.0)
    return 0;
  return std::poisson_distribution<int>(mean)(rng);
}

} // namespace

PatchFile generate_synthetic(const SynthConfig& cfg) {
  if (cfg.scene_size <= 2 * cfg.ref_border)
    throw std::invalid_argument("scene_size must exceed twice ref_border");
  if (cfg.n_images > kDoyOct31 - kDoyMay1 + 1)
    throw std::invalid_argument("more images than distinct leaf-on days");
  Rng rng = make_rng(cfg.seed);
  const int n = cfg.scene_size;
  const double patch_m = n * 10.0;
  const int fine = n * cfg.factor * kSub; // canopy field side
  const double fine_m = 10.0 / (cfg.factor * kSub);

  // Dome-shaped crowns, taller ones wider; the field is the pointwise max.
  const int n_crowns = draw_count(cfg.crown_density * n * n, rng);
  std::vector<Crown> crowns(static_cast<std::size_t>(n_crowns));
  for (Crown& c : crowns) {
    c.x = uniform(rng, 0.0, patch_m);
    c.y = uniform(rng, 0.0, patch_m);
    c.height = uniform(rng, cfg.height_min, cfg.height_max);
    c.radius = (4.0 + 0.35 * c.height) *
               uniform(rng, 1.0 - cfg.radius_jitter, 1.0 + cfg.radius_jitter);
  }
  std::vector<double> canopy(std::size_t(fine) * fine, 0.0);
  for (const Crown& c : crowns) {
    const int x0 = std::max(0, int((c.x - c.radius) / fine_m));
    const int x1 = std::min(fine - 1, int((c.x + c.radius) / fine_m));
    const int y0 = std::max(0, int((c.y - c.radius) / fine_m));
    const int y1 = std::min(fine - 1, int((c.y + c.radius) / fine_m));
    for (int iy = y0; iy <= y1; ++iy)
      for (int ix = x0; ix <= x1; ++ix) {
        const double dx = (ix + 0.5) * fine_m - c.x;
        const double dy = (iy + 0.5) * fine_m - c.y;
        const double d2 = (dx * dx + dy * dy) / (c.radius * c.radius);
        if (d2 >= 1.0)
          continue;
        double& cell = canopy[std::size_t(iy) * fine + ix];
        cell = std::max(cell, c.height * (1.0 - d2));
      }
  }

  // Pooled reference over the central region: p95 of the subsamples.
  const int ref_cells = n - 2 * cfg.ref_border;
  const int ref_px = ref_cells * cfg.factor;
  ReferenceRaster ref;
  ref.heights = Tensor({std::size_t(ref_px), std::size_t(ref_px)});
  ref.valid_mask.assign(std::size_t(ref_px) * ref_px, 0);
  ref.resolution = 10.0 / cfg.factor;
  ref.lidar_date = kDoyJul1;
  ref.geo.origin_x = cfg.origin_x + cfg.ref_border * 10.0;
  ref.geo.origin_y = cfg.origin_y - cfg.ref_border * 10.0;
  ref.geo.pixel_size = ref.resolution;

  const int fine_off = cfg.ref_border * cfg.factor * kSub;
  std::vector<double> pool(kSub * kSub);
  for (int ry = 0; ry < ref_px; ++ry)
    for (int rx = 0; rx < ref_px; ++rx) {
      for (int sy = 0; sy < kSub; ++sy)
        for (int sx = 0; sx < kSub; ++sx)
          pool[std::size_t(sy) * kSub + sx] =
              canopy[std::size_t(fine_off + ry * kSub + sy) * fine +
                     (fine_off + rx * kSub + sx)];
      const double p95 = interpolated_percentile(pool.begin(), pool.end(), 0.95);
      if (p95 >= 1.5) {
        ref.heights.at(std::size_t(ry), std::size_t(rx)) = p95;
        ref.valid_mask[std::size_t(ry) * ref_px + rx] = 1;
      }
    }

  // Crop parcels mask out low vegetation, mirroring the gridding rules.
  for (int k = 0; k < cfg.crop_parcels; ++k) {
    const int pw = int(uniform(rng, 0.15, 0.3) * ref_px);
    const int ph = int(uniform(rng, 0.15, 0.3) * ref_px);
    const int px0 = uniform_int(rng, 0, std::max(0, ref_px - pw - 1));
    const int py0 = uniform_int(rng, 0, std::max(0, ref_px - ph - 1));
    for (int ry = py0; ry < py0 + ph; ++ry)
      for (int rx = px0; rx < px0 + pw; ++rx) {
        double& hgt = ref.heights.at(std::size_t(ry), std::size_t(rx));
        if (hgt < 5.0) {
          hgt = 0.0;
          ref.valid_mask[std::size_t(ry) * ref_px + rx] = 0;
        }
      }
  }

  // Per 10 m cell: fraction of subsamples with vegetation. Drives reflectance.
  const int cell_sub = cfg.factor * kSub;
  std::vector<double> cover(std::size_t(n) * n, 0.0);
  for (int cy = 0; cy < n; ++cy)
    for (int cx = 0; cx < n; ++cx) {
      int veg = 0;
      for (int sy = 0; sy < cell_sub; ++sy)
        for (int sx = 0; sx < cell_sub; ++sx)
          if (canopy[std::size_t(cy * cell_sub + sy) * fine + cx * cell_sub + sx] > 1.5)
            ++veg;
      cover[std::size_t(cy) * n + cx] = double(veg) / (cell_sub * cell_sub);
    }

  // Acquisition dates: distinct, sorted, inside the leaf-on window.
  std::set<int> days;
  while (int(days.size()) < cfg.n_images)
    days.insert(uniform_int(rng, kDoyMay1, kDoyOct31));
  std::vector<int> dates(days.begin(), days.end());

  SITSPatch sits;
  sits.dates = dates;
  sits.valid_length = cfg.n_images;
  sits.geo.origin_x = cfg.origin_x;
  sits.geo.origin_y = cfg.origin_y;
  sits.geo.pixel_size = 10.0;
  sits.images = Tensor({std::size_t(cfg.n_images), std::size_t(kInputChannels),
                        std::size_t(n), std::size_t(n)});
  const std::size_t plane = std::size_t(n) * n;

  for (int t = 0; t < cfg.n_images; ++t) {
    const int doy = dates[std::size_t(t)];
    const double season =
        1.0 + cfg.phenology_amp * std::cos(2 * kPi * (doy - cfg.phenology_phase) / 365.0);

    const double sun_zen = (30.0 + 15.0 * std::cos(2 * kPi * (doy - 172) / 365.0)) * kPi / 180.0;
    const double sun_az = (180.0 + uniform(rng, -25.0, 25.0)) * kPi / 180.0;
    const double view_zen = uniform(rng, 0.0, 8.0) * kPi / 180.0;
    const double view_az = uniform(rng, 0.0, 360.0) * kPi / 180.0;
    const std::array<double, 6> ang = encode_angles(sun_zen, sun_az, view_zen, view_az);

    std::vector<std::uint8_t> cloudy(plane, 0);
    const int n_disks = draw_count(cfg.cloud_prob * 2.0, rng);
    for (int d = 0; d < n_disks; ++d) {
      const double cx = uniform(rng, 0.0, double(n));
      const double cy = uniform(rng, 0.0, double(n));
      const double cr = uniform(rng, 3.0, 8.0);
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
          const double dx = ix + 0.5 - cx, dy = iy + 0.5 - cy;
          if (dx * dx + dy * dy < cr * cr)
            cloudy[std::size_t(iy) * n + ix] = 1;
        }
    }

    double* img = sits.images.data() + std::size_t(t) * kInputChannels * plane;
    for (int b = 0; b < kSpectralBands; ++b)
      for (std::size_t p = 0; p < plane; ++p) {
        const double v = cfg.band_base[std::size_t(b)] +
                         cfg.band_gain[std::size_t(b)] * cover[p] * season +
                         normal(rng, 0.0, cfg.noise);
        img[std::size_t(b) * plane + p] = cloudy[p] ? 0.0 : clamp01(v);
      }
    for (std::size_t p = 0; p < plane; ++p)
      img[std::size_t(kCloudChannel) * plane + p] = cloudy[p] ? 1.0 : 0.0;
    for (int a = 0; a < 6; ++a)
      for (std::size_t p = 0; p < plane; ++p)
        img[std::size_t(kAngleChannel0 + a) * plane + p] = ang[std::size_t(a)];
  }

  PatchFile out{std::move(sits), std::move(ref)};
  validate_patch(out.sits);
  validate_raster(out.reference);
  return out;
}

std::vector<ManifestEntry> write_synthetic_dataset(const SynthConfig& base,
                                                   int n,
                                                   const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<ManifestEntry> entries;
  const int n_val = n >= 3 ? std::max(1, n / 8) : 0;
  const int n_test = n >= 3 ? std::max(1, n / 8) : 0;
  const int n_train = n - n_val - n_test;
  for (int i = 0; i < n; ++i) {
    SynthConfig cfg = base;
    cfg.seed = base.seed + std::uint64_t(i);
    cfg.origin_x = base.origin_x + double(i) * base.scene_size * 10.0;
    PatchFile patch = generate_synthetic(cfg);
    char name[32];
    std::snprintf(name, sizeof(name), "patch_%03d.csr", i);
    save_patch(patch, (fs::path(dir) / name).string());
    const char* split = i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
    entries.push_back({name, split});
  }
  write_manifest(entries, (fs::path(dir) / "manifest.txt").string());
  return entries;
}

} // namespace canopysr
