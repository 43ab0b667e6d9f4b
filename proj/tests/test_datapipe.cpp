#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "canopysr/errors.hpp"
#include "canopysr/sampler.hpp"
#include "canopysr/synth.hpp"

using namespace canopysr;
namespace fs = std::filesystem;

namespace {

std::vector<char> file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  const double n = double(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

} // namespace

TEST_CASE("sample_timesteps follows both strategies") {
  SamplerConfig cfg;
  Rng rng = make_rng(5);

  SUBCASE("short series pass through under both strategies") {
    for (SampleStrategy s : {SampleStrategy::random, SampleStrategy::equal_range}) {
      cfg.strategy = s;
      std::vector<int> idx = sample_timesteps(12, cfg, rng);
      REQUIRE(idx.size() == 12);
      for (int j = 0; j < 12; ++j)
        CHECK(idx[std::size_t(j)] == j);
    }
  }

  SUBCASE("equal_range picks the first index of each temporal bin") {
    cfg.strategy = SampleStrategy::equal_range;
    std::vector<int> idx = sample_timesteps(24, cfg, rng);
    const std::vector<int> expect{0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22};
    CHECK(idx == expect);
    // Strictly increasing for any length.
    for (int n = 13; n < 60; ++n) {
      std::vector<int> v = sample_timesteps(n, cfg, rng);
      REQUIRE(v.size() == 12);
      for (std::size_t j = 1; j < v.size(); ++j)
        CHECK(v[j] > v[j - 1]);
      CHECK(v.front() == 0);
      CHECK(v.back() < n);
    }
  }

  SUBCASE("random draws sorted distinct indices, reproducibly") {
    cfg.strategy = SampleStrategy::random;
    Rng a = make_rng(17), b = make_rng(17);
    std::vector<int> one = sample_timesteps(20, cfg, a);
    std::vector<int> two = sample_timesteps(20, cfg, b);
    CHECK(one == two);
    REQUIRE(one.size() == 12);
    std::set<int> uniq(one.begin(), one.end());
    CHECK(uniq.size() == 12);
    CHECK(std::is_sorted(one.begin(), one.end()));
    CHECK(*uniq.begin() >= 0);
    CHECK(*uniq.rbegin() < 20);
  }

  SUBCASE("too short series is rejected") {
    CHECK_THROWS_AS(sample_timesteps(4, cfg, rng), TooFewObservations);
  }
}

TEST_CASE("synthetic scenes are deterministic and obey the config") {
  SynthConfig cfg;
  cfg.scene_size = 32;
  cfg.ref_border = 6;
  cfg.n_images = 6;
  cfg.seed = 42;

  PatchFile a = generate_synthetic(cfg);
  PatchFile b = generate_synthetic(cfg);
  CHECK(a.sits.dates == b.sits.dates);
  REQUIRE(a.sits.images.size() == b.sits.images.size());
  for (std::size_t i = 0; i < a.sits.images.size(); ++i)
    CHECK(a.sits.images[i] == b.sits.images[i]);
  for (std::size_t i = 0; i < a.reference.heights.size(); ++i)
    CHECK(a.reference.heights[i] == b.reference.heights[i]);
  CHECK(a.reference.valid_mask == b.reference.valid_mask);

  CHECK(a.sits.t_len() == 6);
  CHECK(a.sits.width() == 32);
  CHECK(a.reference.width() == (32 - 12) * 4);
  CHECK(a.reference.resolution == 2.5);
  // Reference sits ref_border cells inside the patch.
  CHECK(a.reference.geo.origin_x - a.sits.geo.origin_x == 60.0);
  CHECK(a.sits.geo.origin_y - a.reference.geo.origin_y == 60.0);

  SUBCASE("cloud probability zero clears the cloud channel") {
    cfg.cloud_prob = 0.0;
    PatchFile clear = generate_synthetic(cfg);
    const std::size_t plane = 32 * 32;
    for (int t = 0; t < clear.sits.t_len(); ++t)
      for (std::size_t p = 0; p < plane; ++p)
        CHECK(clear.sits.images[(std::size_t(t) * kInputChannels + kCloudChannel) *
                                    plane +
                                p] == 0.0);
  }

  SUBCASE("zero crown density leaves an empty reference") {
    cfg.crown_density = 0.0;
    PatchFile bare = generate_synthetic(cfg);
    for (std::size_t i = 0; i < bare.reference.heights.size(); ++i)
      CHECK(bare.reference.heights[i] == 0.0);
    for (std::uint8_t v : bare.reference.valid_mask)
      CHECK(v == 0);
  }

  SUBCASE("different seeds differ") {
    cfg.seed = 43;
    PatchFile c = generate_synthetic(cfg);
    bool same = a.sits.dates == c.sits.dates;
    double diff = 0.0;
    for (std::size_t i = 0; i < a.reference.heights.size(); ++i)
      diff = std::max(diff,
                      std::abs(a.reference.heights[i] - c.reference.heights[i]));
    CHECK((!same || diff > 0.0));
  }
}

TEST_CASE("synthetic reflectance carries the canopy signal") {
  SynthConfig cfg;
  cfg.seed = 7;
  cfg.cloud_prob = 0.0;
  PatchFile patch = generate_synthetic(cfg);

  const int n = cfg.scene_size;
  const int f = cfg.factor;
  const std::size_t plane = std::size_t(n) * n;
  const int ref_cells = n - 2 * cfg.ref_border;

  // Per central 10 m cell: vegetated fraction of the reference grid vs a
  // vegetation-index proxy from the red and NIR bands of one acquisition.
  std::vector<double> cover, ndvi;
  const double* red = patch.sits.images.data() + 2 * plane;  // B04
  const double* nir = patch.sits.images.data() + 6 * plane;  // B08
  for (int cy = 0; cy < ref_cells; ++cy)
    for (int cx = 0; cx < ref_cells; ++cx) {
      int veg = 0;
      for (int sy = 0; sy < f; ++sy)
        for (int sx = 0; sx < f; ++sx)
          veg += patch.reference
                     .valid_mask[std::size_t(cy * f + sy) * ref_cells * f +
                                 std::size_t(cx * f + sx)];
      cover.push_back(double(veg) / (f * f));
      const std::size_t p =
          std::size_t(cy + cfg.ref_border) * n + (cx + cfg.ref_border);
      ndvi.push_back((nir[p] - red[p]) / (nir[p] + red[p] + 1e-9));
    }
  CHECK(pearson(cover, ndvi) > 0.5);
}

TEST_CASE("window extraction aligns input and reference crops") {
  SynthConfig scfg;
  scfg.scene_size = 32;
  scfg.ref_border = 6;
  scfg.n_images = 7;
  scfg.seed = 9;
  PatchFile patch = generate_synthetic(scfg);

  SamplerConfig cfg;
  cfg.window = 12;
  cfg.margin = 4;

  SUBCASE("centered placement and shapes") {
    WindowPlacement at = place_window(patch, cfg, true, nullptr);
    CHECK(at.x == 10);
    CHECK(at.y == 10);
    std::vector<int> steps{0, 2, 4};
    WindowSample s = extract_window(patch, steps, at, cfg);
    CHECK(s.input.shape() == std::vector<std::size_t>{3, 17, 20, 20});
    CHECK(s.target.shape() == std::vector<std::size_t>{48, 48});
    CHECK(s.offsets.size() == 3);
    CHECK(s.offsets[0] == double(patch.sits.dates[0] - 1));
    CHECK(s.target_offset == 0.0); // lidar date anchored mid-season

    // Input crop origin sits margin pixels out from the core.
    CHECK(s.target_geo.origin_x - s.input_geo.origin_x ==
          cfg.margin * patch.sits.geo.pixel_size);
    CHECK(s.input_geo.origin_y - s.target_geo.origin_y ==
          cfg.margin * patch.sits.geo.pixel_size);

    // Values must be verbatim copies from the source tensors.
    const std::size_t plane = 32 * 32;
    for (int row = 0; row < 20; ++row)
      for (int col = 0; col < 20; ++col)
        CHECK(s.input.at(1, 3, std::size_t(row), std::size_t(col)) ==
              patch.sits.images[(2 * 17 + 3) * plane +
                                std::size_t(row + 6) * 32 + (col + 6)]);
    const int rx = (at.x - 6) * 4, ry = (at.y - 6) * 4;
    for (int row = 0; row < 48; ++row)
      for (int col = 0; col < 48; ++col) {
        CHECK(s.target.at(std::size_t(row), std::size_t(col)) ==
              patch.reference.heights.at(std::size_t(ry + row),
                                         std::size_t(rx + col)));
        CHECK(s.target_valid[std::size_t(row) * 48 + col] ==
              patch.reference.valid_mask[std::size_t(ry + row) * 80 + rx + col]);
      }
  }

  SUBCASE("random placement is reproducible and in bounds") {
    Rng a = make_rng(33), b = make_rng(33);
    WindowPlacement pa = place_window(patch, cfg, false, &a);
    WindowPlacement pb = place_window(patch, cfg, false, &b);
    CHECK(pa.x == pb.x);
    CHECK(pa.y == pb.y);
    for (int i = 0; i < 100; ++i) {
      WindowPlacement p = place_window(patch, cfg, false, &a);
      CHECK(p.x >= 6);
      CHECK(p.x + cfg.window <= 26);
      CHECK(p.y >= 6);
      CHECK(p.y + cfg.window <= 26);
      WindowSample s = extract_window(patch, {0, 1}, p, cfg);
      CHECK(s.input.dim(2) == 20);
    }
  }

  SUBCASE("oversized window is rejected") {
    cfg.window = 64;
    CHECK_THROWS_AS(place_window(patch, cfg, true, nullptr),
                    std::invalid_argument);
    CHECK_THROWS_AS(extract_window(patch, {0}, {0, 0}, cfg),
                    std::invalid_argument);
  }
}

TEST_CASE("standardization normalizes the spectral channels only") {
  SynthConfig scfg;
  scfg.scene_size = 24;
  scfg.ref_border = 4;
  scfg.n_images = 6;
  scfg.seed = 14;
  const fs::path dir = fs::temp_directory_path() / "canopysr_stats_test";
  fs::remove_all(dir);
  write_synthetic_dataset(scfg, 2, dir.string());

  std::vector<std::string> paths{(dir / "patch_000.csr").string(),
                                 (dir / "patch_001.csr").string()};
  ChannelStats stats = compute_channel_stats(paths);
  for (int b = 0; b < kSpectralBands; ++b)
    CHECK(stats.stddev[std::size_t(b)] > 0.0);

  PatchFile patch = load_patch(paths[0]);
  Tensor original = patch.sits.images;
  PatchFile other = load_patch(paths[1]);

  standardize(patch.sits.images, stats);
  standardize(other.sits.images, stats);

  // Pooled over exactly the data that produced the stats: mean 0, std 1.
  const std::size_t plane = 24 * 24;
  for (int b = 0; b < kSpectralBands; ++b) {
    double sum = 0, sumsq = 0, count = 0;
    for (const Tensor* imgs : {&patch.sits.images, &other.sits.images})
      for (std::size_t t = 0; t < imgs->dim(0); ++t)
        for (std::size_t p = 0; p < plane; ++p) {
          const double v = (*imgs)[(t * 17 + std::size_t(b)) * plane + p];
          sum += v;
          sumsq += v * v;
          count += 1;
        }
    CHECK(std::abs(sum / count) < 1e-6);
    CHECK(std::abs(sumsq / count - 1.0) < 1e-6);
  }

  // Cloud and angle channels untouched.
  for (std::size_t t = 0; t < patch.sits.images.dim(0); ++t)
    for (int c = kCloudChannel; c < kInputChannels; ++c)
      for (std::size_t p = 0; p < plane; p += 7)
        CHECK(patch.sits.images[(t * 17 + std::size_t(c)) * plane + p] ==
              original[(t * 17 + std::size_t(c)) * plane + p]);

  SUBCASE("round trip restores the input") {
    unstandardize(patch.sits.images, stats);
    for (std::size_t i = 0; i < original.size(); ++i)
      CHECK(patch.sits.images[i] == doctest::Approx(original[i]).epsilon(1e-9));
  }

  SUBCASE("identity stats change nothing") {
    ChannelStats id;
    id.stddev.fill(1.0);
    Tensor copy = original;
    standardize(copy, id);
    for (std::size_t i = 0; i < original.size(); ++i)
      CHECK(copy[i] == original[i]);
  }

  SUBCASE("zero stddev is rejected") {
    ChannelStats broken = stats;
    broken.stddev[3] = 0.0;
    CHECK_THROWS_AS(standardize(patch.sits.images, broken), std::domain_error);
  }
  fs::remove_all(dir);
}

TEST_CASE("pad_series zero-pads to the batch maximum") {
  SynthConfig scfg;
  scfg.scene_size = 24;
  scfg.ref_border = 4;
  scfg.seed = 21;
  SamplerConfig cfg;
  cfg.window = 8;
  cfg.margin = 2;

  scfg.n_images = 5;
  PatchFile short_patch = generate_synthetic(scfg);
  scfg.n_images = 12;
  scfg.seed = 22;
  PatchFile long_patch = generate_synthetic(scfg);

  WindowSample a = extract_window(short_patch, {0, 1, 2, 3, 4},
                                  place_window(short_patch, cfg, true, nullptr), cfg);
  WindowSample b = extract_window(long_patch, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},
                                  place_window(long_patch, cfg, true, nullptr), cfg);
  PaddedBatch batch = pad_series({a, b});
  CHECK(batch.inputs.shape() == std::vector<std::size_t>{2, 12, 17, 12, 12});
  CHECK(batch.targets.shape() == std::vector<std::size_t>{2, 32, 32});

  int pad_a = 0, pad_b = 0;
  for (std::size_t k = 0; k < 12; ++k) {
    pad_a += batch.valid[0][k] ? 0 : 1;
    pad_b += batch.valid[1][k] ? 0 : 1;
  }
  CHECK(pad_a == 7);
  CHECK(pad_b == 0);

  // Padding rows are zero; real rows are verbatim.
  const std::size_t row = std::size_t(17) * 12 * 12;
  for (std::size_t i = 0; i < a.input.size(); ++i)
    CHECK(batch.inputs[i] == a.input[i]);
  for (std::size_t i = a.input.size(); i < 12 * row; ++i)
    CHECK(batch.inputs[i] == 0.0);
  for (std::size_t i = 0; i < b.input.size(); ++i)
    CHECK(batch.inputs[12 * row + i] == b.input[i]);
  CHECK(batch.offsets[0][11] == 0.0);
  CHECK(batch.target_offsets.size() == 2);
}

TEST_CASE("dataset writer is deterministic and splits the manifest") {
  SynthConfig cfg;
  cfg.scene_size = 24;
  cfg.ref_border = 4;
  cfg.n_images = 5;
  cfg.seed = 31;

  const fs::path dir1 = fs::temp_directory_path() / "canopysr_ds1";
  const fs::path dir2 = fs::temp_directory_path() / "canopysr_ds2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);

  std::vector<ManifestEntry> m1 = write_synthetic_dataset(cfg, 8, dir1.string());
  std::vector<ManifestEntry> m2 = write_synthetic_dataset(cfg, 8, dir2.string());
  REQUIRE(m1.size() == 8);

  int train = 0, val = 0, test = 0;
  for (const ManifestEntry& e : m1) {
    train += e.split == "train";
    val += e.split == "val";
    test += e.split == "test";
  }
  CHECK(train == 6);
  CHECK(val == 1);
  CHECK(test == 1);

  for (int i = 0; i < 8; ++i) {
    CHECK(file_bytes(dir1 / m1[std::size_t(i)].path) ==
          file_bytes(dir2 / m2[std::size_t(i)].path));
  }

  std::vector<ManifestEntry> read = read_manifest((dir1 / "manifest.txt").string());
  REQUIRE(read.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(read[i].path == m1[i].path);
    CHECK(read[i].split == m1[i].split);
  }

  // Every patch in the manifest loads and validates.
  for (const ManifestEntry& e : read) {
    PatchFile p = load_patch((dir1 / e.path).string());
    CHECK(p.sits.valid_length == 5);
  }
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}
