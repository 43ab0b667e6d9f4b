#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "canopysr/container.hpp"
#include "canopysr/errors.hpp"
#include "canopysr/numeric.hpp"
#include "canopysr/patch.hpp"
#include "canopysr/rasterize.hpp"
#include "canopysr/rng.hpp"

using namespace canopysr;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

CandidateImage make_candidate(Rng& rng, int year, int doy, int h, int w) {
  CandidateImage c;
  c.bands = Tensor({kSpectralBands, std::size_t(h), std::size_t(w)});
  for (std::size_t i = 0; i < c.bands.size(); ++i)
    c.bands[i] = uniform(rng, 0.0, 1.0);
  c.cloud = Tensor({std::size_t(h), std::size_t(w)});
  c.angles = {0.9, 0.5, 0.2, 1.0, 0.7, -0.7};
  c.year = year;
  c.doy = doy;
  return c;
}

PatchFile make_patch_file(Rng& rng, int t, int h, int w) {
  PatchFile p;
  p.sits.images = Tensor({std::size_t(t), kInputChannels, std::size_t(h), std::size_t(w)});
  for (std::size_t i = 0; i < p.sits.images.size(); ++i)
    p.sits.images[i] = normal(rng);
  for (int i = 0; i < t; ++i)
    p.sits.dates.push_back(130 + 14 * i);
  p.sits.valid_length = t;
  p.sits.geo = {650000.0, 6800000.0, 10.0, "EPSG:2154"};
  p.reference.heights = Tensor({std::size_t(h), std::size_t(w)});
  p.reference.valid_mask.assign(std::size_t(h) * w, 0);
  for (std::size_t i = 0; i < p.reference.heights.size(); ++i)
    if (uniform(rng, 0, 1) < 0.7) {
      p.reference.heights[i] = uniform(rng, 1.5, 30.0);
      p.reference.valid_mask[i] = 1;
    }
  p.reference.lidar_date = 200;
  p.reference.resolution = 10.0;
  p.reference.geo = p.sits.geo;
  return p;
}

} // namespace

TEST_CASE("container round trip is bit-exact for every dtype") {
  auto rng = make_rng(1);
  Container c;
  c.kind = "test";
  c.meta["note"] = "x";
  Tensor t({3, 4, 5});
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = normal(rng);
  t[0] = 0.1 + 0.2; // a value with a non-terminating binary expansion
  c.add_f64("t", t);
  std::vector<std::int64_t> ints = {-5, 0, 1ll << 62};
  c.add_i64("ints", ints.data(), {3});
  std::vector<std::uint8_t> bytes = {0, 1, 255};
  c.add_u8("bytes", bytes.data(), {3});

  const std::string path = temp_path("canopysr_container_test.bin");
  c.write(path);
  const Container r = Container::read(path);
  CHECK(r.kind == "test");
  CHECK(r.meta.at("note") == "x");
  const Tensor t2 = r.get_f64("t");
  CHECK(t2.shape() == t.shape());
  for (std::size_t i = 0; i < t.size(); ++i)
    CHECK(t2[i] == t[i]);
  CHECK(r.get_i64("ints") == ints);
  CHECK(r.get_u8("bytes") == bytes);
  CHECK_THROWS_AS(r.get_f64("missing"), ParseError);
  CHECK_THROWS_AS(r.get_f64("bytes"), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("container rejects corrupt files") {
  const std::string path = temp_path("canopysr_container_bad.bin");
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("NOTMAGIC garbage", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(Container::read(path), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("patch save/load round trip preserves every field") {
  auto rng = make_rng(2);
  const PatchFile p = make_patch_file(rng, 7, 12, 12);
  const std::string path = temp_path("canopysr_patch_test.bin");
  save_patch(p, path);
  const PatchFile q = load_patch(path);
  CHECK(q.sits.images.shape() == p.sits.images.shape());
  for (std::size_t i = 0; i < p.sits.images.size(); ++i)
    CHECK(q.sits.images[i] == p.sits.images[i]);
  CHECK(q.sits.dates == p.sits.dates);
  CHECK(q.sits.valid_length == p.sits.valid_length);
  CHECK(q.sits.geo == p.sits.geo);
  for (std::size_t i = 0; i < p.reference.heights.size(); ++i)
    CHECK(q.reference.heights[i] == p.reference.heights[i]);
  CHECK(q.reference.valid_mask == p.reference.valid_mask);
  CHECK(q.reference.lidar_date == p.reference.lidar_date);
  CHECK(q.reference.resolution == p.reference.resolution);
  std::remove(path.c_str());
}

TEST_CASE("loading violated invariants raises structured errors") {
  auto rng = make_rng(3);
  const std::string path = temp_path("canopysr_patch_bad.bin");

  PatchFile p = make_patch_file(rng, 6, 8, 8);
  p.sits.valid_length = 3;
  save_patch(p, path);
  CHECK_THROWS_AS(load_patch(path), TooFewObservations);

  p = make_patch_file(rng, 6, 8, 8);
  p.sits.dates[2] = 400;
  save_patch(p, path);
  CHECK_THROWS_AS(load_patch(path), DateOutOfRange);

  p = make_patch_file(rng, 6, 8, 8);
  p.sits.dates[3] = p.sits.dates[2];
  save_patch(p, path);
  CHECK_THROWS_AS(load_patch(path), ParseError);

  p = make_patch_file(rng, 6, 8, 8);
  p.sits.dates[0] = 40; // February: outside the acquisition season
  save_patch(p, path);
  CHECK_THROWS_AS(load_patch(path), ParseError);

  p = make_patch_file(rng, 6, 8, 8);
  p.reference.heights[0] = 0.7;
  p.reference.valid_mask[0] = 1;
  save_patch(p, path);
  CHECK_THROWS_AS(load_patch(path), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("filter_series applies the QA and season rules") {
  auto rng = make_rng(4);
  const GeoRef geo{0, 0, 10, "EPSG:2154"};

  // 8 images, one too cloudy: 7 retained.
  std::vector<CandidateImage> cands;
  for (int i = 0; i < 8; ++i)
    cands.push_back(make_candidate(rng, 2021, 140 + 10 * i, 4, 4));
  cands[3].cloud_fraction = 0.6;
  SITSPatch patch = filter_series(cands, 2021, geo);
  CHECK(patch.valid_length == 7);
  CHECK(patch.t_len() == 7);
  CHECK(std::is_sorted(patch.dates.begin(), patch.dates.end()));

  // All clean: all retained, 17-channel assembly with constant angle planes.
  cands[3].cloud_fraction = 0.0;
  patch = filter_series(cands, 2021, geo);
  CHECK(patch.valid_length == 8);
  CHECK(patch.images.dim(1) == kInputChannels);
  for (int i = 0; i < 8; ++i)
    for (int a = 0; a < 6; ++a)
      for (int p = 0; p < 16; ++p)
        CHECK(patch.images.at(i, kAngleChannel0 + a, p / 4, p % 4) ==
              cands[i].angles[a]);

  // Two of six over the missing-data threshold: too few left.
  std::vector<CandidateImage> six;
  for (int i = 0; i < 6; ++i)
    six.push_back(make_candidate(rng, 2021, 150 + 12 * i, 4, 4));
  six[1].missing_fraction = 0.15;
  six[4].missing_fraction = 0.15;
  CHECK_THROWS_AS(filter_series(six, 2021, geo), TooFewObservations);
  try {
    filter_series(six, 2021, geo);
  } catch (const TooFewObservations& e) {
    CHECK(e.count == 4);
    CHECK(e.minimum == 5);
  }

  // Off-season and wrong-year acquisitions are dropped.
  std::vector<CandidateImage> other;
  for (int i = 0; i < 7; ++i)
    other.push_back(make_candidate(rng, 2021, 140 + 10 * i, 4, 4));
  other[0].doy = 40;
  other[1].year = 2020;
  patch = filter_series(other, 2021, geo);
  CHECK(patch.valid_length == 5);
}

TEST_CASE("interpolated percentile matches the spec examples") {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i)
    v[i] = i + 1;
  CHECK(interpolated_percentile(v.begin(), v.end(), 0.95) ==
        doctest::Approx(95.05).epsilon(1e-12));
  std::vector<double> single = {7.0};
  CHECK(interpolated_percentile(single.begin(), single.end(), 0.95) == 7.0);
}

TEST_CASE("rasterize_p95 handles the documented pixel rules") {
  PointCloudSample cloud;
  // Pixel (0,0): vegetation z = 1..100.
  for (int i = 1; i <= 100; ++i)
    cloud.points.push_back({2.0, 98.0, double(i), PointClass::vegetation});
  // Pixel (0,1): single vegetation point at 7 m.
  cloud.points.push_back({15.0, 95.0, 7.0, PointClass::vegetation});
  // Pixel (1,0): low vegetation inside a crop parcel.
  for (double z : {3.0, 3.2, 3.4})
    cloud.points.push_back({5.0, 85.0, z, PointClass::vegetation});
  cloud.crop_parcels.push_back({{{0.0, 80.0}, {10.0, 80.0}, {10.0, 90.0}, {0.0, 90.0}}});
  // Pixel (1,1): only ground points.
  cloud.points.push_back({15.0, 85.0, 12.0, PointClass::ground});

  const ReferenceRaster r = rasterize_p95(cloud, 10.0, {0, 80, 20, 100});
  CHECK(r.height() == 2);
  CHECK(r.width() == 2);
  CHECK(r.heights.at(0, 0) == doctest::Approx(95.05).epsilon(1e-12));
  CHECK(r.valid_mask[0] == 1);
  CHECK(r.heights.at(0, 1) == 7.0);
  CHECK(r.valid_mask[1] == 1);
  CHECK(r.heights.at(1, 0) == 0.0); // crop-parcel rule
  CHECK(r.valid_mask[2] == 0);
  CHECK(r.heights.at(1, 1) == 0.0); // no vegetation points
  CHECK(r.valid_mask[3] == 0);
  CHECK(r.geo.origin_x == 0.0);
  CHECK(r.geo.origin_y == 100.0);

  CHECK_THROWS_AS(rasterize_p95(cloud, 10.0, {0, 0, 0, 0}), std::invalid_argument);
  PointCloudSample bad = cloud;
  bad.points.push_back({1, 99, std::nan(""), PointClass::vegetation});
  CHECK_THROWS_AS(rasterize_p95(bad, 10.0, {0, 80, 20, 100}), ParseError);
}

TEST_CASE("rasterize_p95 agrees with a brute-force oracle on random clouds") {
  auto rng = make_rng(5);
  const double res = 2.5;
  const Extent ext{100, 200, 120, 220};
  const int w = 8, h = 8;

  PointCloudSample cloud;
  for (int i = 0; i < 10000; ++i) {
    ClassedPoint p;
    p.x = uniform(rng, ext.min_x, ext.max_x);
    p.y = uniform(rng, ext.min_y + 1e-9, ext.max_y);
    p.z = uniform(rng, 0.0, 40.0);
    const double cls = uniform(rng, 0, 1);
    p.cls = cls < 0.7   ? PointClass::vegetation
            : cls < 0.9 ? PointClass::ground
                        : PointClass::building;
    cloud.points.push_back(p);
  }

  const ReferenceRaster r = rasterize_p95(cloud, res, ext);

  for (int row = 0; row < h; ++row)
    for (int col = 0; col < w; ++col) {
      std::vector<double> zs;
      for (const auto& p : cloud.points) {
        if (p.cls != PointClass::vegetation)
          continue;
        if (int(std::floor((p.x - ext.min_x) / res)) != col)
          continue;
        if (int(std::floor((ext.max_y - p.y) / res)) != row)
          continue;
        zs.push_back(p.z);
      }
      std::sort(zs.begin(), zs.end());
      double expect = 0.0;
      bool valid = false;
      if (!zs.empty()) {
        const double p95 = interpolated_percentile(zs.begin(), zs.end(), 0.95);
        if (p95 >= 1.5) {
          expect = p95;
          valid = true;
        }
      }
      CHECK(r.heights.at(std::size_t(row), std::size_t(col)) ==
            doctest::Approx(expect).epsilon(1e-9));
      CHECK(int(r.valid_mask[std::size_t(row) * w + col]) == int(valid));
    }

  // Masked-pixel invariant holds on the result.
  for (std::size_t i = 0; i < r.heights.size(); ++i) {
    if (r.valid_mask[i])
      CHECK(r.heights[i] >= 1.5);
    CHECK(r.heights[i] >= 0.0);
  }
}

TEST_CASE("point_in_polygon uses the even-odd rule") {
  const Polygon square{{{0, 0}, {10, 0}, {10, 10}, {0, 10}}};
  CHECK(point_in_polygon(5, 5, square));
  CHECK(!point_in_polygon(15, 5, square));
  CHECK(!point_in_polygon(-1, -1, square));
  const Polygon tri{{{0, 0}, {4, 0}, {0, 4}}};
  CHECK(point_in_polygon(1, 1, tri));
  CHECK(!point_in_polygon(3, 3, tri));
}

TEST_CASE("manifest files round trip") {
  const std::string path = temp_path("canopysr_manifest_test.txt");
  const std::vector<ManifestEntry> entries = {
      {"patches/p0.bin", "train"}, {"patches/p1.bin", "val"}, {"patches/p2.bin", "test"}};
  write_manifest(entries, path);
  const auto read = read_manifest(path);
  REQUIRE(read.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(read[i].path == entries[i].path);
    CHECK(read[i].split == entries[i].split);
  }
  std::remove(path.c_str());
}
