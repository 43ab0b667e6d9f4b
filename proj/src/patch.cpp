#include "canopysr/patch.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "canopysr/container.hpp"
#include "canopysr/encodings.hpp"
#include "canopysr/errors.hpp"

namespace canopysr {

namespace {

bool in_season(int year, int doy) {
  const int shift = is_leap_year(year) ? 1 : 0;
  return doy >= kDoyMay1 + shift && doy <= kDoyOct31 + shift;
}

nlohmann::json geo_to_json(const GeoRef& g) {
  return {{"origin_x", g.origin_x},
          {"origin_y", g.origin_y},
          {"pixel_size", g.pixel_size},
          {"crs", g.crs}};
}

GeoRef geo_from_json(const nlohmann::json& j, const std::string& field) {
  GeoRef g;
  try {
    g.origin_x = j.at("origin_x").get<double>();
    g.origin_y = j.at("origin_y").get<double>();
    g.pixel_size = j.at("pixel_size").get<double>();
    g.crs = j.at("crs").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(field, e.what());
  }
  return g;
}

} // namespace

SITSPatch filter_series(const std::vector<CandidateImage>& candidates,
                        int lidar_year, const GeoRef& geo) {
  std::vector<const CandidateImage*> kept;
  for (const auto& c : candidates) {
    if (c.cloud_fraction > 0.5 || c.missing_fraction > 0.1)
      continue;
    if (c.year != lidar_year || !in_season(c.year, c.doy))
      continue;
    kept.push_back(&c);
  }
  if (int(kept.size()) < kMinObservations)
    throw TooFewObservations(int(kept.size()), kMinObservations);

  std::stable_sort(kept.begin(), kept.end(),
                   [](const CandidateImage* a, const CandidateImage* b) {
                     return a->doy < b->doy;
                   });

  const int t = int(kept.size());
  const int h = int(kept[0]->bands.dim(1));
  const int w = int(kept[0]->bands.dim(2));
  SITSPatch patch;
  patch.images = Tensor({std::size_t(t), kInputChannels, std::size_t(h), std::size_t(w)});
  patch.dates.resize(t);
  patch.valid_length = t;
  patch.geo = geo;

  for (int i = 0; i < t; ++i) {
    const CandidateImage& c = *kept[i];
    if (int(c.bands.dim(1)) != h || int(c.bands.dim(2)) != w)
      throw ParseError("bands", "candidate image shapes differ within one series");
    patch.dates[i] = c.doy;
    for (int b = 0; b < kSpectralBands; ++b)
      for (int p = 0; p < h * w; ++p)
        patch.images.at(i, b, p / w, p % w) = c.bands.at(b, p / w, p % w);
    for (int p = 0; p < h * w; ++p)
      patch.images.at(i, kCloudChannel, p / w, p % w) = c.cloud.at(p / w, p % w);
    for (int a = 0; a < 6; ++a)
      for (int p = 0; p < h * w; ++p)
        patch.images.at(i, kAngleChannel0 + a, p / w, p % w) = c.angles[a];
  }
  validate_patch(patch);
  return patch;
}

void validate_patch(const SITSPatch& sits) {
  if (sits.images.ndim() != 4)
    throw ParseError("images", "expected a (T, C, H, W) tensor");
  if (int(sits.images.dim(1)) != kInputChannels)
    throw ParseError("images", "expected " + std::to_string(kInputChannels) +
                                   " channels, found " + std::to_string(sits.images.dim(1)));
  const int t = sits.t_len();
  if (int(sits.dates.size()) != t)
    throw ParseError("dates", "length disagrees with the image stack");
  if (sits.valid_length < kMinObservations)
    throw TooFewObservations(sits.valid_length, kMinObservations);
  if (sits.valid_length > t)
    throw ParseError("valid_length", "exceeds series length");
  for (int i = 0; i < sits.valid_length; ++i) {
    const int d = sits.dates[i];
    if (d < 1 || d > 366)
      throw DateOutOfRange(d);
    // Leap years shift the season window by one day; accept the union.
    if (d < kDoyMay1 || d > kDoyOct31 + 1)
      throw ParseError("dates", "day " + std::to_string(d) +
                                    " outside the May-October acquisition window");
    if (i > 0 && sits.dates[i] <= sits.dates[i - 1])
      throw ParseError("dates", "not strictly increasing over valid entries");
  }
}

void validate_raster(const ReferenceRaster& raster) {
  if (raster.heights.ndim() != 2)
    throw ParseError("heights", "expected a (H, W) grid");
  if (raster.valid_mask.size() != raster.heights.size())
    throw ParseError("valid_mask", "size disagrees with the height grid");
  if (raster.lidar_date < 1 || raster.lidar_date > 366)
    throw DateOutOfRange(raster.lidar_date);
  if (raster.resolution <= 0)
    throw ParseError("resolution", "must be positive");
  for (std::size_t i = 0; i < raster.heights.size(); ++i) {
    const double v = raster.heights[i];
    if (v < 0)
      throw ParseError("heights", "negative height at pixel " + std::to_string(i));
    if (raster.valid_mask[i] && v < 1.5)
      throw ParseError("valid_mask", "valid pixel below 1.5 m at " + std::to_string(i));
  }
}

void save_patch(const PatchFile& patch, const std::string& path) {
  Container c;
  c.kind = "patch";
  c.meta["valid_length"] = patch.sits.valid_length;
  c.meta["geo"] = geo_to_json(patch.sits.geo);
  c.meta["lidar_date"] = patch.reference.lidar_date;
  c.meta["resolution"] = patch.reference.resolution;
  c.meta["reference_geo"] = geo_to_json(patch.reference.geo);
  c.add_f64("images", patch.sits.images);
  std::vector<std::int64_t> dates(patch.sits.dates.begin(), patch.sits.dates.end());
  c.add_i64("dates", dates.data(), {dates.size()});
  c.add_f64("heights", patch.reference.heights);
  c.add_u8("valid_mask", patch.reference.valid_mask.data(),
           {std::size_t(patch.reference.height()), std::size_t(patch.reference.width())});
  c.write(path);
}

PatchFile load_patch(const std::string& path) {
  const Container c = Container::read(path);
  if (c.kind != "patch")
    throw ParseError("kind", "expected 'patch', found '" + c.kind + "'");
  PatchFile p;
  p.sits.images = c.get_f64("images");
  for (std::int64_t d : c.get_i64("dates"))
    p.sits.dates.push_back(int(d));
  try {
    p.sits.valid_length = c.meta.at("valid_length").get<int>();
    p.sits.geo = geo_from_json(c.meta.at("geo"), "geo");
    p.reference.lidar_date = c.meta.at("lidar_date").get<int>();
    p.reference.resolution = c.meta.at("resolution").get<double>();
    p.reference.geo = geo_from_json(c.meta.at("reference_geo"), "reference_geo");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("meta", e.what());
  }
  p.reference.heights = c.get_f64("heights");
  p.reference.valid_mask = c.get_u8("valid_mask");
  validate_patch(p.sits);
  validate_raster(p.reference);
  return p;
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open manifest '" + path + "'");
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::istringstream ss(line);
    ManifestEntry e;
    if (!(ss >> e.path >> e.split))
      throw ParseError("manifest", "bad line: '" + line + "'");
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open manifest '" + path + "' for writing");
  for (const auto& e : entries)
    out << e.path << " " << e.split << "\n";
}

} // namespace canopysr
