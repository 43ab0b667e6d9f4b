#include "canopysr/geotiff.hpp"

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include "canopysr/errors.hpp"

namespace canopysr {

namespace {

// tag / type codes used by the minimal profile
enum : std::uint16_t {
  kImageWidth = 256,
  kImageLength = 257,
  kBitsPerSample = 258,
  kCompression = 259,
  kPhotometric = 262,
  kStripOffsets = 273,
  kSamplesPerPixel = 277,
  kRowsPerStrip = 278,
  kStripByteCounts = 279,
  kTileWidth = 322,
  kSampleFormat = 339,
  kModelPixelScale = 33550,
  kModelTiepoint = 33922,
  kGeoKeyDirectory = 34735,
};
enum : std::uint16_t { kShort = 3, kLong = 4, kDouble = 12 };

void put16(std::string& out, std::uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char(v >> 8));
}
void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(char((v >> (8 * i)) & 0xff));
}

struct Entry {
  std::uint16_t tag, type;
  std::uint32_t count, value;
};

int epsg_code(const std::string& crs) {
  if (crs.rfind("EPSG:", 0) == 0)
    return std::atoi(crs.c_str() + 5);
  return 0;
}

} // namespace

void write_geotiff(const std::string& path, const Tensor& img,
                   const GeoRef& geo) {
  if (img.ndim() != 2)
    throw std::invalid_argument("geotiff writer expects a 2-d raster");
  const std::uint32_t h = std::uint32_t(img.dim(0));
  const std::uint32_t w = std::uint32_t(img.dim(1));

  const double scale[3] = {geo.pixel_size, geo.pixel_size, 0.0};
  const double tiepoint[6] = {0.0, 0.0, 0.0, geo.origin_x, geo.origin_y, 0.0};
  const std::uint16_t keys[16] = {
      1, 1, 0, 3,                                  // directory header
      1024, 0, 1, 1,                               // model type: projected
      1025, 0, 1, 1,                               // raster type: pixel is area
      3072, 0, 1, std::uint16_t(epsg_code(geo.crs)) // projected CRS
  };

  const std::uint32_t n_tags = 13;
  const std::uint32_t ifd_off = 8;
  const std::uint32_t after_ifd = ifd_off + 2 + n_tags * 12 + 4;
  const std::uint32_t scale_off = after_ifd;
  const std::uint32_t tie_off = scale_off + sizeof(scale);
  const std::uint32_t keys_off = tie_off + sizeof(tiepoint);
  const std::uint32_t strip_off = keys_off + sizeof(keys);
  const std::uint32_t strip_bytes = w * h * 4;

  const Entry entries[n_tags] = {
      {kImageWidth, kLong, 1, w},
      {kImageLength, kLong, 1, h},
      {kBitsPerSample, kShort, 1, 32},
      {kCompression, kShort, 1, 1},
      {kPhotometric, kShort, 1, 1},
      {kStripOffsets, kLong, 1, strip_off},
      {kSamplesPerPixel, kShort, 1, 1},
      {kRowsPerStrip, kLong, 1, h},
      {kStripByteCounts, kLong, 1, strip_bytes},
      {kSampleFormat, kShort, 1, 3},
      {kModelPixelScale, kDouble, 3, scale_off},
      {kModelTiepoint, kDouble, 6, tie_off},
      {kGeoKeyDirectory, kShort, 16, keys_off},
  };

  std::string out;
  out.reserve(strip_off + strip_bytes);
  out += "II";
  put16(out, 42);
  put32(out, ifd_off);
  put16(out, std::uint16_t(n_tags));
  for (const Entry& e : entries) {
    put16(out, e.tag);
    put16(out, e.type);
    put32(out, e.count);
    if (e.type == kShort && e.count == 1) {
      put16(out, std::uint16_t(e.value));
      put16(out, 0);
    } else {
      put32(out, e.value);
    }
  }
  put32(out, 0); // no next IFD
  out.append(reinterpret_cast<const char*>(scale), sizeof(scale));
  out.append(reinterpret_cast<const char*>(tiepoint), sizeof(tiepoint));
  out.append(reinterpret_cast<const char*>(keys), sizeof(keys));

  std::vector<float> px(std::size_t(w) * h);
  for (std::size_t i = 0; i < px.size(); ++i)
    px[i] = float(img.data()[i]);
  out.append(reinterpret_cast<const char*>(px.data()), strip_bytes);

  std::ofstream file(path, std::ios::binary);
  if (!file)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  file.write(out.data(), std::streamsize(out.size()));
  if (!file)
    throw std::runtime_error("short write to '" + path + "'");
}

namespace {

struct Field {
  std::uint16_t type = 0;
  std::uint32_t count = 0;
  std::uint32_t value = 0; // inline value or offset
};

class Reader {
public:
  explicit Reader(std::string bytes) : b_(std::move(bytes)) {}

  std::uint16_t u16(std::size_t off) const {
    check(off, 2);
    return std::uint16_t(std::uint8_t(b_[off])) |
           std::uint16_t(std::uint8_t(b_[off + 1])) << 8;
  }
  std::uint32_t u32(std::size_t off) const {
    check(off, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
      v = (v << 8) | std::uint8_t(b_[off + std::size_t(i)]);
    return v;
  }
  double f64(std::size_t off) const {
    check(off, 8);
    double v;
    std::memcpy(&v, b_.data() + off, 8);
    return v;
  }
  float f32(std::size_t off) const {
    check(off, 4);
    float v;
    std::memcpy(&v, b_.data() + off, 4);
    return v;
  }
  void check(std::size_t off, std::size_t n) const {
    if (off + n > b_.size())
      throw ParseError("tiff", "truncated file");
  }

private:
  std::string b_;
};

// Values of a SHORT/LONG field as integers. Small counts live in the
// entry's own value word (already captured in f.value), larger ones at
// the offset it points to.
std::vector<std::uint32_t> int_values(const Reader& r, const Field& f) {
  if (f.type != kShort && f.type != kLong)
    throw ParseError("tiff", "expected SHORT or LONG field");
  std::vector<std::uint32_t> out;
  const std::size_t size = f.type == kShort ? 2 : 4;
  for (std::uint32_t i = 0; i < f.count; ++i) {
    if (size * f.count <= 4)
      out.push_back(size == 2 ? (f.value >> (16 * i)) & 0xffff : f.value);
    else {
      const std::size_t off = std::size_t(f.value) + std::size_t(i) * size;
      out.push_back(size == 2 ? r.u16(off) : r.u32(off));
    }
  }
  return out;
}

std::vector<double> double_values(const Reader& r, const Field& f) {
  if (f.type != kDouble)
    throw ParseError("tiff", "expected DOUBLE field");
  std::vector<double> out;
  for (std::uint32_t i = 0; i < f.count; ++i)
    out.push_back(r.f64(std::size_t(f.value) + 8 * i));
  return out;
}

} // namespace

GeoRaster read_geotiff(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file)
    throw std::runtime_error("cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(file)),
                    std::istreambuf_iterator<char>());
  const Reader r(std::move(bytes));

  r.check(0, 8);
  if (r.u16(0) == 0x4d4d)
    throw ParseError("tiff", "big-endian TIFF is not supported");
  if (r.u16(0) != 0x4949 || r.u16(2) != 42)
    throw ParseError("tiff", "not a little-endian classic TIFF");

  std::map<std::uint16_t, Field> fields;
  const std::uint32_t ifd = r.u32(4);
  const std::uint16_t n = r.u16(ifd);
  for (std::uint16_t i = 0; i < n; ++i) {
    const std::size_t e = ifd + 2 + std::size_t(i) * 12;
    Field f;
    const std::uint16_t tag = r.u16(e);
    f.type = r.u16(e + 2);
    f.count = r.u32(e + 4);
    f.value = r.u32(e + 8);
    fields[tag] = f;
  }

  const auto geti = [&](std::uint16_t tag, std::uint32_t fallback,
                        bool required) -> std::uint32_t {
    auto it = fields.find(tag);
    if (it == fields.end()) {
      if (required)
        throw ParseError("tiff", "missing tag " + std::to_string(tag));
      return fallback;
    }
    return int_values(r, it->second).at(0);
  };

  if (fields.count(kTileWidth))
    throw ParseError("tiff", "tiled TIFF is not supported, use strips");
  const std::uint32_t w = geti(kImageWidth, 0, true);
  const std::uint32_t h = geti(kImageLength, 0, true);
  const std::uint32_t bits = geti(kBitsPerSample, 1, true);
  if (geti(kCompression, 1, false) != 1)
    throw ParseError("tiff", "compressed TIFF is not supported");
  if (geti(kSamplesPerPixel, 1, false) != 1)
    throw ParseError("tiff", "expected a single-band raster");
  if (geti(kSampleFormat, 1, false) != 3 || (bits != 32 && bits != 64))
    throw ParseError("tiff", "expected float32 or float64 samples");

  const auto offsets = int_values(r, fields.at(kStripOffsets));
  const auto counts = int_values(r, fields.at(kStripByteCounts));
  if (offsets.size() != counts.size() || offsets.empty())
    throw ParseError("tiff", "inconsistent strip layout");

  Tensor img({h, w});
  const std::size_t sample = bits / 8;
  std::size_t filled = 0;
  for (std::size_t s = 0; s < offsets.size(); ++s) {
    const std::size_t vals = counts[s] / sample;
    for (std::size_t i = 0; i < vals; ++i) {
      if (filled >= img.size())
        throw ParseError("tiff", "more samples than pixels");
      const std::size_t off = offsets[s] + i * sample;
      img.data()[filled++] = bits == 32 ? double(r.f32(off)) : r.f64(off);
    }
  }
  if (filled != img.size())
    throw ParseError("tiff", "fewer samples than pixels");

  GeoRaster out;
  out.values = std::move(img);
  out.geo.pixel_size = 1.0;
  out.geo.crs.clear();
  if (fields.count(kModelPixelScale)) {
    const auto s = double_values(r, fields.at(kModelPixelScale));
    if (s.size() >= 2)
      out.geo.pixel_size = s[0];
  }
  if (fields.count(kModelTiepoint)) {
    const auto t = double_values(r, fields.at(kModelTiepoint));
    if (t.size() >= 6) {
      out.geo.origin_x = t[3];
      out.geo.origin_y = t[4];
    }
  }
  if (fields.count(kGeoKeyDirectory)) {
    const auto keys = int_values(r, fields.at(kGeoKeyDirectory));
    for (std::size_t i = 4; i + 3 < keys.size(); i += 4)
      if (keys[i] == 3072 && keys[i + 1] == 0)
        out.geo.crs = "EPSG:" + std::to_string(keys[i + 3]);
  }
  return out;
}

} // namespace canopysr
