#pragma once

#include <string>

namespace canopysr {

// Georeferencing of a north-up raster: map coordinates of the top-left corner
// of pixel (0,0), square pixel size in meters (y grows southward), and a CRS
// identifier such as "EPSG:2154".
struct GeoRef {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pixel_size = 10.0;
  std::string crs = "EPSG:2154";

  bool operator==(const GeoRef&) const = default;

  // Georeference of a sub-window starting at pixel (px, py), optionally at a
  // finer grid (pixel size divided by `factor`).
  GeoRef window(std::size_t px, std::size_t py, int factor = 1) const {
    GeoRef g = *this;
    g.origin_x = origin_x + static_cast<double>(px) * pixel_size;
    g.origin_y = origin_y - static_cast<double>(py) * pixel_size;
    g.pixel_size = pixel_size / factor;
    return g;
  }
};

} // namespace canopysr
