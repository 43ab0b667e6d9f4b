// Single-band GeoTIFF I/O for height rasters. The writer emits classic
// little-endian TIFF, one uncompressed strip of float32 samples, with
// ModelPixelScale / ModelTiepoint / GeoKeyDirectory carrying the grid
// origin, pixel size and EPSG code. The reader accepts exactly that family
// (plus float64 samples) and refuses everything else with a clear message.
// Rows follow the internal convention of y growing with the row index.
#pragma once

#include <string>

#include "canopysr/geo.hpp"
#include "canopysr/tensor.hpp"

namespace canopysr {

struct GeoRaster {
  Tensor values; // (H, W)
  GeoRef geo;
};

void write_geotiff(const std::string& path, const Tensor& img,
                   const GeoRef& geo);
GeoRaster read_geotiff(const std::string& path); // ParseError on bad input

} // namespace canopysr
