#pragma once

#include "canopysr/patch.hpp"

namespace canopysr {

// Axis-aligned map-coordinate rectangle.
struct Extent {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

// Even-odd-rule containment test.
bool point_in_polygon(double x, double y, const Polygon& poly);

// Grids the 95th elevation percentile of vegetation-class points per pixel.
// Pixels with no vegetation points or a percentile below 1.5 m, and pixels
// whose center lies in a crop parcel with a percentile below 5 m, are zeroed
// and masked out. The extent must be non-empty and aligned to the resolution
// grid; non-finite point heights are rejected.
ReferenceRaster rasterize_p95(const PointCloudSample& cloud, double resolution,
                              const Extent& extent);

} // namespace canopysr
