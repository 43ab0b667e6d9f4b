#include "canopysr/rasterize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "canopysr/errors.hpp"
#include "canopysr/numeric.hpp"

namespace canopysr {

bool point_in_polygon(double x, double y, const Polygon& poly) {
  const auto& r = poly.ring;
  const std::size_t n = r.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const bool crosses = (r[i][1] > y) != (r[j][1] > y);
    if (crosses &&
        x < (r[j][0] - r[i][0]) * (y - r[i][1]) / (r[j][1] - r[i][1]) + r[i][0])
      inside = !inside;
  }
  return inside;
}

ReferenceRaster rasterize_p95(const PointCloudSample& cloud, double resolution,
                              const Extent& extent) {
  if (resolution <= 0)
    throw std::invalid_argument("resolution must be positive");
  const double ex = extent.max_x - extent.min_x;
  const double ey = extent.max_y - extent.min_y;
  if (ex <= 0 || ey <= 0)
    throw std::invalid_argument("empty extent");
  const double wq = ex / resolution, hq = ey / resolution;
  if (std::abs(wq - std::round(wq)) > 1e-9 || std::abs(hq - std::round(hq)) > 1e-9)
    throw std::invalid_argument("extent not aligned to the resolution grid");
  const int w = int(std::llround(wq));
  const int h = int(std::llround(hq));

  // Serial bucketing keeps per-pixel point order deterministic.
  std::vector<std::vector<double>> bins(std::size_t(h) * w);
  for (const auto& p : cloud.points) {
    if (!std::isfinite(p.z))
      throw ParseError("z", "non-finite point elevation");
    if (p.cls != PointClass::vegetation)
      continue;
    if (p.x < extent.min_x || p.x >= extent.max_x || p.y <= extent.min_y ||
        p.y > extent.max_y)
      continue;
    const int col = int(std::floor((p.x - extent.min_x) / resolution));
    const int row = int(std::floor((extent.max_y - p.y) / resolution));
    bins[std::size_t(row) * w + col].push_back(p.z);
  }

  ReferenceRaster out;
  out.heights = Tensor({std::size_t(h), std::size_t(w)});
  out.valid_mask.assign(std::size_t(h) * w, 0);
  out.resolution = resolution;
  out.geo = GeoRef{extent.min_x, extent.max_y, resolution, out.geo.crs};

#pragma omp parallel for schedule(static)
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      auto& zs = bins[std::size_t(row) * w + col];
      if (zs.empty())
        continue;
      std::sort(zs.begin(), zs.end());
      const double p95 = interpolated_percentile(zs.begin(), zs.end(), 0.95);
      if (p95 < 1.5)
        continue;
      if (p95 < 5.0) {
        const double cx = extent.min_x + (col + 0.5) * resolution;
        const double cy = extent.max_y - (row + 0.5) * resolution;
        bool in_parcel = false;
        for (const auto& poly : cloud.crop_parcels)
          if (point_in_polygon(cx, cy, poly)) {
            in_parcel = true;
            break;
          }
        if (in_parcel)
          continue;
      }
      out.heights.at(std::size_t(row), std::size_t(col)) = p95;
      out.valid_mask[std::size_t(row) * w + col] = 1;
    }
  }
  return out;
}

} // namespace canopysr
