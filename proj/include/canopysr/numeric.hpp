#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace canopysr {

// Percentile by linear interpolation between the two closest order
// statistics of an ascending-sorted range: rank = (n-1)*q. The same
// convention serves the rasterizer and the quartile statistics.
template <typename It>
double interpolated_percentile(It first, It last, double q) {
  const std::ptrdiff_t n = last - first;
  if (n <= 0)
    throw std::invalid_argument("percentile of an empty range");
  if (q < 0.0 || q > 1.0)
    throw std::invalid_argument("percentile fraction outside [0, 1]");
  const double rank = double(n - 1) * q;
  const std::ptrdiff_t lo = std::ptrdiff_t(std::floor(rank));
  const double frac = rank - double(lo);
  if (lo + 1 >= n)
    return double(first[n - 1]);
  return double(first[lo]) + frac * (double(first[lo + 1]) - double(first[lo]));
}

} // namespace canopysr
