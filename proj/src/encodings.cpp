#include "canopysr/encodings.hpp"

#include <cmath>
#include <stdexcept>

#include "canopysr/errors.hpp"

namespace canopysr {

bool is_leap_year(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int day_of_year(int year, int month, int day) {
  static const int cum[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
  if (month < 1 || month > 12 || day < 1 || day > 31)
    throw ConfigError("invalid calendar date");
  int doy = cum[month - 1] + day;
  if (month > 2 && is_leap_year(year))
    ++doy;
  return doy;
}

namespace {
void check_doy(int doy) {
  if (doy < 1 || doy > 366)
    throw DateOutOfRange(doy);
}
} // namespace

int normalize_doy_s2(int doy) {
  check_doy(doy);
  return doy - kDoyJan1;
}

int normalize_doy_lidar(int doy, bool leap_year) {
  check_doy(doy);
  return doy - (leap_year ? kDoyJul1Leap : kDoyJul1);
}

std::vector<double> positional_encoding(double offset, int d, double tau) {
  if (d <= 0 || d % 2 != 0)
    throw std::invalid_argument("positional_encoding: dimension must be positive and even");
  if (!(tau > 0.0))
    throw std::invalid_argument("positional_encoding: tau must be positive");
  std::vector<double> p(static_cast<std::size_t>(d));
  for (int k = 0; k < d / 2; ++k) {
    const double denom = std::pow(tau, 2.0 * k / d);
    p[2 * k] = std::sin(offset / denom);
    p[2 * k + 1] = std::cos(offset / denom);
  }
  return p;
}

std::array<double, 6> encode_angles(double sun_zenith, double sun_azimuth,
                                    double view_zenith, double view_azimuth) {
  for (double a : {sun_zenith, sun_azimuth, view_zenith, view_azimuth})
    if (!std::isfinite(a))
      throw std::invalid_argument("encode_angles: non-finite angle");
  return {std::cos(sun_zenith), std::cos(sun_azimuth), std::sin(sun_azimuth),
          std::cos(view_zenith), std::cos(view_azimuth), std::sin(view_azimuth)};
}

} // namespace canopysr
