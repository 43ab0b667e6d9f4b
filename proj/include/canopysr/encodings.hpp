// Date and angle encodings.
//
// Acquisition dates are day-of-year values (1-based, year dropped). Optical
// dates are normalized relative to January 1st and the reference (LiDAR)
// date relative to July 1st, so the offsets express position in the seasonal
// cycle. Both offsets feed the same sinusoidal positional encoding, which
// keeps the two modalities in one temporal representation space.
#pragma once

#include <array>
#include <vector>

namespace canopysr {

// Day-of-year anchors (non-leap calendar).
constexpr int kDoyJan1 = 1;
constexpr int kDoyJul1 = 182;
constexpr int kDoyJul1Leap = 183;
constexpr int kDoyMay1 = 121;
constexpr int kDoyOct31 = 304;

// Calendar day-of-year for a (year, month, day) date, leap-aware.
int day_of_year(int year, int month, int day);
bool is_leap_year(int year);

// Offset in days from January 1st; throws DateOutOfRange outside [1, 366].
int normalize_doy_s2(int doy);

// Signed offset in days from July 1st (negative before it).
int normalize_doy_lidar(int doy, bool leap_year = false);

// Sinusoidal positional encoding of a day offset:
//   p[2k]   = sin(offset / tau^(2k/d))
//   p[2k+1] = cos(offset / tau^(2k/d)),  k = 0 .. d/2-1.
// d must be even, tau > 0.
std::vector<double> positional_encoding(double offset, int d, double tau);

// Trigonometric encoding of sun/view angles (radians):
//   [cos sun_zenith, cos sun_azimuth, sin sun_azimuth,
//    cos view_zenith, cos view_azimuth, sin view_azimuth]
// Invariant under 2*pi azimuth shifts; every component in [-1, 1].
std::array<double, 6> encode_angles(double sun_zenith, double sun_azimuth,
                                    double view_zenith, double view_azimuth);

} // namespace canopysr
