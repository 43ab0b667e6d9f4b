#pragma once

#include <stdexcept>
#include <string>

namespace canopysr {

// Bad user input: malformed config, unknown keys, unparsable CLI values.
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structured parse failure in a container/raster file; names the field.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& field, const std::string& what)
      : std::runtime_error("parse error in field '" + field + "': " + what), field(field) {}
  std::string field;
};

// Series shorter than the minimum observation count after filtering.
struct TooFewObservations : std::runtime_error {
  explicit TooFewObservations(int count, int minimum)
      : std::runtime_error("time series has " + std::to_string(count) +
                           " observations, minimum is " + std::to_string(minimum)),
        count(count), minimum(minimum) {}
  int count;
  int minimum;
};

// Day-of-year outside [1, 366].
struct DateOutOfRange : std::runtime_error {
  explicit DateOutOfRange(long long doy)
      : std::runtime_error("day-of-year " + std::to_string(doy) + " outside [1, 366]"),
        doy(doy) {}
  long long doy;
};

} // namespace canopysr
