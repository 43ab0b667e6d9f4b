// Binary container of named arrays plus a JSON metadata block. Used for patch
// archives and model checkpoints.
//
// Layout (little-endian):
//   bytes 0..7    magic "CSRBIN01"
//   bytes 8..15   u64 length of the JSON header
//   header        UTF-8 JSON: {"kind": ..., "meta": {...}, "arrays": [...]}
//   payload       raw array data, in header order, no padding
//
// Each arrays[] entry is {"name", "dtype", "shape"} with dtype one of
// "f8" (IEEE-754 double), "i8" (int64) or "u1" (uint8). Round trips are
// bit-exact for every dtype.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "canopysr/tensor.hpp"

namespace canopysr {

struct NamedArray {
  std::string name;
  std::string dtype;
  std::vector<std::size_t> shape;
  std::vector<std::uint8_t> raw;

  std::size_t count() const {
    std::size_t n = 1;
    for (std::size_t d : shape)
      n *= d;
    return n;
  }
};

class Container {
public:
  std::string kind;
  nlohmann::json meta = nlohmann::json::object();

  void add_f64(const std::string& name, const double* data, std::vector<std::size_t> shape);
  void add_f64(const std::string& name, const Tensor& t) {
    add_f64(name, t.data(), t.shape());
  }
  void add_i64(const std::string& name, const std::int64_t* data, std::vector<std::size_t> shape);
  void add_u8(const std::string& name, const std::uint8_t* data, std::vector<std::size_t> shape);

  bool has(const std::string& name) const;
  // Accessors throw ParseError naming the missing/mistyped field.
  const NamedArray& get(const std::string& name) const;
  Tensor get_f64(const std::string& name) const;
  std::vector<std::int64_t> get_i64(const std::string& name) const;
  std::vector<std::uint8_t> get_u8(const std::string& name) const;

  const std::vector<NamedArray>& arrays() const { return arrays_; }

  void write(const std::string& path) const;
  static Container read(const std::string& path);

private:
  std::vector<NamedArray> arrays_;
};

} // namespace canopysr
