#include "canopysr/container.hpp"

#include <cstring>
#include <fstream>

#include "canopysr/errors.hpp"

namespace canopysr {

namespace {
constexpr char kMagic[8] = {'C', 'S', 'R', 'B', 'I', 'N', '0', '1'};

std::size_t dtype_size(const std::string& dtype) {
  if (dtype == "f8" || dtype == "i8")
    return 8;
  if (dtype == "u1")
    return 1;
  throw ParseError("dtype", "unsupported dtype '" + dtype + "'");
}
} // namespace

void Container::add_f64(const std::string& name, const double* data,
                        std::vector<std::size_t> shape) {
  NamedArray a{name, "f8", std::move(shape), {}};
  a.raw.resize(a.count() * 8);
  std::memcpy(a.raw.data(), data, a.raw.size());
  arrays_.push_back(std::move(a));
}

void Container::add_i64(const std::string& name, const std::int64_t* data,
                        std::vector<std::size_t> shape) {
  NamedArray a{name, "i8", std::move(shape), {}};
  a.raw.resize(a.count() * 8);
  std::memcpy(a.raw.data(), data, a.raw.size());
  arrays_.push_back(std::move(a));
}

void Container::add_u8(const std::string& name, const std::uint8_t* data,
                       std::vector<std::size_t> shape) {
  NamedArray a{name, "u1", std::move(shape), {}};
  a.raw.assign(data, data + a.count());
  arrays_.push_back(std::move(a));
}

bool Container::has(const std::string& name) const {
  for (const auto& a : arrays_)
    if (a.name == name)
      return true;
  return false;
}

const NamedArray& Container::get(const std::string& name) const {
  for (const auto& a : arrays_)
    if (a.name == name)
      return a;
  throw ParseError(name, "array not present in container");
}

Tensor Container::get_f64(const std::string& name) const {
  const NamedArray& a = get(name);
  if (a.dtype != "f8")
    throw ParseError(name, "expected dtype f8, found " + a.dtype);
  Tensor t(a.shape);
  std::memcpy(t.data(), a.raw.data(), a.raw.size());
  return t;
}

std::vector<std::int64_t> Container::get_i64(const std::string& name) const {
  const NamedArray& a = get(name);
  if (a.dtype != "i8")
    throw ParseError(name, "expected dtype i8, found " + a.dtype);
  std::vector<std::int64_t> v(a.count());
  std::memcpy(v.data(), a.raw.data(), a.raw.size());
  return v;
}

std::vector<std::uint8_t> Container::get_u8(const std::string& name) const {
  const NamedArray& a = get(name);
  if (a.dtype != "u1")
    throw ParseError(name, "expected dtype u1, found " + a.dtype);
  return a.raw;
}

void Container::write(const std::string& path) const {
  nlohmann::json header;
  header["kind"] = kind;
  header["meta"] = meta;
  auto arrs = nlohmann::json::array();
  for (const auto& a : arrays_) {
    nlohmann::json e;
    e["name"] = a.name;
    e["dtype"] = a.dtype;
    e["shape"] = a.shape;
    arrs.push_back(std::move(e));
  }
  header["arrays"] = std::move(arrs);
  const std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(kMagic, 8);
  const std::uint64_t hlen = hs.size();
  out.write(reinterpret_cast<const char*>(&hlen), 8);
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& a : arrays_)
    out.write(reinterpret_cast<const char*>(a.raw.data()),
              static_cast<std::streamsize>(a.raw.size()));
  if (!out)
    throw std::runtime_error("write failed for '" + path + "'");
}

Container Container::read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw ParseError("magic", "not a container file: " + path);
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), 8);
  if (!in || hlen == 0 || hlen > (1ull << 30))
    throw ParseError("header_length", "corrupt header length");
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!in)
    throw ParseError("header", "truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hs);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("header", e.what());
  }

  Container c;
  c.kind = header.value("kind", "");
  c.meta = header.value("meta", nlohmann::json::object());
  if (!header.contains("arrays") || !header["arrays"].is_array())
    throw ParseError("arrays", "missing array index");
  for (const auto& e : header["arrays"]) {
    NamedArray a;
    try {
      a.name = e.at("name").get<std::string>();
      a.dtype = e.at("dtype").get<std::string>();
      a.shape = e.at("shape").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError("arrays", ex.what());
    }
    a.raw.resize(a.count() * dtype_size(a.dtype));
    in.read(reinterpret_cast<char*>(a.raw.data()),
            static_cast<std::streamsize>(a.raw.size()));
    if (!in)
      throw ParseError(a.name, "truncated array payload");
    c.arrays_.push_back(std::move(a));
  }
  return c;
}

} // namespace canopysr
