#pragma once

// Binary network format (all integers and floats little-endian):
//   magic "MFNN" | version u8 | input_dim u32 | output_dim u32 | hidden_count u32 |
//   hidden_dims u32[hidden_count] | activation u8 | residual u8 | dropout_p f64 |
//   condition_dim u32 | param_count u64 | params f64[param_count]

#include "monge/error.hpp"
#include "monge/nn/network.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace monge::nn {

inline constexpr std::uint8_t kFormatVersion = 1;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { put(v); }
  void u64(std::uint64_t v) { put(v); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  template <typename T>
  void put(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get<std::uint8_t>()); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    require(pos_ + n <= bytes_.size(), ErrorCode::kParse, "truncated binary record");
  }
  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline void write_network(ByteWriter& w, const NetworkSpec& spec, const ParamVector& params) {
  require(static_cast<std::size_t>(params.size()) == param_count(spec), ErrorCode::kDimensionMismatch,
          "serialize: parameter length does not match spec");
  w.raw("MFNN");
  w.u8(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(spec.input_dim));
  w.u32(static_cast<std::uint32_t>(spec.output_dim));
  w.u32(static_cast<std::uint32_t>(spec.hidden_dims.size()));
  for (int h : spec.hidden_dims) w.u32(static_cast<std::uint32_t>(h));
  w.u8(static_cast<std::uint8_t>(spec.activation));
  w.u8(spec.residual ? 1 : 0);
  w.f64(spec.dropout_p);
  w.u32(static_cast<std::uint32_t>(spec.condition_dim));
  w.u64(static_cast<std::uint64_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i) w.f64(params[i]);
}

inline Model read_network(ByteReader& r) {
  require(r.raw(4) == "MFNN", ErrorCode::kParse, "bad network magic");
  const std::uint8_t version = r.u8();
  require(version == kFormatVersion, ErrorCode::kParse, "unsupported network format version " + std::to_string(version));
  Model m;
  m.spec.input_dim = static_cast<int>(r.u32());
  m.spec.output_dim = static_cast<int>(r.u32());
  const std::uint32_t hidden = r.u32();
  require(hidden < 4096, ErrorCode::kParse, "implausible hidden layer count");
  for (std::uint32_t i = 0; i < hidden; ++i) m.spec.hidden_dims.push_back(static_cast<int>(r.u32()));
  const std::uint8_t act = r.u8();
  require(act <= 2, ErrorCode::kParse, "bad activation code");
  m.spec.activation = static_cast<Activation>(act);
  m.spec.residual = r.u8() != 0;
  m.spec.dropout_p = r.f64();
  m.spec.condition_dim = static_cast<int>(r.u32());
  m.spec.validate();
  const std::uint64_t n = r.u64();
  require(n == param_count(m.spec), ErrorCode::kParse, "parameter count does not match spec layout");
  m.params.resize(static_cast<Eigen::Index>(n));
  for (std::uint64_t i = 0; i < n; ++i) m.params[static_cast<Eigen::Index>(i)] = r.f64();
  return m;
}

inline std::vector<std::uint8_t> to_bytes(const NetworkSpec& spec, const ParamVector& params) {
  ByteWriter w;
  write_network(w, spec, params);
  return w.bytes();
}

inline Model from_bytes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  Model m = read_network(r);
  require(r.done(), ErrorCode::kParse, "trailing bytes after network record");
  return m;
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::kIo, "write failed for '" + path + "'");
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace monge::nn
