#pragma once

// Trained map + potential on disk.
//
// Layout (little-endian): "MFCK", version u8, flags u8 (bit0 ema, bit1 pad,
// bit2 composite, bit3 conditional), [pad_to u32], [mask len u32, f64 mask],
// map network record, [ema f64 payload], potential network record.

#include "monge/error.hpp"
#include "monge/nn/serialize.hpp"
#include "monge/solver.hpp"

#include <string>
#include <vector>

namespace monge::harness {

inline constexpr std::uint8_t kCheckpointVersion = 1;

struct Checkpoint {
  TrainedMap map;
  nn::Model potential;
};

inline std::vector<std::uint8_t> checkpoint_bytes(const TrainedMap& map, const nn::Model& potential) {
  nn::ByteWriter w;
  w.raw("MFCK");
  w.u8(kCheckpointVersion);
  std::uint8_t flags = 0;
  if (map.ema_params) flags |= 1;
  if (map.pad_to) flags |= 2;
  if (map.composite_mask) flags |= 4;
  if (map.conditional) flags |= 8;
  w.u8(flags);
  if (map.pad_to) w.u32(static_cast<std::uint32_t>(*map.pad_to));
  if (map.composite_mask) {
    w.u32(static_cast<std::uint32_t>(map.composite_mask->size()));
    for (double v : *map.composite_mask) w.f64(v);
  }
  nn::write_network(w, map.spec, map.params);
  if (map.ema_params) {
    require(map.ema_params->size() == map.params.size(), ErrorCode::kDimensionMismatch, "ema length mismatch");
    for (Eigen::Index i = 0; i < map.ema_params->size(); ++i) w.f64((*map.ema_params)[i]);
  }
  nn::write_network(w, potential.spec, potential.params);
  return w.bytes();
}

inline Checkpoint checkpoint_from_bytes(std::span<const std::uint8_t> bytes) {
  nn::ByteReader r(bytes);
  require(r.raw(4) == "MFCK", ErrorCode::kParse, "not a checkpoint (bad magic)");
  const std::uint8_t version = r.u8();
  require(version == kCheckpointVersion, ErrorCode::kParse, "unsupported checkpoint version " + std::to_string(version));
  const std::uint8_t flags = r.u8();
  require((flags & ~0x0F) == 0, ErrorCode::kParse, "unknown checkpoint flags");
  Checkpoint c;
  if (flags & 2) c.map.pad_to = static_cast<int>(r.u32());
  if (flags & 4) {
    const std::uint32_t n = r.u32();
    require(n < (1u << 24), ErrorCode::kParse, "implausible mask length");
    std::vector<double> mask(n);
    for (auto& v : mask) v = r.f64();
    c.map.composite_mask = std::move(mask);
  }
  c.map.conditional = (flags & 8) != 0;
  nn::Model m = nn::read_network(r);
  c.map.spec = m.spec;
  c.map.params = std::move(m.params);
  if (flags & 1) {
    nn::ParamVector ema(c.map.params.size());
    for (Eigen::Index i = 0; i < ema.size(); ++i) ema[i] = r.f64();
    c.map.ema_params = std::move(ema);
  }
  c.potential = nn::read_network(r);
  require(r.done(), ErrorCode::kParse, "trailing bytes after checkpoint");
  return c;
}

inline void save_checkpoint(const std::string& path, const TrainedMap& map, const nn::Model& potential) {
  nn::write_file(path, checkpoint_bytes(map, potential));
}

inline Checkpoint load_checkpoint(const std::string& path) {
  const auto bytes = nn::read_file(path);
  return checkpoint_from_bytes(bytes);
}

}  // namespace monge::harness
