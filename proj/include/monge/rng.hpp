#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace monge {

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_keys(std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = 0x6A09E667F3BCC909ull;
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k));
  return h;
}

/// Counter-based uniform in [0, 1): a pure function of its keys.
constexpr double counter_uniform(std::initializer_list<std::uint64_t> keys) noexcept {
  return static_cast<double>(hash_keys(keys) >> 11) * 0x1.0p-53;
}

/// Engine for the `draw`-th batch of a stream rooted at `seed`.
inline std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t draw) {
  return std::mt19937_64(hash_keys({seed, draw}));
}

}  // namespace monge
