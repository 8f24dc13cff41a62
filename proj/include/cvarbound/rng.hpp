#pragma once

// Counter-based uniform stream, "splitmix64-ctr-v1".
//
//   seed     = mix(master_seed ^ mix(stream_id + 0x9E3779B97F4A7C15))   (derive_seed)
//   key      = mix(seed)
//   draw(i)  = mix(key + (i + 1) * 0x9E3779B97F4A7C15)
//   uniform  = ((draw >> 11) + 0.5) * 2^-53            (strictly inside (0, 1))
//
// where mix is the SplitMix64 finaliser. Draw i depends only on (key, i), so
// streams are reproducible across platforms and independent of scheduling.

#include <cstdint>

namespace cvarbound {

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed for sub-stream `stream_id` of `master_seed`.
inline constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream_id) noexcept {
  return splitmix64_mix(master_seed ^ splitmix64_mix(stream_id + 0x9E3779B97F4A7C15ULL));
}

class CounterRng {
 public:
  static constexpr const char* kName = "splitmix64-ctr-v1";

  explicit constexpr CounterRng(std::uint64_t seed) noexcept : key_(splitmix64_mix(seed)) {}

  constexpr std::uint64_t bits(std::uint64_t index) const noexcept {
    return splitmix64_mix(key_ + (index + 1) * 0x9E3779B97F4A7C15ULL);
  }

  constexpr double uniform(std::uint64_t index) const noexcept {
    return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

}  // namespace cvarbound
