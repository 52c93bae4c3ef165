#pragma once

#include <cstdint>

namespace lem {

// Counter-based per-stream generator. Each (seed, streamId) pair owns an
// independent draw sequence, so parallel rollouts reproduce bit-identically
// regardless of scheduling or worker count.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(mix(seed) ^ rotl(mix(stream_id + 0x632BE59BD9B4E019ULL), 27)), counter_(0) {}

  std::uint64_t next_u64() {
    counter_ += 0x9E3779B97F4A7C15ULL;
    return mix(counter_ ^ key_);
  }

  // Uniform in [0, 1), 53-bit mantissa. Integer path only; stable across platforms.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  // SplitMix64 finalizer (Stafford mix13).
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace lem
