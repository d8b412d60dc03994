#pragma once

// Counter-based random streams for reproducible parallel Monte Carlo.
//
// A stream is a pure function of (master_seed, domain, index): draw n of a
// stream is mix(key + n*GAMMA), the SplitMix64 output function applied to an
// affine counter. Because no draw depends on mutable shared state, any
// replicate can be generated on any thread in any order and still produce
// the same values, which is what makes experiment reports independent of
// worker count and scheduling.

#include <cstdint>
#include <cmath>

namespace gwedge {

// Disjoint stream families. Replicate streams and auxiliary streams (for
// example the martingale-limit sampler feeding an empirical mixture) must
// never collide even when both run under the same master seed.
enum class StreamDomain : std::uint64_t {
  replicate = 0,
  martingale = 1,
  auxiliary = 2,
};

class CounterRng {
 public:
  CounterRng(std::uint64_t master_seed, StreamDomain domain, std::uint64_t index)
      : key_(derive_key(master_seed, domain, index)), counter_(0) {}

  std::uint64_t next_u64() {
    counter_ += GAMMA;
    return mix(key_ + counter_);
  }

  // Uniform on (0,1]; never returns 0 so -log(u) is always finite.
  double next_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Inverse-CDF exponential variate. rate > 0.
  double next_exponential(double rate) {
    return -std::log(next_unit()) / rate;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t GAMMA = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t derive_key(std::uint64_t master_seed, StreamDomain domain,
                                  std::uint64_t index) {
    std::uint64_t k = mix(master_seed + GAMMA);
    k = mix(k ^ (static_cast<std::uint64_t>(domain) + GAMMA));
    k = mix(k ^ (index + GAMMA));
    return k;
  }

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace gwedge
