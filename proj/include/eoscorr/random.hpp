#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "eoscorr/errors.hpp"

namespace eoscorr {

// Structured label of a random sub-stream: module/purpose name plus up to three
// numeric coordinates (channel, tau index, block index). Distinct labels give
// statistically independent streams for the same master seed.
struct StreamId {
  std::string module;
  std::uint64_t channel = 0;
  std::uint64_t tau_index = 0;
  std::uint64_t block = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Seed derivation: FNV-1a over the structured id mixed with the master seed
// through splitmix64 finalization rounds, feeding xoshiro256++. Not a
// cryptographic hash; 64-bit practical collision avoidance for the stream
// labels this project uses. Bit-stable across platforms and runs.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, const StreamId& id) {
    if (id.module.empty()) throw NumericalError("RandomStream: empty stream id");
    std::uint64_t x = master_seed;
    x ^= detail::fnv1a64(id.module);
    (void)detail::splitmix64(x);
    x ^= 0x9e6c63d0876a9a47ULL ^ id.channel;
    (void)detail::splitmix64(x);
    x ^= 0xd2b74407b1ce6e93ULL ^ id.tau_index;
    (void)detail::splitmix64(x);
    x ^= 0xe7037ed1a0b428dbULL ^ id.block;
    for (auto& w : state_) w = detail::splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Box-Muller pair of independent standard normals. The polar-free form keeps
  // the draw count per call fixed (two uniforms), which pins stream alignment.
  std::pair<double, double> normal_pair() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    auto [a, b] = normal_pair();
    cached_ = b;
    have_cached_ = true;
    return a;
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  std::uint64_t state_[4] = {};
  double cached_ = 0.0;
  bool have_cached_ = false;
};

inline RandomStream derive_stream(std::uint64_t master_seed, const StreamId& id) {
  return RandomStream(master_seed, id);
}

// Stateless hash-to-unit helper for per-block phase draws: uniform in [0, 1)
// determined entirely by (master_seed, id). Same contract as deriving a stream
// and taking its first uniform, but cheap enough to call per block per tone.
inline double unit_hash(std::uint64_t master_seed, std::string_view module,
                        std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t x = master_seed;
  x ^= detail::fnv1a64(module);
  (void)detail::splitmix64(x);
  x ^= 0x9e6c63d0876a9a47ULL ^ a;
  (void)detail::splitmix64(x);
  x ^= 0xd2b74407b1ce6e93ULL ^ b;
  (void)detail::splitmix64(x);
  x ^= 0xe7037ed1a0b428dbULL ^ c;
  return static_cast<double>(detail::splitmix64(x) >> 11) * 0x1.0p-53;
}

}  // namespace eoscorr
