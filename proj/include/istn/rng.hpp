// SPDX-License-Identifier: Apache-2.0
#pragma once

// Self-contained xoshiro256++ streams with counter-based key derivation.
// Standard-library distributions are avoided so that draws are identical
// across compilers and library versions; result files depend only on the
// master seed and the derivation path.

#include <cstdint>
#include <initializer_list>

#include "istn/common.hpp"

namespace istn {

/// splitmix64 finalizer; used both for seeding and key mixing.
inline constexpr uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Hierarchical stream key. Children are derived by hashing tags into the
/// parent state, so adding new consumers never perturbs existing streams.
struct StreamKey {
  uint64_t state = 0;

  [[nodiscard]] constexpr StreamKey child(uint64_t tag) const {
    return StreamKey{mix64(state ^ mix64(tag ^ 0xa5a5a5a55a5a5a5aULL))};
  }
  [[nodiscard]] constexpr StreamKey child(std::initializer_list<uint64_t> tags) const {
    StreamKey k = *this;
    for (uint64_t t : tags) k = k.child(t);
    return k;
  }
};

/// Purpose tags for stream derivation (values are part of the fixture format).
enum class StreamTag : uint64_t {
  geometry = 101,
  large_scale = 102,
  small_scale = 103,
  sensing = 104,
  shadowing = 105,
  method = 106,
  snapshot = 107,
  prediction = 108,
};

inline constexpr StreamKey master_key(uint64_t seed) { return StreamKey{mix64(seed ^ 0x1905e6f0c11ad9e3ULL)}; }

class RngStream {
 public:
  RngStream() : RngStream(StreamKey{0}) {}
  explicit RngStream(StreamKey key) {
    uint64_t z = key.state;
    for (auto& si : s_) {
      z = mix64(z);
      si = z;
    }
    // avoid the all-zero state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// uniform on [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// integer uniform on [0, n)
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

  bool bernoulli(double p) { return uniform() < p; }

  /// standard normal via Box-Muller (cached spare for determinism and speed)
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * kPi * u2;
    spare_ = r * std::sin(ang);
    has_spare_ = true;
    return r * std::cos(ang);
  }

  /// circularly-symmetric complex normal with unit total variance
  cplx cnormal() {
    const double sc = 0.7071067811865476;  // 1/sqrt(2)
    const double re = normal();
    const double im = normal();
    return {sc * re, sc * im};
  }

 private:
  static constexpr uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4] = {};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline RngStream make_stream(uint64_t master_seed, std::initializer_list<uint64_t> path) {
  return RngStream(master_key(master_seed).child(path));
}

inline constexpr uint64_t tag(StreamTag t) { return static_cast<uint64_t>(t); }

/// FNV-1a over a string; used to key method-specific substreams by name.
inline constexpr uint64_t hash_name(const char* s) {
  uint64_t h = 14695981039346656037ULL;
  while (*s) {
    h ^= static_cast<uint64_t>(*s++);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace istn
