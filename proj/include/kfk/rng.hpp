#pragma once

#include <cmath>
#include <cstdint>

namespace kfk {

/// Identifies one reproducible random stream. Identical (seed, stream_id)
/// pairs reproduce identical draw sequences on any thread layout.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// xoshiro256++ seeded from (seed, stream_id) via splitmix64 expansion.
class Rng {
 public:
  explicit Rng(RngStream id) {
    std::uint64_t sm = id.seed;
    sm ^= 0xA02BDBF7BB3C0A7ull * (id.stream_id + 1);
    s_[0] = detail::splitmix64(sm);
    s_[1] = detail::splitmix64(sm);
    sm ^= id.stream_id;
    s_[2] = detail::splitmix64(sm);
    s_[3] = detail::splitmix64(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0,1); endpoints unreachable so logs are safe.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exp(1) draw.
  double exponential() { return -std::log(uniform_open()); }

  /// N(0,1) draw, Box-Muller with pair caching.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double a = 2.0 * M_PI * uniform_open();
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace kfk
