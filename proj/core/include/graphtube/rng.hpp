#pragma once

#include <cmath>
#include <cstdint>

namespace graphtube {

/// SplitMix64 with the fixed golden-ratio increment.  The internal state
/// after k steps is seed + k * kGamma, so any position of the stream can be
/// addressed directly without iterating.
class SplitMix64 {
 public:
  static constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  uint64_t next() { return mix(state_ += kGamma); }

  /// k-th output of the stream started at `seed`, computed in O(1).
  static uint64_t at(uint64_t seed, uint64_t k) {
    return mix(seed + (k + 1) * kGamma);
  }

 private:
  uint64_t state_;
};

/// xoshiro256** (Blackman/Vigna).  Small, fast, and with exactly
/// reproducible output across platforms, unlike <random> distributions.
class Xoshiro256StarStar {
 public:
  Xoshiro256StarStar(uint64_t s0, uint64_t s1, uint64_t s2, uint64_t s3) {
    s_[0] = s0;
    s_[1] = s1;
    s_[2] = s2;
    s_[3] = s3;
    if ((s0 | s1 | s2 | s3) == 0) s_[0] = SplitMix64::kGamma;  // all-zero state is absorbing
  }

  uint64_t next() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
};

/// Splittable per-path stream.  Path i of a batch with master seed m seeds
/// its engine with SplitMix64 outputs 4i..4i+3 of the stream keyed by m, so
/// the stream depends only on (m, i), never on scheduling or worker count.
class PathRng {
 public:
  PathRng(uint64_t master_seed, uint64_t path_index)
      : eng_(SplitMix64::at(master_seed, 4 * path_index),
             SplitMix64::at(master_seed, 4 * path_index + 1),
             SplitMix64::at(master_seed, 4 * path_index + 2),
             SplitMix64::at(master_seed, 4 * path_index + 3)) {}

  uint64_t raw() { return eng_.next(); }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(eng_.next() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double uniform01_open() {
    return (static_cast<double>(eng_.next() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the paired value is cached, so a
  /// stream's gaussian sequence is a pure function of its seed.
  double gauss() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  Xoshiro256StarStar eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace graphtube
