#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tskit/common.hpp"

namespace tskit {

/// 64-bit finisher with fixed constants; the basis of all seed derivation.
/// Stable across platforms and runs by construction.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// FNV-1a over the role string, so distinct roles perturb the stream even at
/// equal (level, index).
std::uint64_t hash_role(std::string_view role);

struct PathSegment {
  std::string role;
  std::uint64_t level = 0;
  std::uint64_t index = 0;
};

/// Splittable seed: a master seed plus a derivation path of
/// (role, level, index) triples.  Deriving folds each segment through mix64,
/// so any node in a sketch tree can rebuild its randomness from the master
/// seed alone.  Distinct paths give distinct streams with overwhelming
/// probability.
class SeedPath {
 public:
  static SeedPath root(std::uint64_t master);

  SeedPath derive(std::string_view role, std::uint64_t level, std::uint64_t index) const;

  std::uint64_t master() const { return master_; }
  std::uint64_t value() const { return value_; }
  const std::vector<PathSegment>& path() const { return path_; }

 private:
  std::uint64_t master_ = 0;
  std::uint64_t value_ = 0;
  std::vector<PathSegment> path_;
};

/// Deterministic stream of pseudo-random words drawn from a SeedPath value.
class SeedStream {
 public:
  explicit SeedStream(const SeedPath& seed) : state_(seed.value()) {}
  explicit SeedStream(std::uint64_t raw_state) : state_(raw_state) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, n) by multiply-shift; bias is O(n / 2^64).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Uniform in [0, 2^61 - 1), i.e. a field element; rejection-samples the
  /// (probability 2^-61) top value.
  std::uint64_t next_field61();

  /// Rademacher ±1.
  int next_sign() { return (next_u64() >> 63) ? 1 : -1; }

 private:
  std::uint64_t state_;
};

/// k-wise independent hash to [0, range): a uniformly random polynomial of
/// degree k-1 over GF(P), P = 2^61 - 1, evaluated by Horner with 128-bit
/// intermediates and branch-light Mersenne reduction.  The field value is
/// brought into [0, range) by multiply-shift rather than modulo, keeping the
/// per-bucket bias below 2^-45 + 1/P for range ≤ 2^16.
class KWiseHash {
 public:
  static constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

  KWiseHash(unsigned k, std::uint64_t range, const SeedPath& seed);

  unsigned k() const { return static_cast<unsigned>(coeff_.size()); }
  std::uint64_t range() const { return range_; }

  /// Polynomial value in [0, P).
  std::uint64_t eval_field(std::uint64_t x) const;

  /// Bucket in [0, range).
  std::uint64_t operator()(std::uint64_t x) const {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(eval_field(x)) * range_) >> 61);
  }

 private:
  std::uint64_t range_;
  std::vector<std::uint64_t> coeff_;  // coeff_[0] + coeff_[1] x + ...
};

/// Four-wise independent ±1 signs: the top bit of a k=4 KWiseHash field value.
class SignHash {
 public:
  explicit SignHash(const SeedPath& seed) : inner_(4, 2, seed) {}

  int operator()(std::uint64_t x) const {
    return (inner_.eval_field(x) >> 60) & 1 ? 1 : -1;
  }

 private:
  KWiseHash inner_;
};

}  // namespace tskit
