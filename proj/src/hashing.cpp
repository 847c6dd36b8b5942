#include "tskit/hashing.hpp"

namespace tskit {

std::uint64_t hash_role(std::string_view role) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : role) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

SeedPath SeedPath::root(std::uint64_t master) {
  SeedPath s;
  s.master_ = master;
  s.value_ = mix64(master);
  return s;
}

SeedPath SeedPath::derive(std::string_view role, std::uint64_t level, std::uint64_t index) const {
  SeedPath child = *this;
  child.path_.push_back(PathSegment{std::string(role), level, index});
  std::uint64_t v = value_;
  v = mix64(v ^ hash_role(role));
  v = mix64(v ^ level);
  v = mix64(v ^ index);
  child.value_ = v;
  return child;
}

std::uint64_t SeedStream::next_field61() {
  for (;;) {
    const std::uint64_t v = next_u64() >> 3;  // uniform 61-bit
    if (v < KWiseHash::kPrime) return v;
  }
}

namespace {

inline std::uint64_t mulmod61(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 t = static_cast<unsigned __int128>(a) * b;
  std::uint64_t r = static_cast<std::uint64_t>(t & KWiseHash::kPrime) +
                    static_cast<std::uint64_t>(t >> 61);
  if (r >= KWiseHash::kPrime) r -= KWiseHash::kPrime;
  return r;
}

inline std::uint64_t addmod61(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = a + b;  // both < 2^61, no overflow
  if (r >= KWiseHash::kPrime) r -= KWiseHash::kPrime;
  return r;
}

}  // namespace

KWiseHash::KWiseHash(unsigned k, std::uint64_t range, const SeedPath& seed) : range_(range) {
  if (k == 0) throw DimensionError("KWiseHash: k must be positive");
  if (range == 0 || range > (std::uint64_t{1} << 61)) {
    throw DimensionError("KWiseHash: range out of (0, 2^61]");
  }
  SeedStream stream(seed);
  coeff_.resize(k);
  for (auto& c : coeff_) c = stream.next_field61();
}

std::uint64_t KWiseHash::eval_field(std::uint64_t x) const {
  const std::uint64_t xm = x % kPrime;
  std::uint64_t acc = coeff_.back();
  for (index_t i = coeff_.size(); i-- > 1;) {
    acc = addmod61(mulmod61(acc, xm), coeff_[i - 1]);
  }
  return acc;
}

}  // namespace tskit
