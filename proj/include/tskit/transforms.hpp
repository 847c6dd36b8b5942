#pragma once

#include <complex>
#include <span>
#include <vector>

#include "tskit/common.hpp"

namespace tskit {

using ComplexBuffer = std::vector<std::complex<double>>;

/// Iterative radix-2 FFT plan with precomputed twiddles.  Both directions are
/// unitary (scaled by 1/√L), so inverse(forward(x)) == x and norms are
/// preserved.  Plans are immutable after construction and safe to share
/// across threads.
class Fft {
 public:
  explicit Fft(index_t length);

  index_t length() const { return len_; }

  void forward(std::span<std::complex<double>> buf) const { run(buf, false); }
  void inverse(std::span<std::complex<double>> buf) const { run(buf, true); }

 private:
  void run(std::span<std::complex<double>> buf, bool inv) const;

  index_t len_;
  std::vector<index_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;  // e^{-2πik/len}, k < len/2
};

/// One-shot unitary FFT; length must be a power of two.
ComplexBuffer fft(const ComplexBuffer& buf, bool inverse);

/// In-place Walsh–Hadamard transform (Sylvester ordering).  With
/// normalize = false this applies the ±1 Hadamard matrix H; with
/// normalize = true it applies H/√L, making the transform orthonormal and
/// self-inverse.  Length must be a power of two.
void fwht(std::span<double> buf, bool normalize);

inline bool is_pow2(std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Smallest power of two ≥ n (n ≥ 1).
index_t next_pow2(index_t n);

}  // namespace tskit
