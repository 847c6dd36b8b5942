#include "tskit/transforms.hpp"

#include <cmath>

namespace tskit {

index_t next_pow2(index_t n) {
  if (n == 0) throw DimensionError("next_pow2: n must be positive");
  index_t p = 1;
  while (p < n) {
    if (p > (index_t{1} << 62)) throw SizeError("next_pow2: overflow");
    p <<= 1;
  }
  return p;
}

Fft::Fft(index_t length) : len_(length) {
  if (!is_pow2(len_)) throw DimensionError("Fft: length must be a power of two");
  bitrev_.resize(len_);
  unsigned bits = 0;
  while ((index_t{1} << bits) < len_) ++bits;
  for (index_t i = 0; i < len_; ++i) {
    index_t r = 0;
    for (unsigned b = 0; b < bits; ++b) {
      if (i & (index_t{1} << b)) r |= index_t{1} << (bits - 1 - b);
    }
    bitrev_[i] = r;
  }
  twiddle_.resize(len_ / 2);
  for (index_t k = 0; k < len_ / 2; ++k) {
    const double ang = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(len_);
    twiddle_[k] = {std::cos(ang), std::sin(ang)};
  }
}

void Fft::run(std::span<std::complex<double>> buf, bool inv) const {
  if (buf.size() != len_) throw DimensionError("Fft: buffer length mismatch");
  for (index_t i = 0; i < len_; ++i) {
    const index_t j = bitrev_[i];
    if (i < j) std::swap(buf[i], buf[j]);
  }
  for (index_t half = 1; half < len_; half <<= 1) {
    const index_t step = len_ / (2 * half);  // twiddle stride for this stage
    for (index_t base = 0; base < len_; base += 2 * half) {
      for (index_t k = 0; k < half; ++k) {
        std::complex<double> w = twiddle_[k * step];
        if (inv) w = std::conj(w);
        const std::complex<double> t = w * buf[base + half + k];
        const std::complex<double> u = buf[base + k];
        buf[base + k] = u + t;
        buf[base + half + k] = u - t;
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(len_));
  for (auto& v : buf) v *= scale;
}

ComplexBuffer fft(const ComplexBuffer& buf, bool inverse) {
  Fft plan(buf.size());
  ComplexBuffer out = buf;
  if (inverse) {
    plan.inverse(out);
  } else {
    plan.forward(out);
  }
  return out;
}

void fwht(std::span<double> buf, bool normalize) {
  const index_t n = buf.size();
  if (!is_pow2(n)) throw DimensionError("fwht: length must be a power of two");
  for (index_t half = 1; half < n; half <<= 1) {
    for (index_t base = 0; base < n; base += 2 * half) {
      for (index_t k = 0; k < half; ++k) {
        const double a = buf[base + k];
        const double b = buf[base + half + k];
        buf[base + k] = a + b;
        buf[base + half + k] = a - b;
      }
    }
  }
  if (normalize) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : buf) v *= scale;
  }
}

}  // namespace tskit
