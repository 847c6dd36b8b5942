#include "tskit/base_sketches.hpp"

#include <algorithm>
#include <cmath>

namespace tskit {

namespace {

void require_out(index_t expected, std::span<double> out, const char* who) {
  if (out.size() != expected) {
    throw DimensionError(std::string(who) + ": output buffer length mismatch");
  }
  std::fill(out.begin(), out.end(), 0.0);
}

void require_in(index_t expected, index_t got, const char* who) {
  if (got != expected) throw DimensionError(std::string(who) + ": input dimension mismatch");
}

/// Hadamard entry H[r][c] = (-1)^{popcount(r & c)} (Sylvester ordering).
inline double hadamard_entry(index_t r, index_t c) {
  return (__builtin_popcountll(r & c) & 1) ? -1.0 : 1.0;
}

}  // namespace

// ---------------------------------------------------------------- CountSketch

CountSketch::CountSketch(index_t d, index_t m, const SeedPath& seed)
    : d_(d),
      m_(m),
      h_(4, m, seed.derive("cs-bucket", 0, 0)),
      sigma_(seed.derive("cs-sign", 0, 0)) {
  if (d == 0 || m == 0) throw DimensionError("CountSketch: dimensions must be positive");
}

void CountSketch::apply(std::span<const double> x, std::span<double> out) const {
  require_in(d_, x.size(), "CountSketch");
  require_out(m_, out, "CountSketch");
  for (index_t i = 0; i < d_; ++i) {
    const double v = x[i];
    if (v == 0.0) continue;
    out[h_(i)] += sigma_(i) * v;
  }
}

void CountSketch::apply(const SparseVector& x, std::span<double> out) const {
  require_in(d_, x.dim, "CountSketch");
  require_out(m_, out, "CountSketch");
  for (index_t k = 0; k < x.nnz(); ++k) {
    out[h_(x.idx[k])] += sigma_(x.idx[k]) * x.val[k];
  }
}

DenseMatrix CountSketch::explicit_matrix() const {
  check_size_guard(static_cast<std::uint64_t>(m_) * d_, "CountSketch::explicit_matrix");
  DenseMatrix s(m_, d_);
  for (index_t i = 0; i < d_; ++i) s(h_(i), i) = sigma_(i);
  return s;
}

// ---------------------------------------------------------------------- Osnap

Osnap::Osnap(index_t d, index_t m, index_t s, const SeedPath& seed, Variant variant)
    : d_(d),
      m_(m),
      s_(s),
      variant_(variant),
      seed_(seed),
      scale_(1.0 / std::sqrt(static_cast<double>(s))) {
  if (d == 0 || m == 0) throw DimensionError("Osnap: dimensions must be positive");
  if (s == 0 || s > m) throw DimensionError("Osnap: sparsity must satisfy 1 <= s <= m");
}

void Osnap::column_pattern(index_t j, std::vector<index_t>& rows, std::vector<int>& signs) const {
  rows.clear();
  signs.clear();
  SeedStream stream(seed_.derive("osnap-col", 0, j));
  if (variant_ == Variant::ExactSparsity) {
    // Partial Fisher–Yates over [0, m) tracked sparsely, so cost is O(s²)
    // worst case (s is small) and independent of m.
    std::vector<std::pair<index_t, index_t>> moved;  // position -> current value
    auto value_at = [&](index_t pos) {
      for (const auto& kv : moved) {
        if (kv.first == pos) return kv.second;
      }
      return pos;
    };
    auto set_at = [&](index_t pos, index_t v) {
      for (auto& kv : moved) {
        if (kv.first == pos) {
          kv.second = v;
          return;
        }
      }
      moved.emplace_back(pos, v);
    };
    rows.reserve(s_);
    for (index_t t = 0; t < s_; ++t) {
      const index_t r = t + stream.next_below(m_ - t);
      const index_t vt = value_at(t);
      const index_t vr = value_at(r);
      rows.push_back(vr);
      set_at(r, vt);
      set_at(t, vr);
    }
    std::sort(rows.begin(), rows.end());
    signs.reserve(s_);
    for (index_t t = 0; t < s_; ++t) signs.push_back(stream.next_sign());
  } else {
    for (index_t r = 0; r < m_; ++r) {
      if (stream.next_below(m_) < s_) {
        rows.push_back(r);
        signs.push_back(stream.next_sign());
      }
    }
  }
}

void Osnap::apply(std::span<const double> x, std::span<double> out) const {
  require_in(d_, x.size(), "Osnap");
  require_out(m_, out, "Osnap");
  std::vector<index_t> rows;
  std::vector<int> signs;
  for (index_t j = 0; j < d_; ++j) {
    const double v = x[j];
    if (v == 0.0) continue;
    column_pattern(j, rows, signs);
    for (index_t t = 0; t < rows.size(); ++t) out[rows[t]] += signs[t] * scale_ * v;
  }
}

void Osnap::apply(const SparseVector& x, std::span<double> out) const {
  require_in(d_, x.dim, "Osnap");
  require_out(m_, out, "Osnap");
  std::vector<index_t> rows;
  std::vector<int> signs;
  for (index_t k = 0; k < x.nnz(); ++k) {
    column_pattern(x.idx[k], rows, signs);
    for (index_t t = 0; t < rows.size(); ++t) out[rows[t]] += signs[t] * scale_ * x.val[k];
  }
}

DenseMatrix Osnap::explicit_matrix() const {
  check_size_guard(static_cast<std::uint64_t>(m_) * d_, "Osnap::explicit_matrix");
  DenseMatrix s(m_, d_);
  std::vector<index_t> rows;
  std::vector<int> signs;
  for (index_t j = 0; j < d_; ++j) {
    column_pattern(j, rows, signs);
    for (index_t t = 0; t < rows.size(); ++t) s(rows[t], j) = signs[t] * scale_;
  }
  return s;
}

// ----------------------------------------------------------------------- Srht

Srht::Srht(index_t d, index_t m, const SeedPath& seed) : d_(d), m_(m) {
  if (d == 0 || m == 0) throw DimensionError("Srht: dimensions must be positive");
  d_pad_ = next_pow2(d);
  SeedStream dstream(seed.derive("srht-diag", 0, 0));
  dsign_.resize(d_pad_);
  for (auto& s : dsign_) s = dstream.next_sign();
  SeedStream rstream(seed.derive("srht-rows", 0, 0));
  rows_.resize(m_);
  for (auto& r : rows_) r = rstream.next_below(d_pad_);
}

void Srht::apply(std::span<const double> x, std::span<double> out) const {
  require_in(d_, x.size(), "Srht");
  require_out(m_, out, "Srht");
  std::vector<double> buf(d_pad_, 0.0);
  for (index_t i = 0; i < d_; ++i) buf[i] = dsign_[i] * x[i];
  fwht(buf, false);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m_));
  for (index_t r = 0; r < m_; ++r) out[r] = scale * buf[rows_[r]];
}

void Srht::apply(const SparseVector& x, std::span<double> out) const {
  require_in(d_, x.dim, "Srht");
  require_out(m_, out, "Srht");
  std::vector<double> buf(d_pad_, 0.0);
  for (index_t k = 0; k < x.nnz(); ++k) buf[x.idx[k]] = dsign_[x.idx[k]] * x.val[k];
  fwht(buf, false);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m_));
  for (index_t r = 0; r < m_; ++r) out[r] = scale * buf[rows_[r]];
}

DenseMatrix Srht::explicit_matrix() const {
  check_size_guard(static_cast<std::uint64_t>(m_) * d_, "Srht::explicit_matrix");
  DenseMatrix s(m_, d_);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m_));
  for (index_t i = 0; i < d_; ++i) {
    for (index_t r = 0; r < m_; ++r) {
      s(r, i) = scale * hadamard_entry(rows_[r], i) * dsign_[i];
    }
  }
  return s;
}

// -------------------------------------------------------------- TensorSketch2

TensorSketch2::TensorSketch2(index_t side, index_t m, const SeedPath& seed)
    : side_(side),
      m_(m),
      h1_(4, m, seed.derive("ts2-bucket", 0, 1)),
      h2_(4, m, seed.derive("ts2-bucket", 0, 2)),
      s1_(seed.derive("ts2-sign", 0, 1)),
      s2_(seed.derive("ts2-sign", 0, 2)),
      fft_(m) {
  if (side == 0) throw DimensionError("TensorSketch2: side dimension must be positive");
  if (!is_pow2(m)) throw DimensionError("TensorSketch2: m must be a power of two");
}

void TensorSketch2::apply_pair(std::span<const double> u, std::span<const double> v,
                               std::span<double> out) const {
  require_in(side_, u.size(), "TensorSketch2");
  require_in(side_, v.size(), "TensorSketch2");
  require_out(m_, out, "TensorSketch2");
  ComplexBuffer a(m_, 0.0), b(m_, 0.0);
  for (index_t i = 0; i < side_; ++i) {
    if (u[i] != 0.0) a[h1_(i)] += s1_(i) * u[i];
    if (v[i] != 0.0) b[h2_(i)] += s2_(i) * v[i];
  }
  fft_.forward(a);
  fft_.forward(b);
  for (index_t r = 0; r < m_; ++r) a[r] *= b[r];
  fft_.inverse(a);
  // The transforms are unitary, so the cyclic-convolution theorem picks up a
  // √m: conv(a, b) = √m · F⁻¹(F(a) ∘ F(b)).
  const double scale = std::sqrt(static_cast<double>(m_));
  for (index_t r = 0; r < m_; ++r) out[r] = scale * a[r].real();
}

DenseMatrix TensorSketch2::explicit_matrix() const {
  check_size_guard(static_cast<std::uint64_t>(m_) * side_ * side_,
                   "TensorSketch2::explicit_matrix");
  DenseMatrix s(m_, side_ * side_);
  for (index_t j = 0; j < side_; ++j) {
    for (index_t i = 0; i < side_; ++i) {
      const index_t r = (h1_(i) + h2_(j)) % m_;
      s(r, i + side_ * j) = s1_(i) * s2_(j);
    }
  }
  return s;
}

// ----------------------------------------------------------------- TensorSrht

TensorSrht::TensorSrht(index_t side, index_t m, const SeedPath& seed) : side_(side), m_(m) {
  if (side == 0 || m == 0) throw DimensionError("TensorSrht: dimensions must be positive");
  d_pad_ = next_pow2(side);
  SeedStream d1(seed.derive("tsrht-diag", 0, 1));
  SeedStream d2(seed.derive("tsrht-diag", 0, 2));
  dsign1_.resize(d_pad_);
  dsign2_.resize(d_pad_);
  for (auto& s : dsign1_) s = d1.next_sign();
  for (auto& s : dsign2_) s = d2.next_sign();
  SeedStream rstream(seed.derive("tsrht-rows", 0, 0));
  rows1_.resize(m_);
  rows2_.resize(m_);
  for (index_t r = 0; r < m_; ++r) {
    rows1_[r] = rstream.next_below(d_pad_);
    rows2_[r] = rstream.next_below(d_pad_);
  }
}

void TensorSrht::apply_pair(std::span<const double> u, std::span<const double> v,
                            std::span<double> out) const {
  require_in(side_, u.size(), "TensorSrht");
  require_in(side_, v.size(), "TensorSrht");
  require_out(m_, out, "TensorSrht");
  std::vector<double> a(d_pad_, 0.0), b(d_pad_, 0.0);
  for (index_t i = 0; i < side_; ++i) {
    a[i] = dsign1_[i] * u[i];
    b[i] = dsign2_[i] * v[i];
  }
  fwht(a, false);
  fwht(b, false);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m_));
  for (index_t r = 0; r < m_; ++r) out[r] = scale * a[rows1_[r]] * b[rows2_[r]];
}

DenseMatrix TensorSrht::explicit_matrix() const {
  check_size_guard(static_cast<std::uint64_t>(m_) * side_ * side_,
                   "TensorSrht::explicit_matrix");
  DenseMatrix s(m_, side_ * side_);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m_));
  for (index_t j = 0; j < side_; ++j) {
    for (index_t i = 0; i < side_; ++i) {
      const index_t c = i + side_ * j;
      for (index_t r = 0; r < m_; ++r) {
        s(r, c) = scale * hadamard_entry(rows1_[r], i) * dsign1_[i] *
                  hadamard_entry(rows2_[r], j) * dsign2_[j];
      }
    }
  }
  return s;
}

}  // namespace tskit
