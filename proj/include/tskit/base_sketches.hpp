#pragma once

#include <memory>
#include <span>
#include <vector>

#include "tskit/hashing.hpp"
#include "tskit/matrix.hpp"
#include "tskit/transforms.hpp"

namespace tskit {

/// A random linear map R^d → R^m applied to single vectors (the leaf role).
/// Implementations are immutable after construction, deterministic in their
/// seed, and safe to apply concurrently.
class VectorSketch {
 public:
  virtual ~VectorSketch() = default;

  virtual index_t input_dim() const = 0;
  virtual index_t output_dim() const = 0;

  /// out is accumulated from zero; length must equal output_dim().
  virtual void apply(std::span<const double> x, std::span<double> out) const = 0;
  virtual void apply(const SparseVector& x, std::span<double> out) const = 0;

  /// Materializes the m×d map (guarded); oracle/verification path.
  virtual DenseMatrix explicit_matrix() const = 0;

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> out(output_dim(), 0.0);
    apply(x, out);
    return out;
  }
  std::vector<double> apply(const SparseVector& x) const {
    std::vector<double> out(output_dim(), 0.0);
    apply(x, out);
    return out;
  }
};

/// A random linear map R^{n²} → R^m evaluated on pure tensors u ⊗ v without
/// materializing them (the internal-node role).  Both factors share the side
/// dimension n.
class PairSketch {
 public:
  virtual ~PairSketch() = default;

  virtual index_t side_dim() const = 0;
  virtual index_t output_dim() const = 0;

  virtual void apply_pair(std::span<const double> u, std::span<const double> v,
                          std::span<double> out) const = 0;

  /// Materializes the m×n² map acting on flattened u ⊗ v (guarded).
  virtual DenseMatrix explicit_matrix() const = 0;

  std::vector<double> apply_pair(std::span<const double> u, std::span<const double> v) const {
    std::vector<double> out(output_dim(), 0.0);
    apply_pair(u, v, out);
    return out;
  }
};

/// Classic single-hash sparse embedding: out[h(i)] += σ(i)·x[i].
class CountSketch final : public VectorSketch {
 public:
  CountSketch(index_t d, index_t m, const SeedPath& seed);

  using VectorSketch::apply;

  index_t input_dim() const override { return d_; }
  index_t output_dim() const override { return m_; }
  void apply(std::span<const double> x, std::span<double> out) const override;
  void apply(const SparseVector& x, std::span<double> out) const override;
  DenseMatrix explicit_matrix() const override;

  index_t bucket(index_t i) const { return h_(i); }
  int sign(index_t i) const { return sigma_(i); }

 private:
  index_t d_, m_;
  KWiseHash h_;
  SignHash sigma_;
};

/// Sparse embedding with exactly s nonzeros (value ±1/√s) per column, each
/// column's row set drawn by a seeded partial Fisher–Yates pass over [0, m).
/// The IndependentBernoulli variant instead keeps each (row, column) cell
/// independently with probability s/m; it matches the simplified analysis
/// model and is opt-in.
class Osnap final : public VectorSketch {
 public:
  enum class Variant { ExactSparsity, IndependentBernoulli };

  Osnap(index_t d, index_t m, index_t s, const SeedPath& seed,
        Variant variant = Variant::ExactSparsity);

  using VectorSketch::apply;

  index_t input_dim() const override { return d_; }
  index_t output_dim() const override { return m_; }
  index_t sparsity() const { return s_; }
  Variant variant() const { return variant_; }

  void apply(std::span<const double> x, std::span<double> out) const override;
  void apply(const SparseVector& x, std::span<double> out) const override;
  DenseMatrix explicit_matrix() const override;

  /// Row/sign pattern of one column, regenerated from the seed on demand so
  /// application cost scales with the number of touched columns.
  void column_pattern(index_t j, std::vector<index_t>& rows, std::vector<int>& signs) const;

 private:
  index_t d_, m_, s_;
  Variant variant_;
  SeedPath seed_;
  double scale_;
};

/// Subsampled randomized Hadamard transform: out = (1/√m)·P·H·D·x with
/// m rows sampled independently with replacement.
class Srht final : public VectorSketch {
 public:
  Srht(index_t d, index_t m, const SeedPath& seed);

  using VectorSketch::apply;

  index_t input_dim() const override { return d_; }
  index_t output_dim() const override { return m_; }
  index_t padded_dim() const { return d_pad_; }

  void apply(std::span<const double> x, std::span<double> out) const override;
  void apply(const SparseVector& x, std::span<double> out) const override;
  DenseMatrix explicit_matrix() const override;

 private:
  index_t d_, d_pad_, m_;
  std::vector<int> dsign_;
  std::vector<index_t> rows_;
};

/// Degree-two tensor sketch: buckets each factor with its own
/// (hash, sign) pair and convolves the two bucket vectors cyclically, so
/// S(u ⊗ v)[r] = Σ σ₁(i)σ₂(j)·u_i·v_j over (i, j) with h₁(i)+h₂(j) ≡ r mod m.
/// The convolution runs through one length-m FFT; m must be a power of two.
class TensorSketch2 final : public PairSketch {
 public:
  TensorSketch2(index_t side, index_t m, const SeedPath& seed);

  using PairSketch::apply_pair;

  index_t side_dim() const override { return side_; }
  index_t output_dim() const override { return m_; }

  void apply_pair(std::span<const double> u, std::span<const double> v,
                  std::span<double> out) const override;
  DenseMatrix explicit_matrix() const override;

 private:
  index_t side_, m_;
  KWiseHash h1_, h2_;
  SignHash s1_, s2_;
  Fft fft_;
};

/// Tensorized subsampled Hadamard transform:
/// out[r] = (1/√m)·(H·D₁·u)[i_r]·(H·D₂·v)[j_r] with m index pairs sampled
/// independently with replacement.
class TensorSrht final : public PairSketch {
 public:
  TensorSrht(index_t side, index_t m, const SeedPath& seed);

  using PairSketch::apply_pair;

  index_t side_dim() const override { return side_; }
  index_t output_dim() const override { return m_; }
  index_t padded_dim() const { return d_pad_; }

  void apply_pair(std::span<const double> u, std::span<const double> v,
                  std::span<double> out) const override;
  DenseMatrix explicit_matrix() const override;

 private:
  index_t side_, d_pad_, m_;
  std::vector<int> dsign1_, dsign2_;
  std::vector<index_t> rows1_, rows2_;
};

}  // namespace tskit
