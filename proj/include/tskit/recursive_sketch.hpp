#pragma once

#include <memory>
#include <span>
#include <vector>

#include "tskit/base_sketches.hpp"
#include "tskit/matrix.hpp"

namespace tskit {

enum class SketchVariantKind { ConstProb, HighProb };

/// Which base-sketch family fills the tree.  ConstProb pairs CountSketch
/// leaves with degree-two tensor sketches inside; HighProb pairs
/// sparse-embedding (Osnap) leaves, whose per-column sparsity rides along
/// here, with tensorized Hadamard transforms inside.
struct SketchVariant {
  SketchVariantKind kind = SketchVariantKind::ConstProb;
  index_t osnap_sparsity = 1;

  static SketchVariant const_prob() { return {SketchVariantKind::ConstProb, 1}; }
  static SketchVariant high_prob(index_t s) { return {SketchVariantKind::HighProb, s}; }
};

const char* variant_name(SketchVariantKind kind);

/// Tunable leading constants for the sizing helpers.  The defaults encode the
/// shape of the guarantees, not measured truths; verification suites calibrate
/// and override them.
struct SizingConstants {
  double c_const = 8.0;
  double c1_high = 0.25;
  double c2_high = 0.25;
};

/// Output dimension for the constant-failure-probability regime:
/// next power of two ≥ c·p·s_λ²/ε², with an optional failure-rate override
/// that scales the budget by (0.1/δ) relative to the reference δ = 1/10.
index_t target_dim_const_prob(unsigned p, double s_lambda, double eps,
                              const SizingConstants& constants = {}, double delta = 0.1);

struct HighProbDims {
  index_t m;
  index_t s;
};

/// Output dimension and per-column sparsity for the high-probability regime:
/// m = next power of two ≥ c₁·p⁴·log₂³(nd/(εδ))·s_λ/ε²,
/// s = ⌈c₂·p⁴·log₂³(nd/(εδ))/ε²⌉, both clamped to at least 1 and s ≤ m.
HighProbDims target_dim_high_prob(unsigned p, double s_lambda, double eps, index_t n, index_t d,
                                  double delta, const SizingConstants& constants = {});

struct SketchProvenance {
  std::uint64_t master_seed = 0;
  SketchVariant variant;
  unsigned p = 0;
  index_t d = 0;
  index_t m = 0;
};

struct SketchedMatrix {
  DenseMatrix data;
  SketchProvenance provenance;
};

/// Sketch of the p-fold tensor power: a complete binary tree over
/// q = 2^⌈log₂p⌉ leaves.  Leaves map R^d → R^m; each internal level l
/// (l = q, q/2, …, 2) holds l/2 pair sketches R^m ⊗ R^m → R^m.  Evaluation
/// never materializes d^p or m² sized buffers: per point it runs q leaf
/// applications followed by q−1 pair merges over ping-pong buffers of
/// 2q·m doubles.  When p < q the missing factors are fixed unit vectors e₁,
/// whose leaf images are precomputed at build time.
class RecursiveSketch {
 public:
  static RecursiveSketch build(index_t d, unsigned p, index_t m, SketchVariant variant,
                               const SeedPath& seed);

  index_t input_dim() const { return d_; }
  unsigned degree() const { return p_; }
  unsigned padded_degree() const { return q_; }
  index_t output_dim() const { return m_; }
  SketchVariant variant() const { return variant_; }
  const SeedPath& seed() const { return seed_; }

  /// Π(x^{⊗p}) for one point.
  void apply_point(std::span<const double> x, std::span<double> out) const;
  std::vector<double> apply_point(std::span<const double> x) const;
  /// Same, touching only the nonzeros of x in the leaf phase.
  void apply_point(const SparseVector& x, std::span<double> out) const;
  std::vector<double> apply_point(const SparseVector& x) const;

  /// Sketches every column of X (d×n) independently; the result is bitwise
  /// identical for every thread count.
  SketchedMatrix apply_matrix(const DenseMatrix& x, unsigned threads = 1) const;

  /// The m×d^p matrix realizing this sketch (guarded; oracle path).  Composes
  /// the explicit leaf maps with one explicit pair-merge level at a time,
  /// restricted throughout to the e₁-padded embedding of degree-p tensors.
  DenseMatrix explicit_matrix() const;

  // --- structure accessors (verification and benchmarks) ---
  index_t leaf_count() const { return leaves_.size(); }
  const VectorSketch& leaf(index_t j) const { return *leaves_[j]; }
  /// Internal levels in application order: level_size(0) == q/2 pair sketches
  /// merge the leaves, then q/4, …, down to 1.
  index_t level_count() const { return internal_.size(); }
  index_t level_size(index_t lvl) const { return internal_[lvl].size(); }
  const PairSketch& internal(index_t lvl, index_t j) const { return *internal_[lvl][j]; }

  /// Leaf phase only: images of x under leaves 0..p-1 (benchmark hook for the
  /// nnz-proportional part of the pipeline).
  void apply_leaves(const SparseVector& x, std::vector<std::vector<double>>& out) const;

 private:
  RecursiveSketch() = default;

  void merge_levels(std::vector<double>& ping, std::vector<double>& pong) const;

  index_t d_ = 0;
  unsigned p_ = 0;
  unsigned q_ = 0;
  index_t m_ = 0;
  SketchVariant variant_;
  SeedPath seed_ = SeedPath::root(0);
  std::vector<std::unique_ptr<VectorSketch>> leaves_;
  std::vector<std::vector<std::unique_ptr<PairSketch>>> internal_;
  std::vector<std::vector<double>> e1_leaf_images_;  // leaves p..q-1 applied to e₁
};

}  // namespace tskit
