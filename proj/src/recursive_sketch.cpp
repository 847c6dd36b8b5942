#include "tskit/recursive_sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tskit/parallel.hpp"
#include "tskit/tensor_ops.hpp"
#include "tskit/transforms.hpp"

namespace tskit {

const char* variant_name(SketchVariantKind kind) {
  return kind == SketchVariantKind::ConstProb ? "const-prob" : "high-prob";
}

index_t target_dim_const_prob(unsigned p, double s_lambda, double eps,
                              const SizingConstants& constants, double delta) {
  if (p == 0) throw DimensionError("target_dim_const_prob: p must be positive");
  if (!(s_lambda > 0.0)) throw DimensionError("target_dim_const_prob: s_lambda must be positive");
  if (!(eps > 0.0)) throw DimensionError("target_dim_const_prob: eps must be positive");
  if (!(delta > 0.0) || delta > 1.0) {
    throw DimensionError("target_dim_const_prob: delta must lie in (0, 1]");
  }
  const double raw =
      constants.c_const * p * s_lambda * s_lambda / (eps * eps) * (0.1 / delta);
  const double clamped = std::max(1.0, std::ceil(raw));
  if (clamped > static_cast<double>(index_t{1} << 40)) {
    throw SizeError("target_dim_const_prob: requested dimension is absurdly large");
  }
  return next_pow2(static_cast<index_t>(clamped));
}

HighProbDims target_dim_high_prob(unsigned p, double s_lambda, double eps, index_t n, index_t d,
                                  double delta, const SizingConstants& constants) {
  if (p == 0) throw DimensionError("target_dim_high_prob: p must be positive");
  if (!(s_lambda > 0.0)) throw DimensionError("target_dim_high_prob: s_lambda must be positive");
  if (!(eps > 0.0)) throw DimensionError("target_dim_high_prob: eps must be positive");
  if (!(delta > 0.0) || delta >= 1.0) {
    throw DimensionError("target_dim_high_prob: delta must lie in (0, 1)");
  }
  if (n == 0 || d == 0) throw DimensionError("target_dim_high_prob: n and d must be positive");
  const double arg = static_cast<double>(n) * static_cast<double>(d) / (eps * delta);
  const double lg = std::max(1.0, std::log2(arg));
  const double polylog = lg * lg * lg;
  const double p4 = std::pow(static_cast<double>(p), 4.0);
  const double m_raw = constants.c1_high * p4 * polylog * s_lambda / (eps * eps);
  const double s_raw = constants.c2_high * p4 * polylog / (eps * eps);
  if (m_raw > static_cast<double>(index_t{1} << 40)) {
    throw SizeError("target_dim_high_prob: requested dimension is absurdly large");
  }
  HighProbDims dims;
  dims.m = next_pow2(static_cast<index_t>(std::max(1.0, std::ceil(m_raw))));
  dims.s = static_cast<index_t>(std::max(1.0, std::ceil(s_raw)));
  dims.s = std::min(dims.s, dims.m);
  return dims;
}

RecursiveSketch RecursiveSketch::build(index_t d, unsigned p, index_t m, SketchVariant variant,
                                       const SeedPath& seed) {
  if (d == 0) throw DimensionError("RecursiveSketch: d must be positive");
  if (p < 2) throw DimensionError("RecursiveSketch: degree must be at least 2");
  if (p > 63) throw DimensionError("RecursiveSketch: degree too large");
  if (m == 0) throw DimensionError("RecursiveSketch: m must be positive");

  RecursiveSketch sk;
  sk.d_ = d;
  sk.p_ = p;
  sk.q_ = static_cast<unsigned>(next_pow2(p));
  // The internal convolution sketches of the const-prob family want a
  // power-of-two dimension; every node shares one m, so round it up front.
  sk.m_ = variant.kind == SketchVariantKind::ConstProb ? next_pow2(m) : m;
  sk.variant_ = variant;
  sk.seed_ = seed;

  if (variant.kind == SketchVariantKind::HighProb &&
      (variant.osnap_sparsity == 0 || variant.osnap_sparsity > sk.m_)) {
    throw DimensionError("RecursiveSketch: osnap sparsity must satisfy 1 <= s <= m");
  }

  sk.leaves_.reserve(sk.q_);
  for (unsigned j = 0; j < sk.q_; ++j) {
    const SeedPath leaf_seed = seed.derive("leaf", 0, j);
    if (variant.kind == SketchVariantKind::ConstProb) {
      sk.leaves_.push_back(std::make_unique<CountSketch>(d, sk.m_, leaf_seed));
    } else {
      sk.leaves_.push_back(
          std::make_unique<Osnap>(d, sk.m_, variant.osnap_sparsity, leaf_seed));
    }
  }

  for (unsigned l = sk.q_; l >= 2; l /= 2) {
    std::vector<std::unique_ptr<PairSketch>> level;
    level.reserve(l / 2);
    for (unsigned j = 0; j < l / 2; ++j) {
      const SeedPath node_seed = seed.derive("internal", l, j);
      if (variant.kind == SketchVariantKind::ConstProb) {
        level.push_back(std::make_unique<TensorSketch2>(sk.m_, sk.m_, node_seed));
      } else {
        level.push_back(std::make_unique<TensorSrht>(sk.m_, sk.m_, node_seed));
      }
    }
    sk.internal_.push_back(std::move(level));
  }

  // Leaves beyond degree p always see the unit vector e₁; fix their images now.
  std::vector<double> e1(d, 0.0);
  e1[0] = 1.0;
  for (unsigned j = p; j < sk.q_; ++j) {
    sk.e1_leaf_images_.push_back(sk.leaves_[j]->apply(e1));
  }
  return sk;
}

void RecursiveSketch::merge_levels(std::vector<double>& ping, std::vector<double>& pong) const {
  for (const auto& level : internal_) {
    for (index_t j = 0; j < level.size(); ++j) {
      std::span<const double> left(ping.data() + (2 * j) * m_, m_);
      std::span<const double> right(ping.data() + (2 * j + 1) * m_, m_);
      std::span<double> out(pong.data() + j * m_, m_);
      level[j]->apply_pair(left, right, out);
    }
    std::swap(ping, pong);
  }
}

void RecursiveSketch::apply_point(std::span<const double> x, std::span<double> out) const {
  if (x.size() != d_) throw DimensionError("RecursiveSketch: point dimension mismatch");
  if (out.size() != m_) throw DimensionError("RecursiveSketch: output length mismatch");
  std::vector<double> ping(static_cast<index_t>(q_) * m_, 0.0);
  std::vector<double> pong(static_cast<index_t>(q_ / 2) * m_, 0.0);
  for (unsigned j = 0; j < p_; ++j) {
    leaves_[j]->apply(x, std::span<double>(ping.data() + j * m_, m_));
  }
  for (unsigned j = p_; j < q_; ++j) {
    std::copy(e1_leaf_images_[j - p_].begin(), e1_leaf_images_[j - p_].end(),
              ping.begin() + j * m_);
  }
  merge_levels(ping, pong);
  std::copy(ping.begin(), ping.begin() + m_, out.begin());
}

void RecursiveSketch::apply_point(const SparseVector& x, std::span<double> out) const {
  if (x.dim != d_) throw DimensionError("RecursiveSketch: point dimension mismatch");
  if (out.size() != m_) throw DimensionError("RecursiveSketch: output length mismatch");
  std::vector<double> ping(static_cast<index_t>(q_) * m_, 0.0);
  std::vector<double> pong(static_cast<index_t>(q_ / 2) * m_, 0.0);
  for (unsigned j = 0; j < p_; ++j) {
    leaves_[j]->apply(x, std::span<double>(ping.data() + j * m_, m_));
  }
  for (unsigned j = p_; j < q_; ++j) {
    std::copy(e1_leaf_images_[j - p_].begin(), e1_leaf_images_[j - p_].end(),
              ping.begin() + j * m_);
  }
  merge_levels(ping, pong);
  std::copy(ping.begin(), ping.begin() + m_, out.begin());
}

std::vector<double> RecursiveSketch::apply_point(std::span<const double> x) const {
  std::vector<double> out(m_, 0.0);
  apply_point(x, out);
  return out;
}

std::vector<double> RecursiveSketch::apply_point(const SparseVector& x) const {
  std::vector<double> out(m_, 0.0);
  apply_point(x, out);
  return out;
}

SketchedMatrix RecursiveSketch::apply_matrix(const DenseMatrix& x, unsigned threads) const {
  if (x.rows() != d_) throw DimensionError("RecursiveSketch: matrix row count mismatch");
  SketchedMatrix result;
  result.data = DenseMatrix(m_, x.cols());
  result.provenance =
      SketchProvenance{seed_.master(), variant_, p_, d_, m_};
  DenseMatrix& out = result.data;
  parallel_for_blocks(x.cols(), threads, [&](index_t begin, index_t end) {
    for (index_t j = begin; j < end; ++j) {
      apply_point(x.col(j), out.col(j));
    }
  });
  return result;
}

void RecursiveSketch::apply_leaves(const SparseVector& x,
                                   std::vector<std::vector<double>>& out) const {
  out.resize(p_);
  for (unsigned j = 0; j < p_; ++j) {
    out[j].assign(m_, 0.0);
    leaves_[j]->apply(x, out[j]);
  }
}

DenseMatrix RecursiveSketch::explicit_matrix() const {
  // Leaf stage restricted to the e₁-padded embedding: the tensor product of
  // the p leaf maps and, for the padding slots, their fixed e₁-image columns.
  auto mul_checked = [](std::uint64_t a, std::uint64_t b) {
    if (b != 0 && a > std::numeric_limits<std::uint64_t>::max() / b) {
      throw SizeError("RecursiveSketch::explicit_matrix: element count overflows");
    }
    return a * b;
  };
  std::uint64_t rows = 1, cols = 1;
  for (unsigned j = 0; j < q_; ++j) {
    rows = mul_checked(rows, m_);
    if (j < p_) cols = mul_checked(cols, d_);
    check_size_guard(mul_checked(rows, cols), "RecursiveSketch::explicit_matrix");
  }
  DenseMatrix cur = leaves_[0]->explicit_matrix();
  for (unsigned j = 1; j < q_; ++j) {
    if (j < p_) {
      cur = kron_matrix(cur, leaves_[j]->explicit_matrix());
    } else {
      DenseMatrix column(m_, 1);
      column.set_col(0, e1_leaf_images_[j - p_]);
      cur = kron_matrix(cur, column);
    }
  }
  // Merge levels: each is the tensor product of its pair-sketch maps.
  for (const auto& level : internal_) {
    DenseMatrix lvl = level[0]->explicit_matrix();
    for (index_t j = 1; j < level.size(); ++j) {
      lvl = kron_matrix(lvl, level[j]->explicit_matrix());
    }
    check_size_guard(static_cast<std::uint64_t>(lvl.rows()) * cur.cols(),
                     "RecursiveSketch::explicit_matrix");
    cur = matmul(lvl, cur);
  }
  return cur;
}

}  // namespace tskit
