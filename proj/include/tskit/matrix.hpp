#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "tskit/common.hpp"

namespace tskit {

/// Dense column-major matrix of doubles.  Storage is a single contiguous
/// vector; entry (i, j) lives at data()[i + rows()*j].
class DenseMatrix {
 public:
  DenseMatrix() : rows_(0), cols_(0) {}
  DenseMatrix(index_t rows, index_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  DenseMatrix(index_t rows, index_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("DenseMatrix: data size does not match rows*cols");
    }
  }

  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }
  index_t size() const { return data_.size(); }

  double& operator()(index_t i, index_t j) { return data_[i + rows_ * j]; }
  double operator()(index_t i, index_t j) const { return data_[i + rows_ * j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  std::span<double> col(index_t j) { return {data_.data() + rows_ * j, rows_}; }
  std::span<const double> col(index_t j) const { return {data_.data() + rows_ * j, rows_}; }

  void set_col(index_t j, std::span<const double> v) {
    if (v.size() != rows_) throw DimensionError("set_col: length mismatch");
    std::copy(v.begin(), v.end(), data_.begin() + static_cast<std::ptrdiff_t>(rows_ * j));
  }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  static DenseMatrix identity(index_t n) {
    DenseMatrix id(n, n);
    for (index_t i = 0; i < n; ++i) id(i, i) = 1.0;
    return id;
  }

 private:
  index_t rows_, cols_;
  std::vector<double> data_;
};

/// Sparse vector: strictly increasing indices paired with nonzero values.
struct SparseVector {
  index_t dim = 0;
  std::vector<index_t> idx;
  std::vector<double> val;

  SparseVector() = default;
  SparseVector(index_t dim_, std::vector<index_t> idx_, std::vector<double> val_);

  index_t nnz() const { return idx.size(); }

  static SparseVector from_dense(std::span<const double> x);
  std::vector<double> to_dense() const;
};

// --- small dense helpers (oracle-scale; no attempt at BLAS performance) ---

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);
/// aᵀ·a without forming the transpose.
DenseMatrix gram(const DenseMatrix& a);
std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x);

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b);
void scale_inplace(DenseMatrix& a, double s);

double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);        // Euclidean norm
double norm2_squared(std::span<const double> x);

}  // namespace tskit
