#include "tskit/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace tskit {

SparseVector::SparseVector(index_t dim_, std::vector<index_t> idx_, std::vector<double> val_)
    : dim(dim_), idx(std::move(idx_)), val(std::move(val_)) {
  if (idx.size() != val.size()) throw DimensionError("SparseVector: index/value length mismatch");
  for (index_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= dim) throw DimensionError("SparseVector: index out of range");
    if (k > 0 && idx[k] <= idx[k - 1]) {
      throw DimensionError("SparseVector: indices must be strictly increasing");
    }
    if (val[k] == 0.0) throw DimensionError("SparseVector: explicit zero value");
  }
}

SparseVector SparseVector::from_dense(std::span<const double> x) {
  SparseVector s;
  s.dim = x.size();
  for (index_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) {
      s.idx.push_back(i);
      s.val.push_back(x[i]);
    }
  }
  return s;
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> x(dim, 0.0);
  for (index_t k = 0; k < nnz(); ++k) x[idx[k]] = val[k];
  return x;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  const index_t m = a.rows(), k = a.cols(), n = b.cols();
  for (index_t j = 0; j < n; ++j) {
    double* cj = c.data() + m * j;
    for (index_t l = 0; l < k; ++l) {
      const double blj = b(l, j);
      if (blj == 0.0) continue;
      const double* al = a.data() + m * l;
      for (index_t i = 0; i < m; ++i) cj[i] += al[i] * blj;
    }
  }
  return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (index_t j = 0; j < a.cols(); ++j)
    for (index_t i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
  return t;
}

DenseMatrix gram(const DenseMatrix& a) {
  const index_t n = a.cols();
  DenseMatrix g(n, n);
  for (index_t j = 0; j < n; ++j) {
    for (index_t i = 0; i <= j; ++i) {
      const double v = dot(a.col(i), a.col(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionError("matvec: dimension mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (index_t j = 0; j < a.cols(); ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    const double* aj = a.data() + a.rows() * j;
    for (index_t i = 0; i < a.rows(); ++i) y[i] += aj[i] * xj;
  }
  return y;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("add: shape mismatch");
  DenseMatrix c = a;
  for (index_t i = 0; i < c.size(); ++i) c.storage()[i] += b.storage()[i];
  return c;
}

DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("sub: shape mismatch");
  DenseMatrix c = a;
  for (index_t i = 0; i < c.size(); ++i) c.storage()[i] -= b.storage()[i];
  return c;
}

void scale_inplace(DenseMatrix& a, double s) {
  for (double& v : a.storage()) v *= s;
}

double frobenius_norm(const DenseMatrix& a) {
  double acc = 0.0;
  for (double v : a.storage()) acc += v * v;
  return std::sqrt(acc);
}

double max_abs(const DenseMatrix& a) {
  double acc = 0.0;
  for (double v : a.storage()) acc = std::max(acc, std::fabs(v));
  return acc;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_abs_diff: shape mismatch");
  }
  double acc = 0.0;
  for (index_t i = 0; i < a.size(); ++i) {
    acc = std::max(acc, std::fabs(a.storage()[i] - b.storage()[i]));
  }
  return acc;
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("dot: length mismatch");
  double acc = 0.0;
  for (index_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double norm2_squared(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double norm2(std::span<const double> x) { return std::sqrt(norm2_squared(x)); }

}  // namespace tskit
