#include "tskit/tensor_ops.hpp"

#include <limits>

namespace tskit {

std::vector<double> tensor_product(std::span<const double> u, std::span<const double> v) {
  const std::uint64_t total = static_cast<std::uint64_t>(u.size()) * v.size();
  check_size_guard(total, "tensor_product");
  std::vector<double> out;
  out.reserve(total);
  for (index_t j = 0; j < v.size(); ++j) {
    const double vj = v[j];
    for (index_t i = 0; i < u.size(); ++i) out.push_back(u[i] * vj);
  }
  return out;
}

std::vector<double> self_tensor(std::span<const double> x, unsigned p) {
  const index_t d = x.size();
  if (p == 0) return {1.0};
  if (d == 0) throw DimensionError("self_tensor: empty vector");
  // Overflow-safe d^p with the guard applied along the way.
  std::uint64_t total = 1;
  for (unsigned k = 0; k < p; ++k) {
    if (total > std::numeric_limits<std::uint64_t>::max() / d) {
      throw SizeError("self_tensor: d^p overflows a 64-bit count");
    }
    total *= d;
    check_size_guard(total, "self_tensor");
  }
  std::vector<double> out(x.begin(), x.end());
  for (unsigned k = 1; k < p; ++k) {
    out = tensor_product(out, x);
  }
  return out;
}

DenseMatrix reshape(std::span<const double> v, index_t m, index_t n) {
  if (v.size() != m * n) throw DimensionError("reshape: length != m*n");
  std::vector<double> data(v.begin(), v.end());
  return DenseMatrix(m, n, std::move(data));
}

DenseMatrix kron_matrix(const DenseMatrix& a, const DenseMatrix& b) {
  const std::uint64_t total =
      static_cast<std::uint64_t>(a.rows()) * b.rows() * a.cols() * b.cols();
  check_size_guard(total, "kron_matrix");
  DenseMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (index_t j2 = 0; j2 < b.cols(); ++j2) {
    for (index_t j1 = 0; j1 < a.cols(); ++j1) {
      const index_t j = j1 + a.cols() * j2;
      for (index_t i2 = 0; i2 < b.rows(); ++i2) {
        const double bv = b(i2, j2);
        if (bv == 0.0) continue;
        for (index_t i1 = 0; i1 < a.rows(); ++i1) {
          c(i1 + a.rows() * i2, j) = a(i1, j1) * bv;
        }
      }
    }
  }
  return c;
}

}  // namespace tskit
