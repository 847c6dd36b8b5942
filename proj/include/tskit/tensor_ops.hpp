#pragma once

#include <span>
#include <vector>

#include "tskit/matrix.hpp"

namespace tskit {

/// u ⊗ v with the first factor's index varying fastest:
/// out[i + u.size()*j] = u[i] * v[j].
std::vector<double> tensor_product(std::span<const double> u, std::span<const double> v);

/// x^{⊗p}, flat index i1 + d*i2 + d²*i3 + ... (i1 fastest).
/// p = 0 yields the scalar embedding {1}.  Guarded: refuses to materialize
/// more than the size-guard's element budget.
std::vector<double> self_tensor(std::span<const double> x, unsigned p);

/// (m, n)-reshaping of a length m*n vector: entry (i, j) = v[i + m*j].
DenseMatrix reshape(std::span<const double> v, index_t m, index_t n);

/// Tensor product of linear maps, matching the vector layout above:
/// row (i1, i2) ↦ i1 + a.rows()*i2, column (j1, j2) ↦ j1 + a.cols()*j2,
/// entry = a(i1, j1) * b(i2, j2).  Satisfies
/// kron_matrix(a, b) * tensor_product(u, v) = tensor_product(a*u, b*v).
DenseMatrix kron_matrix(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace tskit
