#include "tskit/kernel_apps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tskit/oracle.hpp"
#include "tskit/parallel.hpp"

namespace tskit {

DenseMatrix gram_polynomial(const DenseMatrix& x, unsigned p) {
  DenseMatrix k = gram(x);
  for (double& v : k.storage()) v = std::pow(v, static_cast<double>(p));
  return k;
}

DenseMatrix gram_gaussian(const DenseMatrix& x) {
  const index_t n = x.cols();
  DenseMatrix k(n, n);
  std::vector<double> sq(n);
  for (index_t j = 0; j < n; ++j) sq[j] = norm2_squared(x.col(j));
  for (index_t j = 0; j < n; ++j) {
    k(j, j) = 1.0;
    for (index_t i = 0; i < j; ++i) {
      const double dist2 = std::max(0.0, sq[i] + sq[j] - 2.0 * dot(x.col(i), x.col(j)));
      const double v = std::exp(-0.5 * dist2);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

double statistical_dimension(std::span<const double> eigenvalues, double lambda) {
  if (!(lambda > 0.0)) throw DimensionError("statistical_dimension: lambda must be positive");
  double top = 0.0;
  for (double v : eigenvalues) top = std::max(top, std::fabs(v));
  const double floor = -1e-10 * std::max(1.0, top);
  double acc = 0.0;
  for (double v : eigenvalues) {
    if (v < floor) {
      throw DimensionError("statistical_dimension: significantly negative eigenvalue");
    }
    const double ev = std::max(0.0, v);
    acc += ev / (ev + lambda);
  }
  return acc;
}

double taylor_tail(unsigned q, double r, index_t n) {
  if (r < 0.0) throw DimensionError("taylor_tail: r must be nonnegative");
  if (n == 0) throw DimensionError("taylor_tail: n must be positive");
  const double z = r * r;
  if (z == 0.0) return 0.0;
  // First term in log domain so large r and large q cannot overflow on the
  // way in; then the ascending recurrence t_{l+1} = t_l·z/(l+1).
  const double log_first =
      (static_cast<double>(q) + 1.0) * std::log(z) - std::lgamma(static_cast<double>(q) + 2.0);
  if (log_first > 700.0) return std::numeric_limits<double>::infinity();
  long double t = std::exp(static_cast<long double>(log_first));
  long double sum = 0.0L;
  for (unsigned long l = q + 1;; ++l) {
    sum += t;
    t *= static_cast<long double>(z) / static_cast<long double>(l + 1);
    if (static_cast<double>(l) >= z && t < sum * 1e-19L) break;
    if (l > static_cast<unsigned long>(q) + 200000ul) break;
  }
  return static_cast<double>(sum) * static_cast<double>(n);
}

unsigned gaussian_degree(double r, index_t n, double eps, double lambda, unsigned q_max) {
  if (!(eps > 0.0) || !(lambda > 0.0)) {
    throw DimensionError("gaussian_degree: eps and lambda must be positive");
  }
  const double target = 0.5 * eps * lambda;
  for (unsigned q = 0; q <= q_max; ++q) {
    if (taylor_tail(q, r, n) <= target) return q;
  }
  throw Error("gaussian_degree: no truncation degree up to " + std::to_string(q_max) +
              " meets the tail target; the radius is too large for this (eps, lambda)");
}

GaussianFeatureMap GaussianFeatureMap::build(index_t d, const KernelJob& job,
                                             double s_lambda_estimate, SketchVariant variant,
                                             const SeedPath& seed,
                                             const SizingConstants& constants) {
  if (d == 0) throw DimensionError("GaussianFeatureMap: d must be positive");
  if (!(job.lambda > 0.0)) throw DimensionError("GaussianFeatureMap: lambda must be positive");
  if (!(job.eps > 0.0)) throw DimensionError("GaussianFeatureMap: eps must be positive");
  if (!(job.delta > 0.0) || job.delta >= 1.0) {
    throw DimensionError("GaussianFeatureMap: delta must lie in (0, 1)");
  }
  if (job.r < 0.0) throw DimensionError("GaussianFeatureMap: radius must be nonnegative");
  if (job.n == 0) throw DimensionError("GaussianFeatureMap: dataset size must be positive");
  if (!(s_lambda_estimate > 0.0)) {
    throw DimensionError("GaussianFeatureMap: s_lambda estimate must be positive");
  }

  GaussianFeatureMap fm;
  fm.d_ = d;
  fm.job_ = job;
  fm.variant_ = variant;
  fm.seed_ = seed;
  fm.q_ = gaussian_degree(job.r, job.n, job.eps, job.lambda);
  fm.tail_ = taylor_tail(fm.q_, job.r, job.n);

  // Each degree runs at a slice of the overall budget: accuracy eps/9 and
  // failure delta/(q+1), so the per-degree errors compose into (eps, delta).
  const double eps_deg = job.eps / 9.0;
  const double delta_deg = job.delta / (static_cast<double>(fm.q_) + 1.0);

  fm.degree_dims_.assign(fm.q_ + 1, 0);
  fm.degree_dims_[0] = 1;
  for (unsigned l = 1; l <= fm.q_; ++l) {
    const SeedPath deg_seed = seed.derive("degree", l, 0);
    if (variant.kind == SketchVariantKind::ConstProb) {
      const index_t ml =
          target_dim_const_prob(l, s_lambda_estimate, eps_deg, constants, delta_deg);
      if (l == 1) {
        fm.degree_one_ = std::make_unique<CountSketch>(d, ml, deg_seed);
        fm.degree_dims_[1] = ml;
      } else {
        fm.higher_.push_back(RecursiveSketch::build(d, l, ml, variant, deg_seed));
        fm.degree_dims_[l] = fm.higher_.back().output_dim();
      }
    } else {
      const HighProbDims dims =
          target_dim_high_prob(l, s_lambda_estimate, eps_deg, job.n, d, delta_deg, constants);
      if (l == 1) {
        fm.degree_one_ = std::make_unique<Osnap>(d, dims.m, dims.s, deg_seed);
        fm.degree_dims_[1] = dims.m;
      } else {
        fm.higher_.push_back(
            RecursiveSketch::build(d, l, dims.m, SketchVariant::high_prob(dims.s), deg_seed));
        fm.degree_dims_[l] = fm.higher_.back().output_dim();
      }
    }
  }
  fm.total_dim_ = 0;
  for (index_t ml : fm.degree_dims_) fm.total_dim_ += ml;
  return fm;
}

std::vector<double> GaussianFeatureMap::apply_point(std::span<const double> x) const {
  if (x.size() != d_) throw DimensionError("GaussianFeatureMap: point dimension mismatch");
  const double sq = norm2_squared(x);
  if (sq > job_.r * (1.0 + 1e-12) + 1e-300) {
    throw DimensionError("GaussianFeatureMap: point violates the radius bound (" +
                         std::to_string(sq) + " > " + std::to_string(job_.r) + ")");
  }
  std::vector<double> out(total_dim_, 0.0);
  const double weight = std::exp(-0.5 * sq);
  out[0] = weight;
  index_t offset = 1;
  for (unsigned l = 1; l <= q_; ++l) {
    std::span<double> slot(out.data() + offset, degree_dims_[l]);
    if (l == 1) {
      degree_one_->apply(x, slot);
    } else {
      higher_[l - 2].apply_point(x, slot);
    }
    const double scale = weight * std::exp(-0.5 * std::lgamma(static_cast<double>(l) + 1.0));
    for (double& v : slot) v *= scale;
    offset += degree_dims_[l];
  }
  return out;
}

SketchedMatrix GaussianFeatureMap::apply(const DenseMatrix& x, unsigned threads) const {
  if (x.rows() != d_) throw DimensionError("GaussianFeatureMap: matrix row count mismatch");
  // Validate every column first so the error names the offender regardless of
  // how the parallel pass is scheduled.
  for (index_t j = 0; j < x.cols(); ++j) {
    const double sq = norm2_squared(x.col(j));
    if (sq > job_.r * (1.0 + 1e-12) + 1e-300) {
      throw DimensionError("GaussianFeatureMap: column " + std::to_string(j) +
                           " violates the radius bound (" + std::to_string(sq) + " > " +
                           std::to_string(job_.r) + ")");
    }
  }
  SketchedMatrix result;
  result.data = DenseMatrix(total_dim_, x.cols());
  result.provenance = SketchProvenance{seed_.master(), variant_, q_, d_, total_dim_};
  DenseMatrix& out = result.data;
  parallel_for_blocks(x.cols(), threads, [&](index_t begin, index_t end) {
    for (index_t j = begin; j < end; ++j) {
      const std::vector<double> z = apply_point(x.col(j));
      out.set_col(j, z);
    }
  });
  return result;
}

double ose_spectral_error(const DenseMatrix& sketched, const DenseMatrix& k, double lambda) {
  if (k.rows() != k.cols()) throw DimensionError("ose_spectral_error: K must be square");
  if (sketched.cols() != k.rows()) {
    throw DimensionError("ose_spectral_error: sketched column count must match K");
  }
  const DenseMatrix w = oracle::psd_sqrt_inv(k, lambda);
  const DenseMatrix err = sub(gram(sketched), k);
  DenseMatrix m = matmul(w, matmul(err, w));
  // Symmetrize away the product round-off before asking for eigenvalues.
  DenseMatrix mt = transpose(m);
  for (index_t i = 0; i < m.size(); ++i) {
    m.storage()[i] = 0.5 * (m.storage()[i] + mt.storage()[i]);
  }
  return oracle::operator_norm(m);
}

double amp_error(const DenseMatrix& c, const DenseMatrix& d,
                 const std::function<DenseMatrix(const DenseMatrix&)>& applier) {
  if (c.rows() != d.rows()) throw DimensionError("amp_error: row count mismatch");
  const double denom = frobenius_norm(c) * frobenius_norm(d);
  if (denom == 0.0) return 0.0;
  const DenseMatrix sc = applier(c);
  const DenseMatrix sd = applier(d);
  if (sc.cols() != c.cols() || sd.cols() != d.cols() || sc.rows() != sd.rows()) {
    throw DimensionError("amp_error: applier changed the column structure");
  }
  const DenseMatrix approx = matmul(transpose(sc), sd);
  const DenseMatrix exact = matmul(transpose(c), d);
  return frobenius_norm(sub(approx, exact)) / denom;
}

namespace {

/// Solves (A)y = rhs for symmetric positive definite A by Cholesky.
std::vector<double> spd_solve(DenseMatrix a, std::vector<double> rhs) {
  const index_t n = a.rows();
  if (a.cols() != n || rhs.size() != n) throw DimensionError("spd_solve: shape mismatch");
  for (index_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (index_t k = 0; k < j; ++k) diag -= a(j, k) * a(j, k);
    if (!(diag > 0.0)) throw Error("spd_solve: matrix is not positive definite");
    const double ljj = std::sqrt(diag);
    a(j, j) = ljj;
    for (index_t i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (index_t k = 0; k < j; ++k) v -= a(i, k) * a(j, k);
      a(i, j) = v / ljj;
    }
  }
  for (index_t i = 0; i < n; ++i) {  // L z = rhs
    double v = rhs[i];
    for (index_t k = 0; k < i; ++k) v -= a(i, k) * rhs[k];
    rhs[i] = v / a(i, i);
  }
  for (index_t i = n; i-- > 0;) {  // Lᵀ y = z
    double v = rhs[i];
    for (index_t k = i + 1; k < n; ++k) v -= a(k, i) * rhs[k];
    rhs[i] = v / a(i, i);
  }
  return rhs;
}

}  // namespace

RidgeResult sketch_ridge_regression(const DenseMatrix& x, std::span<const double> b, unsigned p,
                                    double lambda, index_t m, double eps, double delta,
                                    SketchVariant variant, const SeedPath& seed,
                                    const SizingConstants& constants, unsigned threads) {
  const index_t d = x.rows(), n = x.cols();
  if (b.size() != d) throw DimensionError("sketch_ridge_regression: b dimension mismatch");
  if (!(lambda > 0.0)) throw DimensionError("sketch_ridge_regression: lambda must be positive");
  if (p < 2) throw DimensionError("sketch_ridge_regression: degree must be at least 2");

  const DenseMatrix k = gram_polynomial(x, p);

  index_t s_used = variant.osnap_sparsity;
  if (m == 0) {
    const oracle::EigResult eig = oracle::symmetric_eig(k);
    const double s_lambda = statistical_dimension(eig.values, lambda);
    if (variant.kind == SketchVariantKind::ConstProb) {
      m = target_dim_const_prob(p, s_lambda, eps, constants, delta);
    } else {
      const HighProbDims dims = target_dim_high_prob(p, s_lambda, eps, n, d, delta, constants);
      m = dims.m;
      s_used = dims.s;
      variant.osnap_sparsity = dims.s;
    }
  }

  const RecursiveSketch sk = RecursiveSketch::build(d, p, m, variant, seed);
  const SketchedMatrix sa = sk.apply_matrix(x, threads);
  const std::vector<double> sb = sk.apply_point(b);

  // Normal equations of the sketched problem: ((ΠA)ᵀΠA + λI) y = (ΠA)ᵀ Πφ(b).
  DenseMatrix lhs = gram(sa.data);
  for (index_t i = 0; i < n; ++i) lhs(i, i) += lambda;
  std::vector<double> rhs(n);
  for (index_t i = 0; i < n; ++i) rhs[i] = dot(sa.data.col(i), sb);
  std::vector<double> y = spd_solve(std::move(lhs), std::move(rhs));

  // Exact objective of any coefficient vector via the kernel trick:
  // ‖Ay − φ(b)‖² + λ‖y‖² = yᵀKy − 2yᵀv + (bᵀb)^p + λ‖y‖², v_i = (x_iᵀb)^p.
  std::vector<double> v(n);
  for (index_t i = 0; i < n; ++i) v[i] = std::pow(dot(x.col(i), b), static_cast<double>(p));
  const double bb_p = std::pow(norm2_squared(b), static_cast<double>(p));
  auto objective = [&](const std::vector<double>& yy) {
    const std::vector<double> ky = matvec(k, yy);
    double quad = 0.0, lin = 0.0, reg = 0.0;
    for (index_t i = 0; i < n; ++i) {
      quad += yy[i] * ky[i];
      lin += yy[i] * v[i];
      reg += yy[i] * yy[i];
    }
    return quad - 2.0 * lin + bb_p + lambda * reg;
  };

  DenseMatrix exact_lhs = k;
  for (index_t i = 0; i < n; ++i) exact_lhs(i, i) += lambda;
  const std::vector<double> y_opt = spd_solve(std::move(exact_lhs), v);

  RidgeResult res;
  res.coefficients = y;
  res.objective_sketched = objective(y);
  res.objective_optimal = objective(y_opt);
  res.m_used = sk.output_dim();
  res.s_used = variant.kind == SketchVariantKind::HighProb ? s_used : 0;
  if (res.objective_optimal > 0.0) {
    res.ratio = res.objective_sketched / res.objective_optimal;
  } else {
    res.ratio = res.objective_sketched <= 1e-12 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  return res;
}

}  // namespace tskit
