#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "tskit/recursive_sketch.hpp"

namespace tskit {

/// Parameters of one kernel approximation task: regularizer, target accuracy,
/// failure budget, squared-radius bound on the points, and the dataset size
/// the guarantees are quoted against.
struct KernelJob {
  double lambda = 0.0;
  double eps = 0.0;
  double delta = 0.0;
  double r = 0.0;
  index_t n = 0;
};

/// Gram matrix of the degree-p polynomial features: entry (i,j) = (x_iᵀx_j)^p.
DenseMatrix gram_polynomial(const DenseMatrix& x, unsigned p);

/// Gaussian kernel Gram matrix: entry (i,j) = exp(−‖x_i − x_j‖²/2).
DenseMatrix gram_gaussian(const DenseMatrix& x);

/// s_λ = Σ λᵢ/(λᵢ + λ) over the given eigenvalues.  Mildly negative
/// eigenvalues (round-off) are clamped to zero; significantly negative ones
/// and λ ≤ 0 are errors.
double statistical_dimension(std::span<const double> eigenvalues, double lambda);

/// Σ_{l>q} n·r^{2l}/l!, evaluated stably (log-domain leading term, ascending
/// recurrence).  This bounds the spectral error of truncating the exponential
/// series at degree q over n points of squared radius ≤ r.
double taylor_tail(unsigned q, double r, index_t n);

/// Smallest q with taylor_tail(q, r, n) ≤ eps·lambda/2.  Throws if no
/// q ≤ q_max suffices.
unsigned gaussian_degree(double r, index_t n, double eps, double lambda, unsigned q_max = 64);

/// Randomized feature map for the Gaussian kernel: per point x, the
/// concatenation over degrees l = 0..q of sketched tensor powers — degree 0
/// is the constant 1, degree 1 a single leaf sketch, degree l ≥ 2 a recursive
/// tensor-power sketch — each scaled by e^{−‖x‖²/2}/√l!.
class GaussianFeatureMap {
 public:
  static GaussianFeatureMap build(index_t d, const KernelJob& job, double s_lambda_estimate,
                                  SketchVariant variant, const SeedPath& seed,
                                  const SizingConstants& constants = {});

  index_t input_dim() const { return d_; }
  unsigned q_taylor() const { return q_; }
  index_t total_dim() const { return total_dim_; }
  std::span<const index_t> degree_dims() const { return degree_dims_; }
  double tail_bound() const { return tail_; }
  const KernelJob& job() const { return job_; }
  SketchVariant variant() const { return variant_; }

  /// Feature vector of one point; ‖x‖² must be within the job's radius bound.
  std::vector<double> apply_point(std::span<const double> x) const;

  /// Feature matrix of X (d×n), column-parallel and thread-count invariant.
  /// Radius violations report the offending column.
  SketchedMatrix apply(const DenseMatrix& x, unsigned threads = 1) const;

 private:
  GaussianFeatureMap() = default;

  index_t d_ = 0;
  unsigned q_ = 0;
  index_t total_dim_ = 0;
  double tail_ = 0.0;
  KernelJob job_;
  SketchVariant variant_;
  SeedPath seed_ = SeedPath::root(0);
  std::vector<index_t> degree_dims_;
  std::unique_ptr<VectorSketch> degree_one_;
  std::vector<RecursiveSketch> higher_;  // degree l at index l-2
};

/// ‖(K+λI)^{-1/2}(SᵀS − K)(K+λI)^{-1/2}‖₂ — the regularized spectral error of
/// an approximate Gram matrix SᵀS against the exact kernel K.
double ose_spectral_error(const DenseMatrix& sketched, const DenseMatrix& k, double lambda);

/// ‖CᵀΠᵀΠD − CᵀD‖_F / (‖C‖_F‖D‖_F); zero when either factor is zero.  The
/// applier maps a matrix to its sketched image Π·M.
double amp_error(const DenseMatrix& c, const DenseMatrix& d,
                 const std::function<DenseMatrix(const DenseMatrix&)>& applier);

struct RidgeResult {
  std::vector<double> coefficients;
  double objective_sketched = 0.0;
  double objective_optimal = 0.0;
  double ratio = 0.0;
  index_t m_used = 0;
  index_t s_used = 0;
};

/// Sketch-and-solve ridge regression on degree-p tensor-power features:
/// minimizes ‖Π A y − Π φ(b)‖² + λ‖y‖² over y, where A's columns are the
/// x_i^{⊗p} and φ(b) = b^{⊗p}, never materializing either.  Objectives are
/// evaluated exactly through the polynomial kernel.  m = 0 sizes the sketch
/// automatically from (eps, delta) and the measured s_λ.
RidgeResult sketch_ridge_regression(const DenseMatrix& x, std::span<const double> b, unsigned p,
                                    double lambda, index_t m, double eps, double delta,
                                    SketchVariant variant, const SeedPath& seed,
                                    const SizingConstants& constants = {}, unsigned threads = 1);

}  // namespace tskit
