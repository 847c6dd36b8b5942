#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tskit/hashing.hpp"
#include "tskit/matrix.hpp"

namespace tskit::oracle {

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
struct EigResult {
  std::vector<double> values;
  DenseMatrix vectors;  // column j pairs with values[j]
};

/// Cyclic Jacobi eigensolver.  Sweeps rotate away every off-diagonal pair
/// until the off-diagonal Frobenius mass falls below 1e-12·‖M‖_F (at most 60
/// sweeps, n ≤ 2048).  Chosen for trustworthiness rather than speed: the
/// verification stack leans on this routine, so it must be simple enough to
/// be obviously correct.
EigResult symmetric_eig(const DenseMatrix& m);

/// ‖M‖₂.  Symmetric inputs go through symmetric_eig directly; general ones
/// through the eigenvalues of MᵀM.
double operator_norm(const DenseMatrix& m);

/// (K + λI)^{-1/2} for symmetric PSD K.  Eigenvalues below zero (round-off
/// from PSD matrices; anything above -1e-10·‖K‖₂ is tolerated) are clamped
/// to zero before the inverse square root.
DenseMatrix psd_sqrt_inv(const DenseMatrix& k, double lambda);

struct MomentEstimate {
  std::uint64_t trials = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  double std_err = 0.0;   // of the mean
};

/// Streaming mean/variance over trial_fn(0..trials-1).  Trials are chunked in
/// fixed blocks whose partial results merge in index order, so the estimate is
/// bitwise reproducible at any thread count.
MomentEstimate estimate_moments(const std::function<double(std::uint64_t)>& trial_fn,
                                std::uint64_t trials, unsigned threads = 1);

struct SpectralTestConfig {
  double mu_f = 0.0;   // bound on ‖U‖_F²
  double mu_2 = 0.0;   // bound on ‖U‖₂²
  double eps = 0.0;
  double delta = 0.0;
  index_t n = 0;
};

/// Fraction of trials with ‖UᵀSᵀSU − UᵀU‖₂ ≤ eps, where trial t applies the
/// sketch via applier(U, t).  U must satisfy the config's norm budgets.
double spectral_property_test(
    const std::function<DenseMatrix(const DenseMatrix&, std::uint64_t)>& applier,
    const DenseMatrix& u, const SpectralTestConfig& cfg, std::uint64_t trials);

struct VarianceProbeResult {
  std::uint64_t trials = 0;
  double second_moment = 0.0;    // E[‖Mx^{⊗q}‖²] / d^q
  double fourth_moment = 0.0;    // E[‖Mx^{⊗q}‖⁴] / d^{2q}
  double fourth_std_err = 0.0;   // Monte-Carlo std err of fourth_moment
  double variance = 0.0;         // fourth_moment − second_moment²
};

/// Monolithic degree-q tensor sketch probe on the all-ones vector: q
/// independently hashed bucket vectors convolved through one shared FFT.
/// This flat construction exists only here, as the contrast case whose
/// fourth moment blows up like 3^q/m² while the recursive tree stays flat.
/// Requires q ≤ d.
VarianceProbeResult tensorsketch_variance_probe(index_t d, unsigned q, index_t m,
                                                std::uint64_t trials, const SeedPath& seed,
                                                unsigned threads = 1);

}  // namespace tskit::oracle
