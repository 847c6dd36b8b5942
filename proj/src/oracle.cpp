#include "tskit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tskit/parallel.hpp"
#include "tskit/transforms.hpp"

namespace tskit::oracle {

EigResult symmetric_eig(const DenseMatrix& m) {
  const index_t n = m.rows();
  if (n != m.cols()) throw DimensionError("symmetric_eig: matrix must be square");
  if (n > 2048) throw SizeError("symmetric_eig: n > 2048 is outside the oracle's envelope");
  if (max_abs_diff(m, transpose(m)) > 1e-8 * (1.0 + max_abs(m))) {
    throw DimensionError("symmetric_eig: matrix is not symmetric");
  }

  DenseMatrix a = m;
  // Exact symmetrization so the rotations preserve symmetry bit-for-bit.
  for (index_t j = 0; j < n; ++j) {
    for (index_t i = 0; i < j; ++i) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  DenseMatrix v = DenseMatrix::identity(n);

  const double total_norm = frobenius_norm(a);
  const double tol = 1e-12 * total_norm;

  auto off_norm = [&]() {
    double acc = 0.0;
    for (index_t j = 0; j < n; ++j)
      for (index_t i = 0; i < n; ++i)
        if (i != j) acc += a(i, j) * a(i, j);
    return std::sqrt(acc);
  };

  bool converged = (n <= 1) || off_norm() <= tol;
  for (unsigned sweep = 0; sweep < 60 && !converged; ++sweep) {
    for (index_t p = 0; p + 1 < n; ++p) {
      for (index_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p), aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (index_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (index_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (index_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = off_norm() <= tol;
  }
  if (!converged) throw Error("symmetric_eig: Jacobi sweeps did not converge");

  EigResult r;
  r.values.resize(n);
  for (index_t i = 0; i < n; ++i) r.values[i] = a(i, i);
  std::vector<index_t> order(n);
  std::iota(order.begin(), order.end(), index_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](index_t x, index_t y) { return r.values[x] > r.values[y]; });
  EigResult sorted;
  sorted.values.resize(n);
  sorted.vectors = DenseMatrix(n, n);
  for (index_t j = 0; j < n; ++j) {
    sorted.values[j] = r.values[order[j]];
    for (index_t i = 0; i < n; ++i) sorted.vectors(i, j) = v(i, order[j]);
  }
  return sorted;
}

double operator_norm(const DenseMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  const bool square = m.rows() == m.cols();
  if (square && max_abs_diff(m, transpose(m)) <= 1e-10 * (1.0 + max_abs(m))) {
    const EigResult eig = symmetric_eig(m);
    double best = 0.0;
    for (double v : eig.values) best = std::max(best, std::fabs(v));
    return best;
  }
  const DenseMatrix g = gram(m);  // MᵀM, PSD
  const EigResult eig = symmetric_eig(g);
  const double top = eig.values.empty() ? 0.0 : std::max(0.0, eig.values.front());
  return std::sqrt(top);
}

DenseMatrix psd_sqrt_inv(const DenseMatrix& k, double lambda) {
  if (!(lambda > 0.0)) throw DimensionError("psd_sqrt_inv: lambda must be positive");
  const EigResult eig = symmetric_eig(k);
  const index_t n = k.rows();
  const double top = eig.values.empty() ? 0.0 : std::fabs(eig.values.front());
  const double clamp_floor = -1e-10 * std::max(1.0, top);
  for (double v : eig.values) {
    if (v < clamp_floor) {
      throw DimensionError("psd_sqrt_inv: matrix has a significantly negative eigenvalue");
    }
  }
  DenseMatrix scaled = eig.vectors;  // V · diag((λᵢ+λ)^{-1/2})
  for (index_t j = 0; j < n; ++j) {
    const double ev = std::max(0.0, eig.values[j]);
    const double w = 1.0 / std::sqrt(ev + lambda);
    for (index_t i = 0; i < n; ++i) scaled(i, j) *= w;
  }
  return matmul(scaled, transpose(eig.vectors));
}

namespace {

struct Welford {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    n += 1;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }

  void merge(const Welford& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double delta = o.mean - mean;
    const std::uint64_t total = n + o.n;
    mean += delta * static_cast<double>(o.n) / static_cast<double>(total);
    m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) /
                     static_cast<double>(total);
    n = total;
  }
};

constexpr std::uint64_t kChunk = 4096;

}  // namespace

MomentEstimate estimate_moments(const std::function<double(std::uint64_t)>& trial_fn,
                                std::uint64_t trials, unsigned threads) {
  if (trials == 0) throw DimensionError("estimate_moments: trials must be positive");
  const std::uint64_t nchunks = (trials + kChunk - 1) / kChunk;
  std::vector<Welford> partial(nchunks);
  parallel_for_blocks(nchunks, threads, [&](index_t cb, index_t ce) {
    for (index_t c = cb; c < ce; ++c) {
      const std::uint64_t lo = c * kChunk;
      const std::uint64_t hi = std::min<std::uint64_t>(lo + kChunk, trials);
      Welford w;
      for (std::uint64_t t = lo; t < hi; ++t) w.push(trial_fn(t));
      partial[c] = w;
    }
  });
  Welford acc;
  for (const auto& w : partial) acc.merge(w);

  MomentEstimate est;
  est.trials = trials;
  est.mean = acc.mean;
  est.variance = trials > 1 ? acc.m2 / static_cast<double>(trials - 1) : 0.0;
  est.std_err = trials > 1 ? std::sqrt(est.variance / static_cast<double>(trials)) : 0.0;
  return est;
}

double spectral_property_test(
    const std::function<DenseMatrix(const DenseMatrix&, std::uint64_t)>& applier,
    const DenseMatrix& u, const SpectralTestConfig& cfg, std::uint64_t trials) {
  if (trials == 0) throw DimensionError("spectral_property_test: trials must be positive");
  const double fro2 = frobenius_norm(u) * frobenius_norm(u);
  const double op = operator_norm(u);
  const double slack = 1e-9;
  if (fro2 > cfg.mu_f * (1.0 + slack) + slack) {
    throw DimensionError("spectral_property_test: U violates the Frobenius budget");
  }
  if (op * op > cfg.mu_2 * (1.0 + slack) + slack) {
    throw DimensionError("spectral_property_test: U violates the operator-norm budget");
  }
  const DenseMatrix exact = gram(u);
  std::uint64_t passes = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const DenseMatrix su = applier(u, t);
    const DenseMatrix err = sub(gram(su), exact);
    if (operator_norm(err) <= cfg.eps) ++passes;
  }
  return static_cast<double>(passes) / static_cast<double>(trials);
}

VarianceProbeResult tensorsketch_variance_probe(index_t d, unsigned q, index_t m,
                                                std::uint64_t trials, const SeedPath& seed,
                                                unsigned threads) {
  if (q == 0) throw DimensionError("variance probe: q must be positive");
  if (q > d) throw DimensionError("variance probe: requires q <= d");
  if (!is_pow2(m)) throw DimensionError("variance probe: m must be a power of two");
  if (trials == 0) throw DimensionError("variance probe: trials must be positive");

  const Fft plan(m);
  const double dq = std::pow(static_cast<double>(d), static_cast<double>(q));

  // Per trial: q independent (hash, sign) bucketings of the all-ones vector,
  // multiplied in the spectral domain.  With unitary transforms each pairwise
  // convolution picks up √m, so q factors need m^{(q-1)/2} at the end.
  auto trial_fn = [&](std::uint64_t t) {
    const SeedPath trial_seed = seed.derive("probe-trial", 0, t);
    ComplexBuffer spectrum(m, 1.0);
    ComplexBuffer bucket(m);
    for (unsigned k = 0; k < q; ++k) {
      const SeedPath leg = trial_seed.derive("probe-leg", 0, k);
      const KWiseHash h(4, m, leg.derive("bucket", 0, 0));
      const SignHash sg(leg.derive("sign", 0, 0));
      std::fill(bucket.begin(), bucket.end(), std::complex<double>(0.0));
      for (index_t i = 0; i < d; ++i) bucket[h(i)] += static_cast<double>(sg(i));
      plan.forward(bucket);
      for (index_t r = 0; r < m; ++r) spectrum[r] *= bucket[r];
    }
    plan.inverse(spectrum);
    const double scale = std::pow(static_cast<double>(m), (static_cast<double>(q) - 1.0) / 2.0);
    double norm2 = 0.0;
    for (index_t r = 0; r < m; ++r) {
      const double re = scale * spectrum[r].real();
      norm2 += re * re;
    }
    return norm2 / dq;  // ‖Mx^{⊗q}‖² / ‖x^{⊗q}‖²
  };

  // Accumulate the normalized squared norm and its square in one pass.
  std::vector<double> ynorm(trials);
  const std::uint64_t nchunks = (trials + kChunk - 1) / kChunk;
  parallel_for_blocks(nchunks, threads, [&](index_t cb, index_t ce) {
    for (index_t c = cb; c < ce; ++c) {
      const std::uint64_t lo = c * kChunk;
      const std::uint64_t hi = std::min<std::uint64_t>(lo + kChunk, trials);
      for (std::uint64_t t = lo; t < hi; ++t) ynorm[t] = trial_fn(t);
    }
  });

  Welford w2, w4;
  for (std::uint64_t t = 0; t < trials; ++t) {
    w2.push(ynorm[t]);
    w4.push(ynorm[t] * ynorm[t]);
  }

  VarianceProbeResult r;
  r.trials = trials;
  r.second_moment = w2.mean;
  r.fourth_moment = w4.mean;
  const double var4 = trials > 1 ? w4.m2 / static_cast<double>(trials - 1) : 0.0;
  r.fourth_std_err = std::sqrt(var4 / static_cast<double>(trials));
  r.variance = w4.mean - w2.mean * w2.mean;
  return r;
}

}  // namespace tskit::oracle
