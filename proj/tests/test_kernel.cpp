#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "tskit/kernel_apps.hpp"
#include "tskit/oracle.hpp"
#include "tskit/tensor_ops.hpp"

using namespace tskit;

namespace {

DenseMatrix random_points(index_t d, index_t n, double radius_sq, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  DenseMatrix x(d, n);
  for (index_t j = 0; j < n; ++j) {
    std::vector<double> col(d);
    double nsq = 0.0;
    for (auto& e : col) {
      e = dist(gen);
      nsq += e * e;
    }
    // Scale every point to a fixed fraction of the radius bound.
    const double target = radius_sq * (0.3 + 0.6 * static_cast<double>(j) / static_cast<double>(n));
    const double f = std::sqrt(target / nsq);
    for (auto& e : col) e *= f;
    x.set_col(j, col);
  }
  return x;
}

double inner(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (index_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Exact truncated Gaussian kernel value: e^{−(‖x‖²+‖y‖²)/2}·Σ_{l≤q}⟨x,y⟩^l/l!.
double truncated_kernel(const std::vector<double>& x, const std::vector<double>& y, unsigned q) {
  const double w = std::exp(-0.5 * (inner(x, x) + inner(y, y)));
  long double acc = 0.0L, term = 1.0L;
  const long double ip = inner(x, y);
  for (unsigned l = 0; l <= q; ++l) {
    acc += term;
    term *= ip / static_cast<long double>(l + 1);
  }
  return w * static_cast<double>(acc);
}

}  // namespace

TEST_CASE("polynomial gram powers the plain gram entrywise") {
  const DenseMatrix x = random_points(3, 4, 2.0, 1);
  const DenseMatrix g1 = gram_polynomial(x, 1);
  const DenseMatrix g3 = gram_polynomial(x, 3);
  const DenseMatrix g = gram(x);
  for (index_t j = 0; j < 4; ++j) {
    for (index_t i = 0; i < 4; ++i) {
      CHECK(g1(i, j) == doctest::Approx(g(i, j)));
      CHECK(g3(i, j) == doctest::Approx(std::pow(g(i, j), 3.0)));
    }
  }
}

TEST_CASE("gaussian gram matches its definition") {
  const DenseMatrix x = random_points(4, 5, 1.5, 2);
  const DenseMatrix g = gram_gaussian(x);
  for (index_t i = 0; i < 5; ++i) CHECK(g(i, i) == 1.0);  // exactly
  for (index_t j = 0; j < 5; ++j) {
    for (index_t i = 0; i < 5; ++i) {
      double dist_sq = 0.0;
      for (index_t k = 0; k < 4; ++k) {
        const double diff = x(k, i) - x(k, j);
        dist_sq += diff * diff;
      }
      CHECK(g(i, j) == doctest::Approx(std::exp(-0.5 * dist_sq)).epsilon(1e-12));
      CHECK(g(i, j) == g(j, i));
    }
  }
}

TEST_CASE("statistical dimension matches hand values") {
  const std::vector<double> flat{1.0, 1.0, 1.0};
  CHECK(statistical_dimension(flat, 1.0) == doctest::Approx(1.5));
  const std::vector<double> pair{2.0, 0.0};
  CHECK(statistical_dimension(pair, 2.0) == doctest::Approx(0.5));
  const std::vector<double> tiny_neg{1.0, -1e-14};
  CHECK(statistical_dimension(tiny_neg, 1.0) == doctest::Approx(0.5));
  const std::vector<double> indefinite{1.0, -0.5};
  CHECK_THROWS_AS(statistical_dimension(indefinite, 1.0), Error);
  CHECK_THROWS_AS(statistical_dimension(flat, 0.0), Error);
  CHECK_THROWS_AS(statistical_dimension(flat, -1.0), Error);
}

TEST_CASE("series tail matches the closed form at degree zero") {
  // Σ_{l≥1} n·z^l/l! = n·(e^z − 1) with z = r².
  for (double r : {0.5, 1.0, 2.0}) {
    for (index_t n : {1ull, 10ull, 1000ull}) {
      const double expect = static_cast<double>(n) * std::expm1(r * r);
      CHECK(taylor_tail(0, r, n) == doctest::Approx(expect).epsilon(1e-13));
    }
  }
}

TEST_CASE("series tail matches direct summation") {
  for (unsigned q : {1u, 3u, 7u, 15u}) {
    for (double r : {0.7, 1.0, 2.0}) {
      long double acc = 0.0L;
      const long double z = static_cast<long double>(r) * r;
      long double term = 1.0L;
      for (unsigned l = 1; l <= q; ++l) term *= z / l;  // z^q/q!
      for (unsigned l = q + 1; l <= q + 500; ++l) {
        term *= z / l;
        acc += term;
      }
      const double expect = 5.0 * static_cast<double>(acc);
      CHECK(taylor_tail(q, r, 5) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("series tail is monotone and vanishes at radius zero") {
  double prev = taylor_tail(1, 1.5, 20);
  for (unsigned q = 2; q <= 12; ++q) {
    const double cur = taylor_tail(q, 1.5, 20);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(taylor_tail(4, 0.0, 100) == 0.0);
}

TEST_CASE("truncation degree lands on frozen values") {
  // Threshold ε·λ/2 = 0.005 with unit radius over ten points needs degree 6;
  // threshold 0.025 over eight points needs degree 5.
  CHECK(gaussian_degree(1.0, 10, 0.1, 0.1) == 6);
  CHECK(gaussian_degree(1.0, 8, 0.5, 0.1) == 5);
  CHECK(gaussian_degree(0.0, 100, 0.5, 0.1) == 0);
  // Degrees never drop when the task tightens.
  CHECK(gaussian_degree(1.0, 10, 0.05, 0.1) >= gaussian_degree(1.0, 10, 0.1, 0.1));
  CHECK(gaussian_degree(2.0, 10, 0.1, 0.1) >= gaussian_degree(1.0, 10, 0.1, 0.1));
  // An impossible budget under the degree cap is an error.
  CHECK_THROWS_AS(gaussian_degree(3.0, 1000000, 1e-6, 1e-8, 8), Error);
}

TEST_CASE("series truncation bounds the spectral gap to the gaussian gram") {
  const index_t d = 3, n = 6;
  const double r = 1.5;
  const DenseMatrix x = random_points(d, n, r, 3);
  const DenseMatrix g = gram_gaussian(x);
  const DenseMatrix ip = gram(x);
  std::vector<double> w(n);
  for (index_t i = 0; i < n; ++i) w[i] = std::exp(-0.5 * ip(i, i));
  for (unsigned q : {2u, 4u, 6u}) {
    DenseMatrix p(n, n);
    for (index_t j = 0; j < n; ++j) {
      for (index_t i = 0; i < n; ++i) {
        long double acc = 0.0L, term = 1.0L;
        for (unsigned l = 0; l <= q; ++l) {
          acc += term;
          term *= static_cast<long double>(ip(i, j)) / (l + 1);
        }
        p(i, j) = w[i] * w[j] * static_cast<double>(acc);
      }
    }
    const DenseMatrix diff = sub(g, p);
    CHECK(oracle::operator_norm(diff) <= taylor_tail(q, std::sqrt(r), n) + 1e-12);
  }
}

TEST_CASE("feature map exposes its per-degree layout") {
  const index_t d = 4;
  KernelJob job;
  job.lambda = 0.1;
  job.eps = 0.5;
  job.delta = 0.2;
  job.r = 1.0;
  job.n = 8;
  SizingConstants tiny;
  tiny.c_const = 0.02;
  const auto map = GaussianFeatureMap::build(d, job, 2.0, SketchVariant::const_prob(),
                                             SeedPath::root(0xFEA7), tiny);
  CHECK(map.q_taylor() == 5);
  CHECK(map.input_dim() == d);
  const auto dims = map.degree_dims();
  REQUIRE(dims.size() == map.q_taylor() + 1);
  CHECK(dims[0] == 1);
  index_t total = 0;
  for (index_t v : dims) total += v;
  CHECK(total == map.total_dim());
  CHECK(map.tail_bound() <= job.eps * job.lambda / 2.0);
  for (index_t l = 2; l < dims.size(); ++l) {
    CHECK((dims[l] & (dims[l] - 1)) == 0);  // convolution merge widths
  }
}

TEST_CASE("feature vector starts with the gaussian weight") {
  KernelJob job;
  job.lambda = 0.1;
  job.eps = 0.5;
  job.delta = 0.2;
  job.r = 1.0;
  job.n = 8;
  SizingConstants tiny;
  tiny.c_const = 0.02;
  const auto map = GaussianFeatureMap::build(3, job, 2.0, SketchVariant::const_prob(),
                                             SeedPath::root(0xFEA8), tiny);
  const std::vector<double> x{0.3, -0.4, 0.5};
  const auto f = map.apply_point(x);
  REQUIRE(f.size() == map.total_dim());
  CHECK(f[0] == std::exp(-0.5 * inner(x, x)));
}

TEST_CASE("feature map rejects points outside the radius bound") {
  KernelJob job;
  job.lambda = 0.1;
  job.eps = 0.5;
  job.delta = 0.2;
  job.r = 1.0;
  job.n = 8;
  SizingConstants tiny;
  tiny.c_const = 0.02;
  const auto map = GaussianFeatureMap::build(2, job, 2.0, SketchVariant::const_prob(),
                                             SeedPath::root(0xFEA9), tiny);
  const std::vector<double> far{2.0, 2.0};
  CHECK_THROWS_AS(map.apply_point(far), DimensionError);
  DenseMatrix x(2, 3);
  x(0, 0) = 0.1;
  x(0, 1) = 0.2;
  x(0, 2) = 1.4;  // column 2 has squared norm 1.96 > 1
  try {
    map.apply(x);
    FAIL("expected a radius violation");
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("feature matrix application is column-consistent and thread-invariant") {
  KernelJob job;
  job.lambda = 0.1;
  job.eps = 0.5;
  job.delta = 0.2;
  job.r = 1.0;
  job.n = 5;
  SizingConstants tiny;
  tiny.c_const = 0.02;
  const auto map = GaussianFeatureMap::build(3, job, 2.0, SketchVariant::const_prob(),
                                             SeedPath::root(0xFEAA), tiny);
  const DenseMatrix x = random_points(3, 5, 1.0, 4);
  const auto sk1 = map.apply(x, 1);
  const auto sk4 = map.apply(x, 4);
  CHECK(sk1.data.storage() == sk4.data.storage());
  CHECK(sk1.data.rows() == map.total_dim());
  CHECK(sk1.data.cols() == 5);
  for (index_t j = 0; j < 5; ++j) {
    const auto cj = x.col(j);
    const auto direct = map.apply_point(std::vector<double>(cj.begin(), cj.end()));
    for (index_t i = 0; i < map.total_dim(); ++i) CHECK(sk1.data(i, j) == direct[i]);
  }
  CHECK(sk1.provenance.m == map.total_dim());
  CHECK(sk1.provenance.p == map.q_taylor());
}

TEST_CASE("feature inner products estimate the truncated kernel without bias") {
  KernelJob job;
  job.lambda = 0.1;
  job.eps = 0.5;
  job.delta = 0.2;
  job.r = 1.0;
  job.n = 8;
  SizingConstants tiny;
  tiny.c_const = 0.005;
  tiny.c1_high = 1e-7;  // test-scale widths; unbiasedness holds at any m
  tiny.c2_high = 2e-8;
  const std::vector<double> x{0.5, -0.3, 0.2};
  const std::vector<double> y{-0.1, 0.6, 0.4};
  const SeedPath root = SeedPath::root(0xCAFE);
  const std::uint64_t trials = 4000;
  for (const auto variant : {SketchVariant::const_prob(), SketchVariant::high_prob(2)}) {
    double mean = 0.0, m2 = 0.0;
    unsigned q = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      const auto map = GaussianFeatureMap::build(
          3, job, 2.0, variant, root.derive(variant_name(variant.kind), 0, t), tiny);
      q = map.q_taylor();
      const double v = inner(map.apply_point(x), map.apply_point(y));
      const double delta = v - mean;
      mean += delta / static_cast<double>(t + 1);
      m2 += delta * (v - mean);
    }
    const double target = truncated_kernel(x, y, q);
    const double se = std::sqrt(m2 / static_cast<double>(trials - 1) / static_cast<double>(trials));
    CHECK(std::fabs(mean - target) <= 4.0 * se);
  }
}

TEST_CASE("regularized spectral error has closed forms") {
  const index_t n = 5;
  const DenseMatrix s = random_points(7, n, 2.0, 6);
  const DenseMatrix k = gram(s);
  CHECK(ose_spectral_error(s, k, 0.5) == doctest::Approx(0.0).epsilon(1e-10));
  // Inflating a whitened identity: K = I, SᵀS = (1+c)·I, λ = 1 ⇒ error c/2.
  const double c = 0.3;
  DenseMatrix root_scaled = DenseMatrix::identity(n);
  scale_inplace(root_scaled, std::sqrt(1.0 + c));
  CHECK(ose_spectral_error(root_scaled, DenseMatrix::identity(n), 1.0) ==
        doctest::Approx(c / 2.0).epsilon(1e-10));
}

TEST_CASE("product error functional has closed forms") {
  const DenseMatrix c = random_points(6, 3, 2.0, 7);
  const DenseMatrix d = random_points(6, 4, 2.0, 8);
  auto identity_applier = [](const DenseMatrix& m) { return m; };
  CHECK(amp_error(c, d, identity_applier) == doctest::Approx(0.0));
  // Scaling the image by √2 doubles the product: error = ‖CᵀD‖_F/(‖C‖_F‖D‖_F).
  auto doubling_applier = [](const DenseMatrix& m) {
    DenseMatrix out = m;
    scale_inplace(out, std::sqrt(2.0));
    return out;
  };
  const double expect =
      frobenius_norm(matmul(transpose(c), d)) / (frobenius_norm(c) * frobenius_norm(d));
  CHECK(amp_error(c, d, doubling_applier) == doctest::Approx(expect).epsilon(1e-12));
  const DenseMatrix zero(6, 3);
  CHECK(amp_error(zero, d, identity_applier) == 0.0);
}

TEST_CASE("sketched ridge regression approaches the exact objective") {
  const index_t d = 3, n = 6;
  const DenseMatrix x = random_points(d, n, 2.0, 9);
  const std::vector<double> b{0.4, -0.2, 0.7};
  const double lambda = 0.5;
  for (const auto variant : {SketchVariant::const_prob(), SketchVariant::high_prob(8)}) {
    const auto res = sketch_ridge_regression(x, b, 2, lambda, 1024, 0.2, 0.1, variant,
                                             SeedPath::root(0x21D6E));
    CHECK(res.coefficients.size() == n);
    CHECK(res.m_used == 1024);
    // The exact objective of any vector is at least the optimum.
    CHECK(res.ratio >= 1.0 - 1e-9);
    CHECK(res.ratio <= 1.2);
    CHECK(res.objective_sketched >=
          res.objective_optimal * (1.0 - 1e-9));
  }
}

TEST_CASE("ridge regression sizes itself when no width is given") {
  const index_t d = 3, n = 5;
  const DenseMatrix x = random_points(d, n, 1.5, 10);
  const std::vector<double> b{0.3, 0.1, -0.5};
  const auto cp = sketch_ridge_regression(x, b, 2, 2.0, 0, 0.9, 0.5,
                                          SketchVariant::const_prob(), SeedPath::root(0xA0));
  CHECK(cp.m_used > 0);
  CHECK((cp.m_used & (cp.m_used - 1)) == 0);
  CHECK(cp.ratio >= 1.0 - 1e-9);
  const auto hp = sketch_ridge_regression(x, b, 2, 2.0, 0, 0.9, 0.5,
                                          SketchVariant::high_prob(1), SeedPath::root(0xA1));
  CHECK(hp.m_used > 0);
  CHECK(hp.s_used >= 1);
  CHECK(hp.s_used <= hp.m_used);
  CHECK(hp.ratio >= 1.0 - 1e-9);
}

TEST_CASE("ridge regression validates its inputs") {
  const DenseMatrix x = random_points(3, 4, 1.0, 11);
  const std::vector<double> b{1.0, 0.0, 0.0};
  const std::vector<double> short_b{1.0, 0.0};
  CHECK_THROWS_AS(sketch_ridge_regression(x, b, 2, 0.0, 64, 0.5, 0.1,
                                          SketchVariant::const_prob(), SeedPath::root(1)),
                  Error);
  CHECK_THROWS_AS(sketch_ridge_regression(x, short_b, 2, 1.0, 64, 0.5, 0.1,
                                          SketchVariant::const_prob(), SeedPath::root(1)),
                  DimensionError);
  CHECK_THROWS_AS(sketch_ridge_regression(x, b, 1, 1.0, 64, 0.5, 0.1,
                                          SketchVariant::const_prob(), SeedPath::root(1)),
                  DimensionError);
}
