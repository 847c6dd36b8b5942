// tskit command-line driver: dataset I/O, sketching, Gaussian feature maps,
// ridge regression, verification suites, and benchmarks.
//
// Exit codes: 0 success, 2 usage, 3 I/O, 4 dimension/validation,
// 5 verification failure.  Every command is a pure function of its inputs and
// flags: matrix outputs, manifests, and reports are byte-identical across
// reruns and thread counts.  Wall-clock timings go to stderr only.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "tskit/io.hpp"
#include "tskit/kernel_apps.hpp"
#include "tskit/oracle.hpp"
#include "tskit/recursive_sketch.hpp"
#include "tskit/tensor_ops.hpp"

using nlohmann::ordered_json;
using namespace tskit;

namespace {

constexpr std::uint64_t kDefaultSeed = 0x5EED0001ull;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitDimension = 4;
constexpr int kExitVerification = 5;

struct RunConfig {
  std::string input;
  std::string output;
  std::string b_path;
  unsigned p = 2;
  index_t m = 0;  // 0 = size from (lambda, eps, delta)
  index_t sparsity = 1;
  bool sparsity_given = false;
  double lambda = 0.0;
  double eps = 0.5;
  double delta = 0.1;
  std::string variant = "const-prob";
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t trials = 0;  // 0 = suite default
  unsigned threads = 1;
  std::string format;  // output format override; inputs go by extension
  SizingConstants constants;
};

class Timer {
 public:
  explicit Timer(std::string label) : label_(std::move(label)), start_(clock::now()) {}
  ~Timer() {
    const auto ms = std::chrono::duration<double, std::milli>(clock::now() - start_).count();
    std::cerr << "[time] " << label_ << " " << ms << " ms\n";
  }

 private:
  using clock = std::chrono::steady_clock;
  std::string label_;
  clock::time_point start_;
};

SketchVariant make_variant(const RunConfig& cfg) {
  if (cfg.variant == "const-prob") return SketchVariant::const_prob();
  if (cfg.variant == "high-prob") return SketchVariant::high_prob(cfg.sparsity);
  throw DimensionError("unknown variant: " + cfg.variant);
}

MatrixFormat output_format(const RunConfig& cfg, const std::string& path) {
  if (!cfg.format.empty()) return parse_matrix_format(cfg.format);
  return guess_matrix_format(path);
}

index_t count_nnz(const DenseMatrix& m) {
  index_t nnz = 0;
  for (double v : m.storage()) {
    if (v != 0.0) ++nnz;
  }
  return nnz;
}

void write_manifest(const std::string& output_path, const ordered_json& body) {
  const std::string path = output_path + ".manifest.json";
  std::ofstream out(path);
  if (!out) throw IoError("cannot open manifest for writing: " + path);
  out << body.dump(2) << '\n';
  if (!out) throw IoError("short write: " + path);
}

ordered_json manifest_header(const char* command, const RunConfig& cfg) {
  ordered_json j;
  j["schema"] = "kmat_manifest_v1";
  j["command"] = command;
  j["input"] = cfg.input;
  j["variant"] = cfg.variant;
  j["seed"] = cfg.seed;
  j["const_c"] = cfg.constants.c_const;
  j["const_c1"] = cfg.constants.c1_high;
  j["const_c2"] = cfg.constants.c2_high;
  return j;
}

// Statistical dimension of the degree-p polynomial kernel of X at lambda,
// via the exact eigendecomposition (verification-grade, n kept small).
double measured_stat_dim(const DenseMatrix& x, unsigned p, double lambda) {
  const DenseMatrix k = gram_polynomial(x, p);
  const auto eig = oracle::symmetric_eig(k);
  return statistical_dimension(eig.values, lambda);
}

// --- deterministic data generation for the verification suites ---

double uniform01(SeedStream& s) {
  return static_cast<double>(s.next_u64() >> 11) * 0x1.0p-53;
}

double gaussian01(SeedStream& s) {
  constexpr double kTwoPi = 6.283185307179586;
  const double u1 = std::max(uniform01(s), 1e-300);
  const double u2 = uniform01(s);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::vector<double> gaussian_vector(index_t n, SeedStream& s) {
  std::vector<double> v(n);
  for (auto& e : v) e = gaussian01(s);
  return v;
}

DenseMatrix gaussian_matrix(index_t rows, index_t cols, SeedStream& s) {
  DenseMatrix m(rows, cols);
  for (index_t j = 0; j < cols; ++j) {
    for (index_t i = 0; i < rows; ++i) m(i, j) = gaussian01(s);
  }
  return m;
}

DenseMatrix unit_columns(index_t rows, index_t cols, SeedStream& s) {
  DenseMatrix m = gaussian_matrix(rows, cols, s);
  for (index_t j = 0; j < cols; ++j) {
    auto cj = m.col(j);
    std::vector<double> col(cj.begin(), cj.end());
    double nsq = 0.0;
    for (double v : col) nsq += v * v;
    const double inv = 1.0 / std::sqrt(nsq);
    for (auto& v : col) v *= inv;
    m.set_col(j, col);
  }
  return m;
}

double vec_inner(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (index_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Image of an arbitrary lifted vector v ∈ R^{d²} under a degree-2 recursive
// sketch, by linearity over the decomposition v = Σ_j a_j ⊗ e_j (a_j the j-th
// d-slice).  Exact, and avoids materializing the m×d² map.
DenseMatrix apply_lifted2(const RecursiveSketch& rs, const DenseMatrix& in) {
  const index_t d = rs.input_dim(), m = rs.output_dim();
  if (in.rows() != d * d) throw DimensionError("apply_lifted2: row count must be d²");
  std::vector<std::vector<double>> basis_images(d);
  std::vector<double> e(d, 0.0);
  for (index_t j = 0; j < d; ++j) {
    e.assign(d, 0.0);
    e[j] = 1.0;
    basis_images[j] = rs.leaf(1).apply(e);
  }
  const PairSketch& merge = rs.internal(0, 0);
  DenseMatrix out(m, in.cols());
  std::vector<double> a(d), term(m), acc(m);
  for (index_t c = 0; c < in.cols(); ++c) {
    const auto col = in.col(c);
    acc.assign(m, 0.0);
    for (index_t j = 0; j < d; ++j) {
      for (index_t i = 0; i < d; ++i) a[i] = col[i + d * j];
      const auto y0 = rs.leaf(0).apply(a);
      merge.apply_pair(y0, basis_images[j], term);
      for (index_t r = 0; r < m; ++r) acc[r] += term[r];
    }
    out.set_col(c, acc);
  }
  return out;
}

// --- commands ---

int cmd_sketch(const RunConfig& cfg) {
  Timer timer("sketch");
  const DenseMatrix x = read_matrix(cfg.input, guess_matrix_format(cfg.input));
  const index_t d = x.rows(), n = x.cols();

  SketchVariant variant = make_variant(cfg);
  index_t m = cfg.m;
  if (m == 0) {
    if (cfg.lambda <= 0.0) {
      throw DimensionError("automatic sizing needs --lambda (plus --eps/--delta); pass --m "
                           "for an explicit width");
    }
    const double s_lambda = measured_stat_dim(x, cfg.p, cfg.lambda);
    if (variant.kind == SketchVariantKind::ConstProb) {
      m = target_dim_const_prob(cfg.p, s_lambda, cfg.eps, cfg.constants, cfg.delta);
    } else {
      const auto dims =
          target_dim_high_prob(cfg.p, s_lambda, cfg.eps, n, d, cfg.delta, cfg.constants);
      m = dims.m;
      if (!cfg.sparsity_given) variant.osnap_sparsity = dims.s;
    }
  }

  const auto sketch = RecursiveSketch::build(d, cfg.p, m, variant, SeedPath::root(cfg.seed));
  const SketchedMatrix result = sketch.apply_matrix(x, cfg.threads);
  write_matrix(cfg.output, result.data, output_format(cfg, cfg.output));

  ordered_json j = manifest_header("sketch", cfg);
  j["p"] = cfg.p;
  j["d"] = d;
  j["n"] = n;
  j["m"] = sketch.output_dim();
  j["s"] = variant.kind == SketchVariantKind::HighProb ? variant.osnap_sparsity : 1;
  j["nnz"] = count_nnz(x);
  j["rows"] = result.data.rows();
  j["cols"] = result.data.cols();
  write_manifest(cfg.output, j);
  return 0;
}

int cmd_gaussian_features(const RunConfig& cfg) {
  Timer timer("gaussian-features");
  const DenseMatrix x = read_matrix(cfg.input, guess_matrix_format(cfg.input));
  const index_t d = x.rows(), n = x.cols();
  if (cfg.lambda <= 0.0) throw DimensionError("gaussian-features requires --lambda > 0");

  // The radius bound is the tightest valid one: the largest squared column
  // norm present in the data.
  double r = 0.0;
  for (index_t j = 0; j < n; ++j) {
    double nsq = 0.0;
    for (double v : x.col(j)) nsq += v * v;
    r = std::max(r, nsq);
  }

  KernelJob job;
  job.lambda = cfg.lambda;
  job.eps = cfg.eps;
  job.delta = cfg.delta;
  job.r = r;
  job.n = n;

  const DenseMatrix g = gram_gaussian(x);
  const auto eig = oracle::symmetric_eig(g);
  const double s_lambda = statistical_dimension(eig.values, cfg.lambda);

  const auto map = GaussianFeatureMap::build(d, job, s_lambda, make_variant(cfg),
                                             SeedPath::root(cfg.seed), cfg.constants);
  const SketchedMatrix result = map.apply(x, cfg.threads);
  write_matrix(cfg.output, result.data, output_format(cfg, cfg.output));

  ordered_json j = manifest_header("gaussian-features", cfg);
  j["d"] = d;
  j["n"] = n;
  j["lambda"] = cfg.lambda;
  j["eps"] = cfg.eps;
  j["delta"] = cfg.delta;
  j["radius_sq"] = r;
  j["s_lambda"] = s_lambda;
  j["q_taylor"] = map.q_taylor();
  j["degree_dims"] = std::vector<index_t>(map.degree_dims().begin(), map.degree_dims().end());
  j["tail_bound"] = map.tail_bound();
  j["m"] = map.total_dim();
  j["s"] = map.variant().kind == SketchVariantKind::HighProb ? map.variant().osnap_sparsity : 1;
  j["nnz"] = count_nnz(x);
  j["rows"] = result.data.rows();
  j["cols"] = result.data.cols();
  write_manifest(cfg.output, j);
  return 0;
}

int cmd_krr(const RunConfig& cfg) {
  Timer timer("krr");
  const DenseMatrix x = read_matrix(cfg.input, guess_matrix_format(cfg.input));
  const DenseMatrix braw = read_matrix(cfg.b_path, guess_matrix_format(cfg.b_path));
  std::vector<double> b;
  if (braw.cols() == 1) {
    b.assign(braw.storage().begin(), braw.storage().end());
  } else if (braw.rows() == 1) {
    b.resize(braw.cols());
    for (index_t j = 0; j < braw.cols(); ++j) b[j] = braw(0, j);
  } else {
    throw DimensionError("--b must be a vector (one row or one column)");
  }

  const auto res =
      sketch_ridge_regression(x, b, cfg.p, cfg.lambda, cfg.m, cfg.eps, cfg.delta,
                              make_variant(cfg), SeedPath::root(cfg.seed), cfg.constants,
                              cfg.threads);

  if (!cfg.output.empty()) {
    DenseMatrix coeffs(res.coefficients.size(), 1);
    for (index_t i = 0; i < res.coefficients.size(); ++i) coeffs(i, 0) = res.coefficients[i];
    write_matrix(cfg.output, coeffs, output_format(cfg, cfg.output));
  }

  ordered_json j;
  j["objective_exact_opt"] = res.objective_optimal;
  j["objective_sketched_solution"] = res.objective_sketched;
  j["ratio"] = res.ratio;
  j["m_used"] = res.m_used;
  j["s_used"] = res.s_used;
  std::cout << j.dump(2) << '\n';
  return 0;
}

// --- verification suites ---

struct CheckList {
  ordered_json checks = ordered_json::array();
  bool all_pass = true;

  void add(const std::string& name, double observed, double threshold, const char* op,
           bool pass) {
    ordered_json c;
    c["name"] = name;
    c["observed"] = observed;
    c["threshold"] = threshold;
    c["op"] = op;
    c["pass"] = pass;
    checks.push_back(c);
    all_pass = all_pass && pass;
  }
  void leq(const std::string& name, double observed, double threshold) {
    add(name, observed, threshold, "<=", observed <= threshold);
  }
  void geq(const std::string& name, double observed, double threshold) {
    add(name, observed, threshold, ">=", observed >= threshold);
  }
};

int emit_report(const std::string& suite, CheckList& list, ordered_json extra = {}) {
  ordered_json report;
  report["suite"] = suite;
  if (!extra.empty()) report["config"] = extra;
  report["checks"] = list.checks;
  report["pass"] = list.all_pass;
  std::cout << report.dump(2) << '\n';
  return list.all_pass ? 0 : kExitVerification;
}

int suite_tail(const RunConfig&) {
  CheckList list;
  // Anchor: the full series at q = 0, r = 1, n = 1 sums to e − 1.
  list.leq("anchor_q0_abs_err", std::fabs(taylor_tail(0, 1.0, 1) - std::expm1(1.0)), 1e-12);
  // Strict monotone decay in the truncation degree.
  double violations = 0.0;
  for (double r : {0.5, 1.0, 2.0}) {
    double prev = taylor_tail(0, r, 10);
    for (unsigned q = 1; q <= 10; ++q) {
      const double cur = taylor_tail(q, r, 10);
      if (!(cur < prev)) violations += 1.0;
      prev = cur;
    }
  }
  list.leq("monotonicity_violations", violations, 0.0);
  list.leq("zero_radius_tail", taylor_tail(5, 0.0, 100), 0.0);
  // The chosen truncation degree is the first one under budget.
  const double eps = 0.1, lambda = 0.1;
  const unsigned q = gaussian_degree(1.0, 10, eps, lambda);
  list.leq("chosen_degree_tail", taylor_tail(q, 1.0, 10), eps * lambda / 2.0);
  const double prev_tail = q == 0 ? 1e300 : taylor_tail(q - 1, 1.0, 10);
  list.geq("previous_degree_tail", prev_tail, std::nextafter(eps * lambda / 2.0, 1e300));
  return emit_report("tail", list);
}

int suite_unbiased(const RunConfig& cfg) {
  const std::uint64_t trials = cfg.trials == 0 ? 20000 : cfg.trials;
  const index_t d = 4;
  const index_t m = cfg.m == 0 ? 16 : cfg.m;
  const unsigned p = cfg.p;
  const SeedPath root = SeedPath::root(cfg.seed);
  SeedStream data(root.derive("unbiased-data", 0, 0));
  const auto x = gaussian_vector(d, data);
  const auto y = gaussian_vector(d, data);
  const double target = std::pow(vec_inner(x, y), static_cast<double>(p));

  CheckList list;
  for (const auto variant :
       {SketchVariant::const_prob(), SketchVariant::high_prob(cfg.sparsity_given ? cfg.sparsity : 4)}) {
    const auto est = oracle::estimate_moments(
        [&](std::uint64_t t) {
          const auto rs = RecursiveSketch::build(
              d, p, m, variant, root.derive(variant_name(variant.kind), 0, t));
          return vec_inner(rs.apply_point(x), rs.apply_point(y));
        },
        trials, cfg.threads);
    const double z = std::fabs(est.mean - target) / est.std_err;
    list.leq(std::string("z_score_") + variant_name(variant.kind), z, 4.0);
  }
  ordered_json extra;
  extra["trials"] = trials;
  extra["p"] = p;
  extra["m"] = m;
  extra["target"] = target;
  return emit_report("unbiased", list, extra);
}

int suite_second_moment(const RunConfig& cfg) {
  const std::uint64_t trials = cfg.trials == 0 ? 20000 : cfg.trials;
  const index_t d = 4;
  const index_t m = cfg.m == 0 ? 64 : cfg.m;
  const SeedPath root = SeedPath::root(cfg.seed);
  SeedStream data(root.derive("second-moment-data", 0, 0));
  const auto x = gaussian_vector(d, data);
  const auto y = gaussian_vector(d, data);
  const double nx = vec_inner(x, x), ny = vec_inner(y, y);

  CheckList list;
  ordered_json table = ordered_json::array();
  double first = 0.0, last = 0.0;
  for (unsigned p : {2u, 4u, 8u}) {
    const double scale = std::pow(nx * ny, static_cast<double>(p));
    const auto est = oracle::estimate_moments(
        [&](std::uint64_t t) {
          const auto rs = RecursiveSketch::build(d, p, m, SketchVariant::const_prob(),
                                                 root.derive("trial", p, t));
          return vec_inner(rs.apply_point(x), rs.apply_point(y));
        },
        trials, cfg.threads);
    const double normalized = est.variance * static_cast<double>(m) / scale;
    ordered_json row;
    row["p"] = p;
    row["normalized_variance"] = normalized;
    table.push_back(row);
    if (p == 2) first = normalized;
    if (p == 8) last = normalized;
  }
  list.leq("growth_p2_to_p8", last / first, 8.0);
  ordered_json extra;
  extra["trials"] = trials;
  extra["m"] = m;
  extra["table"] = table;
  return emit_report("second-moment", list, extra);
}

int suite_variance_probe(const RunConfig& cfg) {
  const std::uint64_t trials = cfg.trials == 0 ? 50000 : cfg.trials;
  const index_t d = 8;
  const index_t m = cfg.m == 0 ? 16 : cfg.m;
  const SeedPath root = SeedPath::root(cfg.seed);

  CheckList list;
  ordered_json table = ordered_json::array();
  double var_first = 0.0, var_last = 0.0;
  for (unsigned q = 2; q <= 6; ++q) {
    const auto r = oracle::tensorsketch_variance_probe(d, q, m, trials,
                                                       root.derive("probe", q, 0), cfg.threads);
    const double floor = std::pow(3.0, static_cast<double>(q)) /
                         (2.0 * static_cast<double>(m) * static_cast<double>(m));
    ordered_json row;
    row["q"] = q;
    row["second_moment"] = r.second_moment;
    row["fourth_moment"] = r.fourth_moment;
    row["fourth_std_err"] = r.fourth_std_err;
    row["variance"] = r.variance;
    row["fourth_moment_floor"] = floor;
    table.push_back(row);
    list.geq("fourth_moment_q" + std::to_string(q), r.fourth_moment + 3.0 * r.fourth_std_err,
             floor);
    if (q == 2) var_first = r.variance;
    if (q == 6) var_last = r.variance;
  }
  list.geq("variance_growth_q2_to_q6", var_last / var_first, std::pow(3.0, 4.0) / 4.0);
  ordered_json extra;
  extra["trials"] = trials;
  extra["d"] = d;
  extra["m"] = m;
  extra["table"] = table;
  return emit_report("variance-probe", list, extra);
}

int suite_ose(const RunConfig& cfg) {
  const std::uint64_t trials = cfg.trials == 0 ? 100 : cfg.trials;
  const index_t n = 16, d = 32;
  const unsigned p = 2;
  const double eps = cfg.eps;
  const SeedPath root = SeedPath::root(cfg.seed);
  SeedStream data(root.derive("ose-data", 0, 0));
  const DenseMatrix x = unit_columns(d, n, data);
  const DenseMatrix k = gram_polynomial(x, p);
  const auto eig = oracle::symmetric_eig(k);

  // Bisect the regularizer onto a mid-range statistical dimension.
  double lo = 1e-8, hi = 1e8;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (statistical_dimension(eig.values, mid) > 4.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double lambda = std::sqrt(lo * hi);
  const double s_lambda = statistical_dimension(eig.values, lambda);

  const index_t m =
      cfg.m != 0 ? cfg.m : target_dim_const_prob(p, s_lambda, eps, cfg.constants, cfg.delta);
  std::uint64_t passes = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto rs = RecursiveSketch::build(d, p, m, SketchVariant::const_prob(),
                                           root.derive("ose-trial", 0, t));
    const auto sk = rs.apply_matrix(x, cfg.threads);
    if (ose_spectral_error(sk.data, k, lambda) <= eps) ++passes;
  }
  const double rate = static_cast<double>(passes) / static_cast<double>(trials);

  CheckList list;
  list.geq("pass_rate", rate, 0.9);
  ordered_json extra;
  extra["trials"] = trials;
  extra["n"] = n;
  extra["d"] = d;
  extra["p"] = p;
  extra["eps"] = eps;
  extra["lambda"] = lambda;
  extra["s_lambda"] = s_lambda;
  extra["m"] = m;
  return emit_report("ose", list, extra);
}

int suite_amp(const RunConfig& cfg) {
  const std::uint64_t trials = cfg.trials == 0 ? 100 : cfg.trials;
  const index_t d = 4;
  const unsigned p = 2;
  const double eps = 0.25;
  const index_t lifted = 16;  // d^p
  const SeedPath root = SeedPath::root(cfg.seed);
  SeedStream data(root.derive("amp-data", 0, 0));
  const DenseMatrix c = gaussian_matrix(lifted, 8, data);
  const DenseMatrix dd = gaussian_matrix(lifted, 8, data);

  const index_t m = next_pow2(static_cast<index_t>(
      std::ceil(cfg.constants.c_const * static_cast<double>(p) / (eps * eps))));
  std::uint64_t passes = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto rs = RecursiveSketch::build(d, p, m, SketchVariant::const_prob(),
                                           root.derive("amp-trial", 0, t));
    auto applier = [&](const DenseMatrix& in) { return apply_lifted2(rs, in); };
    if (amp_error(c, dd, applier) <= eps) ++passes;
  }
  const double rate = static_cast<double>(passes) / static_cast<double>(trials);

  CheckList list;
  list.geq("pass_rate", rate, 0.9);
  ordered_json extra;
  extra["trials"] = trials;
  extra["p"] = p;
  extra["eps"] = eps;
  extra["m"] = m;
  return emit_report("amp", list, extra);
}

int suite_spectral(const RunConfig& cfg) {
  const std::uint64_t trials = cfg.trials == 0 ? 100 : cfg.trials;
  const index_t d = 4;
  const unsigned p = 2;
  const index_t lifted = 16;
  const index_t m = cfg.m == 0 ? 512 : cfg.m;
  const SeedPath root = SeedPath::root(cfg.seed);
  SeedStream data(root.derive("spectral-data", 0, 0));
  DenseMatrix u = gaussian_matrix(lifted, 4, data);
  // Gram–Schmidt so the norm budgets are exact.
  for (index_t j = 0; j < u.cols(); ++j) {
    auto cj = u.col(j);
    std::vector<double> col(cj.begin(), cj.end());
    for (index_t k = 0; k < j; ++k) {
      auto ck = u.col(k);
      double proj = 0.0;
      for (index_t i = 0; i < lifted; ++i) proj += col[i] * ck[i];
      for (index_t i = 0; i < lifted; ++i) col[i] -= proj * ck[i];
    }
    double nsq = 0.0;
    for (double v : col) nsq += v * v;
    const double inv = 1.0 / std::sqrt(nsq);
    for (auto& v : col) v *= inv;
    u.set_col(j, col);
  }

  oracle::SpectralTestConfig scfg;
  scfg.mu_f = static_cast<double>(u.cols()) + 1e-9;
  scfg.mu_2 = 1.0 + 1e-9;
  scfg.eps = cfg.eps;
  scfg.delta = cfg.delta;
  scfg.n = u.cols();

  auto applier = [&](const DenseMatrix& in, std::uint64_t t) {
    const auto rs = RecursiveSketch::build(d, p, m, SketchVariant::const_prob(),
                                           root.derive("spectral-trial", 0, t));
    return apply_lifted2(rs, in);
  };
  const double rate = oracle::spectral_property_test(applier, u, scfg, trials);

  CheckList list;
  list.geq("pass_rate", rate, 1.0 - scfg.delta);
  ordered_json extra;
  extra["trials"] = trials;
  extra["eps"] = scfg.eps;
  extra["delta"] = scfg.delta;
  extra["m"] = m;
  return emit_report("spectral", list, extra);
}

int cmd_verify(const std::string& suite, const RunConfig& cfg) {
  Timer timer("verify " + suite);
  if (suite == "unbiased") return suite_unbiased(cfg);
  if (suite == "second-moment") return suite_second_moment(cfg);
  if (suite == "ose") return suite_ose(cfg);
  if (suite == "amp") return suite_amp(cfg);
  if (suite == "spectral") return suite_spectral(cfg);
  if (suite == "variance-probe") return suite_variance_probe(cfg);
  if (suite == "tail") return suite_tail(cfg);
  throw DimensionError("unknown suite: " + suite);  // unreachable; CLI validates
}

// --- bench ---

double median_ms(const std::function<void()>& fn, unsigned repeats) {
  std::vector<double> times;
  times.reserve(repeats);
  for (unsigned r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

int cmd_bench(const RunConfig& cfg) {
  Timer timer("bench");
  const SeedPath root = SeedPath::root(cfg.seed);
  std::cout << "case,d,n,p,m,s,nnz,wall_ms\n";

  // Dense columns: doubling n at fixed everything else.
  {
    const index_t d = 256, m = 512;
    const unsigned p = 4;
    const auto rs = RecursiveSketch::build(d, p, m, SketchVariant::const_prob(),
                                           root.derive("bench-dense", 0, 0));
    SeedStream data(root.derive("bench-dense-data", 0, 0));
    for (index_t n : {250ull, 500ull, 1000ull}) {
      const DenseMatrix x = gaussian_matrix(d, n, data);
      const double ms = median_ms([&] { rs.apply_matrix(x, cfg.threads); }, 3);
      std::cout << "dense-n," << d << "," << n << "," << p << "," << m << ",1," << d * n << ","
                << ms << "\n";
    }
  }

  // Degree scaling at fixed m.  Dimensions chosen so leaf and merge work both
  // carry weight; doubling p doubles the leaf count and triples the merges.
  {
    const index_t d = 4096, m = 128, n = 100;
    SeedStream data(root.derive("bench-degree-data", 0, 0));
    const DenseMatrix x = gaussian_matrix(d, n, data);
    for (unsigned p : {2u, 4u}) {
      const auto rs = RecursiveSketch::build(d, p, m, SketchVariant::const_prob(),
                                             root.derive("bench-degree", p, 0));
      const double ms = median_ms([&] { rs.apply_matrix(x, cfg.threads); }, 5);
      std::cout << "degree-p," << d << "," << n << "," << p << "," << m << ",1," << d * n << ","
                << ms << "\n";
    }
  }

  // Sparse leaf phase: doubling nnz in a huge ambient dimension.  Only the
  // leaf images are timed; their cost is proportional to nnz.
  {
    const index_t d = index_t(1) << 20, m = 256;
    const unsigned p = 2;
    const auto rs = RecursiveSketch::build(d, p, m, SketchVariant::const_prob(),
                                           root.derive("bench-sparse", 0, 0));
    SeedStream data(root.derive("bench-sparse-data", 0, 0));
    std::vector<std::vector<double>> images;
    for (index_t nnz : {4096ull, 8192ull, 16384ull}) {
      // Distinct sorted indices via a strided walk plus jitter.
      std::vector<index_t> idx(nnz);
      const index_t stride = d / nnz;
      for (index_t i = 0; i < nnz; ++i) idx[i] = i * stride + data.next_below(stride);
      std::vector<double> val(nnz);
      for (auto& v : val) v = gaussian01(data);
      const SparseVector x(d, std::move(idx), std::move(val));
      const double ms = median_ms([&] { rs.apply_leaves(x, images); }, 64);
      std::cout << "sparse-leaf," << d << ",1," << p << "," << m << ",1," << nnz << "," << ms
                << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* guard = std::getenv("TSKIT_SIZE_GUARD")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(guard, &end, 10);
    if (end == guard || *end != '\0' || v == 0) {
      std::cerr << "invalid TSKIT_SIZE_GUARD value: " << guard << "\n";
      return kExitUsage;
    }
    set_size_guard(v);
  }

  CLI::App app{"Tensor-power sketching toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "master seed (default 0x5EED0001)");
    sub->add_option("--threads", cfg.threads, "worker threads (output is identical for any count)")
        ->check(CLI::Range(1u, 256u));
    sub->add_option("--variant", cfg.variant, "sketch family: const-prob | high-prob")
        ->check(CLI::IsMember({"const-prob", "high-prob"}));
    sub->add_option("--sparsity", cfg.sparsity, "per-column nonzeros of high-prob leaves");
    sub->add_option("--const-c", cfg.constants.c_const, "const-prob sizing constant");
    sub->add_option("--const-c1", cfg.constants.c1_high, "high-prob width constant");
    sub->add_option("--const-c2", cfg.constants.c2_high, "high-prob sparsity constant");
    sub->add_option("--eps", cfg.eps, "target accuracy");
    sub->add_option("--delta", cfg.delta, "failure budget");
    sub->add_option("--lambda", cfg.lambda, "ridge regularizer");
  };

  CLI::App* sketch = app.add_subcommand("sketch", "sketch p-fold tensor powers of the columns");
  sketch->add_option("--input", cfg.input, "input matrix (d×n), .kmat or .csv")->required();
  sketch->add_option("--output", cfg.output, "output path for the m×n sketch")->required();
  sketch->add_option("--p", cfg.p, "tensor degree (2..63)")->required();
  sketch->add_option("--m", cfg.m, "output width (0 = size from lambda/eps/delta)");
  sketch->add_option("--format", cfg.format, "output format override: kmat | csv")
      ->check(CLI::IsMember({"kmat", "csv"}));
  add_common(sketch);

  CLI::App* gauss = app.add_subcommand("gaussian-features",
                                       "randomized features approximating the gaussian kernel");
  gauss->add_option("--input", cfg.input, "input matrix (d×n)")->required();
  gauss->add_option("--output", cfg.output, "output path for the feature matrix")->required();
  gauss->add_option("--format", cfg.format, "output format override: kmat | csv")
      ->check(CLI::IsMember({"kmat", "csv"}));
  add_common(gauss);

  CLI::App* krr = app.add_subcommand("krr", "sketched ridge regression on tensor-power features");
  krr->add_option("--input", cfg.input, "data matrix (d×n)")->required();
  krr->add_option("--b", cfg.b_path, "target point (d-vector file)")->required();
  krr->add_option("--output", cfg.output, "optional output path for the n coefficients");
  krr->add_option("--p", cfg.p, "tensor degree (2..63)");
  krr->add_option("--m", cfg.m, "sketch width (0 = automatic)");
  krr->add_option("--format", cfg.format, "output format override: kmat | csv")
      ->check(CLI::IsMember({"kmat", "csv"}));
  add_common(krr);

  std::string suite;
  CLI::App* verify = app.add_subcommand("verify", "run a statistical verification suite");
  verify
      ->add_option("suite", suite,
                   "unbiased | second-moment | ose | amp | spectral | variance-probe | tail")
      ->required()
      ->check(CLI::IsMember(
          {"unbiased", "second-moment", "ose", "amp", "spectral", "variance-probe", "tail"}));
  verify->add_option("--trials", cfg.trials, "Monte-Carlo trials (0 = suite default)");
  verify->add_option("--p", cfg.p, "tensor degree where the suite allows it");
  verify->add_option("--m", cfg.m, "sketch width override (0 = suite default)");
  add_common(verify);

  CLI::App* bench = app.add_subcommand("bench", "timing table (CSV on stdout)");
  add_common(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  for (CLI::App* sub : {sketch, gauss, krr, verify, bench}) {
    if (sub->parsed()) cfg.sparsity_given = sub->count("--sparsity") > 0;
  }

  try {
    if (sketch->parsed()) return cmd_sketch(cfg);
    if (gauss->parsed()) return cmd_gaussian_features(cfg);
    if (krr->parsed()) return cmd_krr(cfg);
    if (verify->parsed()) return cmd_verify(suite, cfg);
    if (bench->parsed()) return cmd_bench(cfg);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDimension;
  }
  return 0;
}
