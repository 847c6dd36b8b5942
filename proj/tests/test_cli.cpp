// End-to-end tests of the command-line binary: file formats, determinism,
// manifest contents, and the process exit-code contract.  The binary path is
// injected at compile time as TSKIT_CLI_PATH.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <tskit/hashing.hpp>
#include <tskit/io.hpp>
#include <tskit/recursive_sketch.hpp>

using namespace tskit;
namespace fs = std::filesystem;

namespace {

// Runs the CLI through the shell and returns its exit status (-1 if it died
// on a signal).  stdout/stderr go to files inside the scratch dir when given.
int run_cli(const std::string& args, const std::string& stdout_path = "/dev/null") {
  const std::string cmd =
      std::string(TSKIT_CLI_PATH) + " " + args + " >" + stdout_path + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_cli_env(const std::string& env, const std::string& args) {
  const std::string cmd =
      env + " " + std::string(TSKIT_CLI_PATH) + " " + args + " >/dev/null 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Per-process scratch directory, removed when the test binary exits.
struct Scratch {
  fs::path dir;
  Scratch() {
    std::string tmpl = (fs::temp_directory_path() / "tskit-cli-XXXXXX").string();
    char* made = mkdtemp(tmpl.data());
    REQUIRE(made != nullptr);
    dir = made;
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

Scratch& scratch() {
  static Scratch s;
  return s;
}

DenseMatrix demo_matrix(index_t d, index_t n, std::uint64_t seed) {
  SeedStream gen(SeedPath::root(seed).derive("cli-test-data", 0, 0));
  DenseMatrix x(d, n);
  for (index_t j = 0; j < n; ++j) {
    for (index_t i = 0; i < d; ++i) {
      x(i, j) = static_cast<double>(gen.next_u64() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    }
  }
  return x;
}

}  // namespace

TEST_CASE("binary container round-trips files and matrices") {
  const auto& s = scratch();
  const DenseMatrix x = demo_matrix(5, 7, 101);
  const std::string path = s / "roundtrip.kmat";
  write_matrix_kmat(path, x);

  const DenseMatrix back = read_matrix_kmat(path);
  REQUIRE(back.rows() == x.rows());
  REQUIRE(back.cols() == x.cols());
  for (index_t i = 0; i < x.size(); ++i) CHECK(back.storage()[i] == x.storage()[i]);

  const std::string again = s / "roundtrip2.kmat";
  write_matrix_kmat(again, back);
  CHECK(read_bytes(path) == read_bytes(again));

  // Header layout: magic, little-endian u64 rows and cols.
  const std::string bytes = read_bytes(path);
  REQUIRE(bytes.size() == 5 + 8 + 8 + 5 * 7 * 8);
  CHECK(bytes.substr(0, 5) == "KMAT1");
  CHECK(static_cast<unsigned char>(bytes[5]) == 5);
  CHECK(static_cast<unsigned char>(bytes[13]) == 7);
}

TEST_CASE("text container round-trips matrices exactly") {
  const auto& s = scratch();
  const DenseMatrix x = demo_matrix(4, 3, 102);
  const std::string path = s / "roundtrip.csv";
  write_matrix_csv(path, x);
  const DenseMatrix back = read_matrix_csv(path);
  REQUIRE(back.rows() == x.rows());
  REQUIRE(back.cols() == x.cols());
  for (index_t i = 0; i < x.size(); ++i) CHECK(back.storage()[i] == x.storage()[i]);
}

TEST_CASE("csv and binary inputs give identical sketch outputs") {
  const auto& s = scratch();
  const DenseMatrix x = demo_matrix(4, 6, 103);
  write_matrix_kmat(s / "x.kmat", x);
  write_matrix_csv(s / "x.csv", x);

  const std::string opts = " --p 2 --m 16 --seed 42";
  REQUIRE(run_cli("sketch --input " + (s / "x.kmat") + " --output " + (s / "ya.kmat") + opts) ==
          0);
  REQUIRE(run_cli("sketch --input " + (s / "x.csv") + " --output " + (s / "yb.kmat") + opts) ==
          0);
  CHECK(read_bytes(s / "ya.kmat") == read_bytes(s / "yb.kmat"));
}

TEST_CASE("sketch reruns are byte-identical across thread counts") {
  const auto& s = scratch();
  write_matrix_kmat(s / "x.kmat", demo_matrix(6, 9, 104));

  const std::string base = "sketch --input " + (s / "x.kmat") + " --p 3 --m 32 --seed 7";
  REQUIRE(run_cli(base + " --output " + (s / "r1.kmat") + " --threads 1") == 0);
  REQUIRE(run_cli(base + " --output " + (s / "r2.kmat") + " --threads 1") == 0);
  REQUIRE(run_cli(base + " --output " + (s / "r8.kmat") + " --threads 8") == 0);

  const std::string r1 = read_bytes(s / "r1.kmat");
  CHECK(r1 == read_bytes(s / "r2.kmat"));
  CHECK(r1 == read_bytes(s / "r8.kmat"));
  // Manifests differ only in the output path embedded in... nothing: the
  // manifest records the input path and config, so byte-equality holds too.
  CHECK(read_bytes(s / "r1.kmat.manifest.json") == read_bytes(s / "r2.kmat.manifest.json"));
  CHECK(read_bytes(s / "r1.kmat.manifest.json") == read_bytes(s / "r8.kmat.manifest.json"));
}

TEST_CASE("sketch output matches the library applied in process") {
  const auto& s = scratch();
  const DenseMatrix x = demo_matrix(5, 8, 105);
  write_matrix_kmat(s / "x.kmat", x);
  REQUIRE(run_cli("sketch --input " + (s / "x.kmat") + " --output " + (s / "y.kmat") +
                  " --p 2 --m 16 --seed 99 --variant high-prob --sparsity 2") == 0);

  SketchVariant variant = SketchVariant::high_prob(2);
  const auto rs = RecursiveSketch::build(5, 2, 16, variant, SeedPath::root(99));
  const SketchedMatrix want = rs.apply_matrix(x, 1);

  const DenseMatrix got = read_matrix_kmat(s / "y.kmat");
  REQUIRE(got.rows() == want.data.rows());
  REQUIRE(got.cols() == want.data.cols());
  for (index_t i = 0; i < got.size(); ++i) CHECK(got.storage()[i] == want.data.storage()[i]);
}

TEST_CASE("manifest carries the documented key set") {
  const auto& s = scratch();
  write_matrix_kmat(s / "x.kmat", demo_matrix(4, 5, 106));
  REQUIRE(run_cli("sketch --input " + (s / "x.kmat") + " --output " + (s / "y.kmat") +
                  " --p 2 --m 16") == 0);

  const auto manifest = nlohmann::json::parse(read_bytes(s / "y.kmat.manifest.json"));
  CHECK(manifest.at("schema") == "kmat_manifest_v1");
  CHECK(manifest.at("command") == "sketch");
  CHECK(manifest.at("variant") == "const-prob");
  CHECK(manifest.at("seed") == 0x5EED0001u);  // documented default
  CHECK(manifest.at("p") == 2);
  CHECK(manifest.at("d") == 4);
  CHECK(manifest.at("n") == 5);
  CHECK(manifest.at("m") == 16);
  CHECK(manifest.at("rows") == 16);
  CHECK(manifest.at("cols") == 5);
  CHECK(manifest.at("nnz") == 20);
  CHECK(manifest.contains("s"));
  CHECK(manifest.contains("const_c"));
  CHECK(manifest.contains("const_c1"));
  CHECK(manifest.contains("const_c2"));
  CHECK_FALSE(manifest.contains("wall_ms"));  // timing lives on stderr, not here
}

TEST_CASE("feature map and regression commands are deterministic") {
  const auto& s = scratch();
  // Columns inside the unit ball so the radius bound is comfortable.
  DenseMatrix x = demo_matrix(4, 6, 107);
  for (index_t j = 0; j < x.cols(); ++j) {
    double nrm = 0.0;
    for (index_t i = 0; i < x.rows(); ++i) nrm += x(i, j) * x(i, j);
    const double scale = 0.9 / std::sqrt(std::max(nrm, 1e-12));
    for (index_t i = 0; i < x.rows(); ++i) x(i, j) *= scale;
  }
  write_matrix_kmat(s / "x.kmat", x);

  const std::string gopts = "gaussian-features --input " + (s / "x.kmat") +
                            " --lambda 0.1 --eps 0.5 --delta 0.2 --const-c 0.05";
  REQUIRE(run_cli(gopts + " --output " + (s / "g1.kmat")) == 0);
  REQUIRE(run_cli(gopts + " --output " + (s / "g2.kmat") + " --threads 8") == 0);
  CHECK(read_bytes(s / "g1.kmat") == read_bytes(s / "g2.kmat"));
  CHECK(read_bytes(s / "g1.kmat.manifest.json") == read_bytes(s / "g2.kmat.manifest.json"));

  const auto manifest = nlohmann::json::parse(read_bytes(s / "g1.kmat.manifest.json"));
  CHECK(manifest.at("command") == "gaussian-features");
  CHECK(manifest.at("q_taylor").get<int>() >= 1);
  CHECK(manifest.at("degree_dims").size() == manifest.at("q_taylor").get<std::size_t>() + 1);
  CHECK(manifest.at("tail_bound").get<double>() <= 0.5 * 0.1 / 2 + 1e-12);

  write_matrix_kmat(s / "b.kmat", demo_matrix(4, 1, 108));
  const std::string kopts = "krr --input " + (s / "x.kmat") + " --b " + (s / "b.kmat") +
                            " --p 2 --lambda 0.5 --m 256";
  REQUIRE(run_cli(kopts + " --output " + (s / "w1.kmat"), s / "k1.json") == 0);
  REQUIRE(run_cli(kopts + " --output " + (s / "w2.kmat"), s / "k2.json") == 0);
  CHECK(read_bytes(s / "w1.kmat") == read_bytes(s / "w2.kmat"));
  CHECK(read_bytes(s / "k1.json") == read_bytes(s / "k2.json"));

  const auto report = nlohmann::json::parse(read_bytes(s / "k1.json"));
  CHECK(report.at("objective_sketched_solution").get<double>() >=
        report.at("objective_exact_opt").get<double>() * (1.0 - 1e-9));
  CHECK(report.at("ratio").get<double>() < 10.0);
}

TEST_CASE("verification suite emits a structured report") {
  const auto& s = scratch();
  REQUIRE(run_cli("verify tail", s / "tail.json") == 0);
  const auto report = nlohmann::json::parse(read_bytes(s / "tail.json"));
  CHECK(report.at("suite") == "tail");
  CHECK(report.at("pass") == true);
  REQUIRE(report.at("checks").is_array());
  REQUIRE(report.at("checks").size() > 0);
  for (const auto& check : report.at("checks")) {
    CHECK(check.contains("name"));
    CHECK(check.contains("observed"));
    CHECK(check.contains("threshold"));
    CHECK(check.at("pass") == true);
  }
}

TEST_CASE("exit codes follow the documented contract") {
  const auto& s = scratch();
  write_matrix_kmat(s / "x.kmat", demo_matrix(4, 5, 109));

  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("sketch --no-such-flag") == 2);
  CHECK(run_cli("verify no-such-suite") == 2);
  CHECK(run_cli("sketch --input " + (s / "missing.kmat") + " --output " + (s / "y.kmat") +
                " --p 2 --m 8") == 3);
  CHECK(run_cli("sketch --input " + (s / "x.kmat") + " --output " + (s / "y.kmat") +
                " --p 1 --m 8") == 4);
  // Deliberately undersized sketch: the suite runs, fails its threshold.
  CHECK(run_cli("verify ose --m 32 --trials 20", s / "ose.json") == 5);
  const auto report = nlohmann::json::parse(read_bytes(s / "ose.json"));
  CHECK(report.at("pass") == false);

  CHECK(run_cli_env("TSKIT_SIZE_GUARD=abc", "verify tail") == 2);
  CHECK(run_cli_env("TSKIT_SIZE_GUARD=0", "verify tail") == 2);
}

TEST_CASE("corrupt binary input is an io error") {
  const auto& s = scratch();
  {
    std::ofstream out(s / "bad.kmat", std::ios::binary);
    out << "KMATX_not_a_matrix";
  }
  CHECK(run_cli("sketch --input " + (s / "bad.kmat") + " --output " + (s / "y.kmat") +
                " --p 2 --m 8") == 3);

  {
    std::ofstream out(s / "trunc.kmat", std::ios::binary);
    out << "KMAT1";  // header cut off mid-field
  }
  CHECK(run_cli("sketch --input " + (s / "trunc.kmat") + " --output " + (s / "y.kmat") +
                " --p 2 --m 8") == 3);
}
