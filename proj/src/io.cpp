#include "tskit/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace tskit {

namespace {

constexpr char kMagic[5] = {'K', 'M', 'A', 'T', '1'};

void put_u64_le(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64_le(std::istream& in, const std::string& path) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw IoError(path + ": truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void put_f64_le(std::ostream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64_le(out, bits);
}

}  // namespace

MatrixFormat parse_matrix_format(const std::string& name) {
  if (name == "kmat") return MatrixFormat::Kmat;
  if (name == "csv") return MatrixFormat::Csv;
  throw DimensionError("unknown matrix format '" + name + "' (expected kmat or csv)");
}

MatrixFormat guess_matrix_format(const std::string& path) {
  const auto dotpos = path.rfind('.');
  if (dotpos != std::string::npos && path.substr(dotpos) == ".csv") return MatrixFormat::Csv;
  return MatrixFormat::Kmat;
}

DenseMatrix read_matrix_kmat(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, kMagic, 5) != 0) {
    throw IoError(path + ": bad magic (not a KMAT1 file)");
  }
  const std::uint64_t rows = get_u64_le(in, path);
  const std::uint64_t cols = get_u64_le(in, path);
  const std::uint64_t count = rows * cols;
  if (rows != 0 && count / rows != cols) throw IoError(path + ": element count overflows");
  if (count > (std::uint64_t{1} << 32)) throw IoError(path + ": implausibly large matrix");
  std::vector<double> data(count);
  if (count > 0) {
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count * 8));
    if (!in) throw IoError(path + ": truncated payload");
  }
  // Stored little-endian; byte-swap on big-endian hosts.
  if constexpr (std::endian::native == std::endian::big) {
    for (double& d : data) {
      std::uint64_t bits;
      std::memcpy(&bits, &d, 8);
      bits = __builtin_bswap64(bits);
      std::memcpy(&d, &bits, 8);
    }
  }
  char extra;
  if (in.read(&extra, 1)) throw IoError(path + ": trailing bytes after payload");
  return DenseMatrix(static_cast<index_t>(rows), static_cast<index_t>(cols), std::move(data));
}

void write_matrix_kmat(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out.write(kMagic, 5);
  put_u64_le(out, m.rows());
  put_u64_le(out, m.cols());
  for (index_t i = 0; i < m.size(); ++i) put_f64_le(out, m.storage()[i]);
  out.flush();
  if (!out) throw IoError(path + ": write failed");
}

DenseMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open for reading");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      const std::string cell = line.substr(pos, comma - pos);
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        while (used < cell.size() &&
               (cell[used] == ' ' || cell[used] == '\t' || cell[used] == '\r')) {
          ++used;
        }
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw IoError(path + ": malformed numeric cell '" + cell + "'");
      }
      pos = comma + 1;
      if (comma == line.size()) break;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path + ": ragged rows (line " + std::to_string(rows.size() + 1) + ")");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": empty matrix");
  DenseMatrix m(rows.size(), rows.front().size());
  for (index_t i = 0; i < m.rows(); ++i)
    for (index_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_matrix_csv(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  char buf[64];
  for (index_t i = 0; i < m.rows(); ++i) {
    for (index_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << buf;
      if (j + 1 < m.cols()) out << ',';
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError(path + ": write failed");
}

DenseMatrix read_matrix(const std::string& path, MatrixFormat format) {
  return format == MatrixFormat::Kmat ? read_matrix_kmat(path) : read_matrix_csv(path);
}

void write_matrix(const std::string& path, const DenseMatrix& m, MatrixFormat format) {
  if (format == MatrixFormat::Kmat) {
    write_matrix_kmat(path, m);
  } else {
    write_matrix_csv(path, m);
  }
}

}  // namespace tskit
