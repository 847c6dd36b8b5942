#pragma once

#include <string>

#include "tskit/matrix.hpp"

namespace tskit {

/// I/O failure (missing file, malformed contents, short read/write).
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

enum class MatrixFormat { Kmat, Csv };

/// "kmat" / "csv"; anything else is a DimensionError.
MatrixFormat parse_matrix_format(const std::string& name);

/// Picks by extension (.kmat / .csv), defaulting to Kmat.
MatrixFormat guess_matrix_format(const std::string& path);

/// KMAT1 container: ASCII magic "KMAT1", then rows and cols as little-endian
/// u64, then rows·cols doubles in column-major order (little-endian IEEE-754).
DenseMatrix read_matrix_kmat(const std::string& path);
void write_matrix_kmat(const std::string& path, const DenseMatrix& m);

///// Text matrix: one row per line, comma-separated; rectangular; values are
/// written round-trippably (17 significant digits).
DenseMatrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const DenseMatrix& m);

DenseMatrix read_matrix(const std::string& path, MatrixFormat format);
void write_matrix(const std::string& path, const DenseMatrix& m, MatrixFormat format);

}  // namespace tskit
