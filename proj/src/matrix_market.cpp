#include "riccati/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace riccati {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Fortran writers emit D exponents ("1.5D+03"); normalize before parsing.
double parse_value(std::string token, const std::filesystem::path& path) {
  for (char& c : token) {
    if (c == 'D' || c == 'd') c = 'e';
  }
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &pos);
  } catch (const std::exception&) {
    throw Error(path.string() + ": bad numeric value '" + token + "'");
  }
  if (pos != token.size()) {
    throw Error(path.string() + ": trailing garbage in value '" + token + "'");
  }
  return v;
}

struct MmHeader {
  bool coordinate = true;
  bool symmetric = false;
};

MmHeader read_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(path.string() + ": empty file");
  }
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") {
    throw Error(path.string() + ": not a Matrix Market matrix file");
  }
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (format != "coordinate" && format != "array") {
    throw Error(path.string() + ": unsupported format '" + format + "'");
  }
  if (field != "real" && field != "integer") {
    throw Error(path.string() + ": unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    throw Error(path.string() + ": unsupported symmetry '" + symmetry + "'");
  }
  return {format == "coordinate", symmetry == "symmetric"};
}

// Next non-blank, non-comment line; empty string at end of input.
std::string next_content_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t i = line.find_first_not_of(" \t");
    if (i == std::string::npos) continue;
    if (line[i] == '%') continue;
    return line;
  }
  return {};
}

}  // namespace

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw MissingFileError("cannot open " + path.string());
  }
  const MmHeader header = read_header(in, path);
  const std::string size_line = next_content_line(in);
  if (size_line.empty()) {
    throw Error(path.string() + ": missing size line");
  }
  std::istringstream ss(size_line);

  if (header.coordinate) {
    long rows = -1, cols = -1, nnz = -1;
    if (!(ss >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
      throw Error(path.string() + ": bad coordinate size line");
    }
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(header.symmetric ? 2 * nnz : nnz));
    for (long k = 0; k < nnz; ++k) {
      const std::string line = next_content_line(in);
      if (line.empty()) {
        throw Error(path.string() + ": truncated entry list");
      }
      std::istringstream es(line);
      long i = 0, j = 0;
      std::string token;
      if (!(es >> i >> j >> token)) {
        throw Error(path.string() + ": bad entry '" + line + "'");
      }
      if (i < 1 || i > rows || j < 1 || j > cols) {
        throw Error(path.string() + ": index out of range in '" + line + "'");
      }
      const double v = parse_value(token, path);
      entries.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1),
                           v);
      if (header.symmetric && i != j) {
        entries.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1),
                             v);
      }
    }
    return assemble_sparse(static_cast<int>(rows), static_cast<int>(cols),
                           entries);
  }

  long rows = -1, cols = -1;
  if (!(ss >> rows >> cols) || rows < 0 || cols < 0) {
    throw Error(path.string() + ": bad array size line");
  }
  Matrix dense = Matrix::Zero(rows, cols);
  for (long j = 0; j < cols; ++j) {
    for (long i = header.symmetric ? j : 0; i < rows; ++i) {
      const std::string line = next_content_line(in);
      if (line.empty()) {
        throw Error(path.string() + ": truncated array data");
      }
      std::istringstream vs(line);
      std::string token;
      vs >> token;
      const double v = parse_value(token, path);
      dense(i, j) = v;
      if (header.symmetric && i != j) dense(j, i) = v;
    }
  }
  return dense.sparseView();
}

Matrix read_matrix_market_dense(const std::filesystem::path& path) {
  return Matrix(read_matrix_market(path));
}

void write_matrix_market_array(const std::filesystem::path& path,
                               const Matrix& a) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << "%%MatrixMarket matrix array real general\n";
  out << a.rows() << " " << a.cols() << "\n";
  char buf[64];
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", a(i, j));
      out << buf << "\n";
    }
  }
  if (!out) {
    throw Error("write failed for " + path.string());
  }
}

void write_matrix_market_coordinate(const std::filesystem::path& path,
                                    const SparseMatrix& a) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  long nnz = 0;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      if (it.value() != 0.0) ++nnz;
    }
  }
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << " " << a.cols() << " " << nnz << "\n";
  char buf[64];
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      if (it.value() == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << (it.row() + 1) << " " << (it.col() + 1) << " " << buf << "\n";
    }
  }
  if (!out) {
    throw Error("write failed for " + path.string());
  }
}

}  // namespace riccati
