#include <doctest.h>

#include <fstream>
#include <random>
#include <string>

#include "riccati/errors.hpp"
#include "riccati/matrix_market.hpp"
#include "test_support.hpp"

using riccati::Matrix;
using riccati::SparseMatrix;
using testsupport::TempDir;

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

SparseMatrix random_sparse(int rows, int cols, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> val(-10.0, 10.0);
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  std::vector<riccati::Triplet> trips;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (pick(gen) < 0.3) trips.emplace_back(i, j, val(gen));
    }
  }
  return riccati::assemble_sparse(rows, cols, trips);
}

}  // namespace

TEST_CASE("coordinate files round-trip bit exactly") {
  TempDir dir("mm_coord");
  const SparseMatrix a = random_sparse(17, 9, 5);
  const auto path = dir.path() / "a.mtx";
  riccati::write_matrix_market_coordinate(path, a);
  const SparseMatrix back = riccati::read_matrix_market(path);
  REQUIRE(back.rows() == 17);
  REQUIRE(back.cols() == 9);
  CHECK(riccati::max_abs_entry(SparseMatrix(back - a)) == 0.0);
}

TEST_CASE("array files round-trip bit exactly") {
  TempDir dir("mm_array");
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  Matrix a(6, 4);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 4; ++j) a(i, j) = val(gen) * std::pow(10.0, i - 3);
  }
  const auto path = dir.path() / "a.mtx";
  riccati::write_matrix_market_array(path, a);
  const Matrix back = riccati::read_matrix_market_dense(path);
  REQUIRE(back.rows() == 6);
  REQUIRE(back.cols() == 4);
  CHECK((back - a).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coordinate writer drops explicit zeros") {
  TempDir dir("mm_zeros");
  const SparseMatrix a = riccati::assemble_sparse(
      2, 2, {{0, 0, 1.0}, {0, 1, 0.0}, {1, 1, 2.0}});
  const auto path = dir.path() / "a.mtx";
  riccati::write_matrix_market_coordinate(path, a);
  std::ifstream f(path);
  std::string line;
  int entries = 0;
  bool counted_header = false;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '%') continue;
    if (!counted_header) {
      counted_header = true;  // size line
      CHECK(line == "2 2 2");
      continue;
    }
    ++entries;
  }
  CHECK(entries == 2);
}

TEST_CASE("symmetric coordinate input is mirrored") {
  TempDir dir("mm_sym");
  const auto path = dir.path() / "s.mtx";
  write_file(path,
             "%%MatrixMarket matrix coordinate real symmetric\n"
             "3 3 3\n"
             "1 1 2.0\n"
             "2 1 5.0\n"
             "3 3 -1.0\n");
  const SparseMatrix a = riccati::read_matrix_market(path);
  CHECK(a.coeff(0, 1) == 5.0);
  CHECK(a.coeff(1, 0) == 5.0);
  CHECK(a.coeff(0, 0) == 2.0);
  CHECK(a.coeff(2, 2) == -1.0);
}

TEST_CASE("Fortran D exponents and integer fields parse") {
  TempDir dir("mm_fortran");
  const auto path = dir.path() / "d.mtx";
  write_file(path,
             "%%MatrixMarket matrix coordinate real general\n"
             "% legacy exponent style\n"
             "2 2 2\n"
             "1 1 1.5D+03\n"
             "2 2 -2.5d-01\n");
  const SparseMatrix a = riccati::read_matrix_market(path);
  CHECK(a.coeff(0, 0) == 1500.0);
  CHECK(a.coeff(1, 1) == -0.25);

  const auto ipath = dir.path() / "i.mtx";
  write_file(ipath,
             "%%MatrixMarket matrix coordinate integer general\n"
             "1 1 1\n"
             "1 1 5\n");
  CHECK(riccati::read_matrix_market(ipath).coeff(0, 0) == 5.0);
}

TEST_CASE("array format reads through the sparse entry point too") {
  TempDir dir("mm_array_sparse");
  const auto path = dir.path() / "a.mtx";
  write_file(path,
             "%%MatrixMarket matrix array real general\n"
             "2 2\n"
             "1.0\n2.0\n3.0\n4.0\n");
  const SparseMatrix a = riccati::read_matrix_market(path);
  // Column-major data order.
  CHECK(a.coeff(0, 0) == 1.0);
  CHECK(a.coeff(1, 0) == 2.0);
  CHECK(a.coeff(0, 1) == 3.0);
  CHECK(a.coeff(1, 1) == 4.0);
}

TEST_CASE("malformed inputs raise descriptive errors") {
  TempDir dir("mm_bad");
  CHECK_THROWS_AS(riccati::read_matrix_market(dir.path() / "missing.mtx"),
                  riccati::MissingFileError);

  const auto banner = dir.path() / "banner.mtx";
  write_file(banner, "%%NotMatrixMarket matrix\n1 1 0\n");
  CHECK_THROWS_AS(riccati::read_matrix_market(banner), riccati::Error);

  const auto field = dir.path() / "field.mtx";
  write_file(field,
             "%%MatrixMarket matrix coordinate complex general\n1 1 1\n"
             "1 1 1.0 0.0\n");
  CHECK_THROWS_AS(riccati::read_matrix_market(field), riccati::Error);

  const auto range = dir.path() / "range.mtx";
  write_file(range,
             "%%MatrixMarket matrix coordinate real general\n2 2 1\n"
             "3 1 1.0\n");
  CHECK_THROWS_AS(riccati::read_matrix_market(range), riccati::Error);

  const auto truncated = dir.path() / "trunc.mtx";
  write_file(truncated,
             "%%MatrixMarket matrix coordinate real general\n2 2 2\n"
             "1 1 1.0\n");
  CHECK_THROWS_AS(riccati::read_matrix_market(truncated), riccati::Error);

  const auto garbage = dir.path() / "garbage.mtx";
  write_file(garbage,
             "%%MatrixMarket matrix coordinate real general\n1 1 1\n"
             "1 1 not_a_number\n");
  CHECK_THROWS_AS(riccati::read_matrix_market(garbage), riccati::Error);
}

TEST_CASE("CRLF line endings and comment lines are tolerated") {
  TempDir dir("mm_crlf");
  const auto path = dir.path() / "crlf.mtx";
  write_file(path,
             "%%MatrixMarket matrix coordinate real general\r\n"
             "% comment\r\n"
             "\r\n"
             "1 2 1\r\n"
             "1 2 3.5\r\n");
  const SparseMatrix a = riccati::read_matrix_market(path);
  REQUIRE(a.rows() == 1);
  REQUIRE(a.cols() == 2);
  CHECK(a.coeff(0, 1) == 3.5);
}
