#pragma once

#include <filesystem>

#include "riccati/linalg.hpp"

namespace riccati {

// Reads a Matrix Market file. Accepts "coordinate real general",
// "coordinate real symmetric" (mirrored on read), and "array real general".
// Fortran-style D exponents (1.5D+03) are normalized before parsing, so
// files written by legacy tools load bit-exactly.
SparseMatrix read_matrix_market(const std::filesystem::path& path);

Matrix read_matrix_market_dense(const std::filesystem::path& path);

// Writes a dense matrix in "array real general" format with 17 significant
// digits (round-trips IEEE doubles exactly).
void write_matrix_market_array(const std::filesystem::path& path,
                               const Matrix& a);

// Writes a sparse matrix in "coordinate real general" format, 1-based
// indices, explicit zeros dropped.
void write_matrix_market_coordinate(const std::filesystem::path& path,
                                    const SparseMatrix& a);

}  // namespace riccati
