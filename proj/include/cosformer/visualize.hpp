// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_VISUALIZE_HPP_
#define COSFORMER_VISUALIZE_HPP_

#include <filesystem>
#include <iosfwd>
#include <span>

#include "cosformer/types.hpp"

namespace cosformer {

/// Fraction of input attention matrices in which each cell belongs to the
/// smallest prefix of its row (sorted by weight, descending) whose mass first
/// exceeds the threshold.
struct CoverageMatrix {
  AccumMatrix values;  // size x size, entries are multiples of 1 / n_matrices
  double threshold = 0.0;
  Index n_matrices = 0;

  Index size() const { return values.rows(); }
};

/// Inputs must be square, of equal size, with non-negative rows summing to at
/// most 1 (row-stochastic, or all-zero rows). Ties in the descending sort go to
/// the lower column index; the entry whose mass crosses the threshold is marked.
CoverageMatrix visualize_attention(std::span<const AccumMatrix> matrices, double threshold);

/// ASCII PGM (P2), maxval 255, pixel = round(255 * coverage).
void write_pgm(const CoverageMatrix& coverage, std::ostream& out);
void write_pgm(const CoverageMatrix& coverage, const std::filesystem::path& path);

/// Reads a P2 image back as gray levels in [0, 255]. Throws ParseError.
Matrix<int> read_pgm(std::istream& in);
Matrix<int> read_pgm(const std::filesystem::path& path);

}  // namespace cosformer

#endif  // COSFORMER_VISUALIZE_HPP_
