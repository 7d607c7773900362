// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_MATRIX_IO_HPP_
#define COSFORMER_MATRIX_IO_HPP_

// Plain-text matrix format:
//   line 1:      "<rows> <cols>"
//   lines 2..:   one matrix row per line, cols space-separated decimal reals
// Values are written with 17 significant digits so doubles round-trip exactly.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "cosformer/types.hpp"

namespace cosformer {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

AccumMatrix read_matrix(std::istream& in);
AccumMatrix read_matrix(const std::filesystem::path& path);

void write_matrix(const AccumMatrix& m, std::ostream& out);
void write_matrix(const AccumMatrix& m, const std::filesystem::path& path);

}  // namespace cosformer

#endif  // COSFORMER_MATRIX_IO_HPP_
