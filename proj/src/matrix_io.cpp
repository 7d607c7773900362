// SPDX-License-Identifier: Apache-2.0
#include "cosformer/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace cosformer {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream stream(line);
  std::string token;
  while (stream >> token) tokens.push_back(token);
  return tokens;
}

double parse_real(const std::string& token, std::size_t line) {
  double value = 0.0;
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, "not a decimal real: '" + token + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(line, "non-finite value '" + token + "'");
  }
  return value;
}

Index parse_count(const std::string& token, std::size_t line) {
  long long value = 0;
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || value < 1) {
    throw ParseError(line, "expected a positive count, got '" + token + "'");
  }
  return static_cast<Index>(value);
}

}  // namespace

AccumMatrix read_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) {
    throw ParseError(line_no, "missing header \"rows cols\"");
  }
  const auto header = split(line);
  if (header.size() != 2) {
    throw ParseError(line_no, "header must be \"rows cols\", got '" + line + "'");
  }
  const Index rows = parse_count(header[0], line_no);
  const Index cols = parse_count(header[1], line_no);

  AccumMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    ++line_no;
    if (!std::getline(in, line)) {
      throw ParseError(line_no, "expected " + std::to_string(rows) + " data rows, input ended after " +
                                    std::to_string(r));
    }
    const auto tokens = split(line);
    if (static_cast<Index>(tokens.size()) != cols) {
      throw ParseError(line_no, "expected " + std::to_string(cols) + " values, found " +
                                    std::to_string(tokens.size()));
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = parse_real(tokens[static_cast<std::size_t>(c)], line_no);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!split(line).empty()) {
      throw ParseError(line_no, "unexpected data after " + std::to_string(rows) + " rows");
    }
  }
  return m;
}

AccumMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading");
  }
  return read_matrix(in);
}

void write_matrix(const AccumMatrix& m, std::ostream& out) {
  out << m.rows() << ' ' << m.cols() << '\n';
  out << std::setprecision(17);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << m(r, c);
    }
    out << '\n';
  }
}

void write_matrix(const AccumMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  write_matrix(m, out);
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

}  // namespace cosformer
