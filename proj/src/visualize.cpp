// SPDX-License-Identifier: Apache-2.0
#include "cosformer/visualize.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "cosformer/matrix_io.hpp"

namespace cosformer {

namespace {

constexpr double kStochasticSlack = 1e-6;

void check_inputs(std::span<const AccumMatrix> matrices, double threshold) {
  if (matrices.empty()) {
    throw UsageError("visualize_attention needs at least one matrix");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw UsageError("threshold must lie in [0, 1]");
  }
  const Index d = matrices.front().rows();
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    const AccumMatrix& m = matrices[k];
    if (m.rows() != d || m.cols() != d || d < 1) {
      throw DimensionError("matrix " + std::to_string(k) + " is " + detail::shape_str(m.rows(), m.cols()) +
                           ", expected " + detail::shape_str(d, d));
    }
    if (!m.allFinite() || m.minCoeff() < 0.0) {
      throw UsageError("matrix " + std::to_string(k) + " has negative or non-finite entries");
    }
    if (m.rowwise().sum().maxCoeff() > 1.0 + kStochasticSlack) {
      throw UsageError("matrix " + std::to_string(k) + " has a row summing to more than 1");
    }
  }
}

}  // namespace

CoverageMatrix visualize_attention(std::span<const AccumMatrix> matrices, double threshold) {
  check_inputs(matrices, threshold);
  const Index d = matrices.front().rows();
  AccumMatrix marks = AccumMatrix::Zero(d, d);
  std::vector<Index> order(static_cast<std::size_t>(d));
  for (const AccumMatrix& m : matrices) {
    for (Index i = 0; i < d; ++i) {
      std::iota(order.begin(), order.end(), Index{0});
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return m(i, a) > m(i, b); });
      double mass = 0.0;
      for (Index l : order) {
        mass += m(i, l);
        marks(i, l) += 1.0;
        if (mass > threshold) break;
      }
    }
  }
  marks /= static_cast<double>(matrices.size());
  return CoverageMatrix{std::move(marks), threshold, static_cast<Index>(matrices.size())};
}

void write_pgm(const CoverageMatrix& coverage, std::ostream& out) {
  const AccumMatrix& v = coverage.values;
  out << "P2\n" << v.cols() << ' ' << v.rows() << "\n255\n";
  for (Index r = 0; r < v.rows(); ++r) {
    for (Index c = 0; c < v.cols(); ++c) {
      if (c) out << ' ';
      out << static_cast<int>(std::lround(255.0 * std::clamp(v(r, c), 0.0, 1.0)));
    }
    out << '\n';
  }
}

void write_pgm(const CoverageMatrix& coverage, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_pgm(coverage, out);
  if (!out) throw IoError("failed writing " + path.string());
}

Matrix<int> read_pgm(std::istream& in) {
  struct Token {
    std::string text;
    std::size_t line;
  };
  std::vector<Token> tokens;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    std::istringstream fields(line.substr(0, line.find('#')));
    std::string field;
    while (fields >> field) tokens.push_back({field, line_no});
  }
  std::size_t pos = 0;
  auto number = [&](int lo, int hi) {
    if (pos >= tokens.size()) {
      throw ParseError(tokens.empty() ? 1 : tokens.back().line, "unexpected end of PGM data");
    }
    const Token& t = tokens[pos++];
    int value = 0;
    const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
      throw ParseError(t.line, "expected an integer, got '" + t.text + "'");
    }
    if (value < lo || value > hi) throw ParseError(t.line, "value " + t.text + " out of range");
    return value;
  };
  if (tokens.empty() || tokens[0].text != "P2") throw ParseError(1, "missing P2 magic");
  pos = 1;
  const int width = number(1, 1 << 20);
  const int height = number(1, 1 << 20);
  const int maxval = number(1, 65535);
  Matrix<int> pixels(height, width);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) pixels(r, c) = number(0, maxval);
  if (pos != tokens.size()) throw ParseError(tokens[pos].line, "trailing data after pixels");
  return pixels;
}

Matrix<int> read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return read_pgm(in);
}

}  // namespace cosformer
