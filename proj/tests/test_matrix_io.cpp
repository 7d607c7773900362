// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "cosformer/matrix_io.hpp"
#include "cosformer/visualize.hpp"
#include "oracles.hpp"

using cosformer::AccumMatrix;

TEST(MatrixIo, RoundTripIsBitExact) {
  std::mt19937_64 rng(5);
  const AccumMatrix m = oracle::random_normal(3, 2, rng, 1e3);
  std::stringstream buf;
  cosformer::write_matrix(m, buf);
  const AccumMatrix back = cosformer::read_matrix(buf);
  ASSERT_EQ(back.rows(), 3);
  ASSERT_EQ(back.cols(), 2);
  for (Eigen::Index i = 0; i < m.size(); ++i) EXPECT_EQ(back.data()[i], m.data()[i]);
}

TEST(MatrixIo, RoundTripThroughFile) {
  AccumMatrix m(2, 2);
  m << 1e-300, -0.1, 3.0, 1.0 / 3.0;
  const auto path = std::filesystem::temp_directory_path() / "cosformer_io_test.txt";
  cosformer::write_matrix(m, path);
  EXPECT_EQ(cosformer::read_matrix(path), m);
  std::filesystem::remove(path);
}

TEST(MatrixIo, ShortRowNamesItsLine) {
  std::istringstream in("2 2\n1 2 3\n4 5\n");
  try {
    cosformer::read_matrix(in);
    FAIL() << "expected a parse error";
  } catch (const cosformer::ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(MatrixIo, MalformedInputs) {
  for (const char* text : {"", "2\n", "a b\n", "0 2\n", "2 2\n1 2\n", "1 1\nnan\n", "1 1\n1\n2\n", "1 2\n1 x\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(cosformer::read_matrix(in), cosformer::ParseError) << text;
  }
}

TEST(MatrixIo, MissingFileIsIoError) {
  EXPECT_THROW(cosformer::read_matrix(std::filesystem::path("/nonexistent/dir/m.txt")), cosformer::IoError);
}

TEST(Pgm, FullCoverageIsWhite) {
  cosformer::CoverageMatrix cov;
  cov.values = AccumMatrix::Ones(2, 2);
  cov.values(0, 1) = 0.0;
  cov.values(1, 0) = 0.5;
  cov.n_matrices = 2;
  std::stringstream buf;
  cosformer::write_pgm(cov, buf);
  const auto px = cosformer::read_pgm(buf);
  ASSERT_EQ(px.rows(), 2);
  EXPECT_EQ(px(0, 0), 255);
  EXPECT_EQ(px(0, 1), 0);
  EXPECT_EQ(px(1, 0), 128);
}

TEST(Pgm, RejectsBadHeaders) {
  for (const char* text : {"P5 1 1 255 0", "P2 1 1 255", "P2 1 1 255 300", "P2 2 1 255 0 x"}) {
    std::istringstream in(text);
    EXPECT_THROW(cosformer::read_pgm(in), cosformer::ParseError) << text;
  }
}
