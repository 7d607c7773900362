// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <vector>

#include "cosformer/visualize.hpp"

using cosformer::AccumMatrix;

TEST(Visualize, OneHotRowsReproduceThemselves) {
  AccumMatrix p = AccumMatrix::Zero(4, 4);
  p(0, 2) = p(1, 0) = p(2, 3) = p(3, 1) = 1.0;
  for (double threshold : {0.0, 0.3, 0.99, 0.999999}) {
    const std::vector<AccumMatrix> list{p};
    EXPECT_EQ(cosformer::visualize_attention(list, threshold).values, p) << threshold;
  }
}

TEST(Visualize, ThresholdOneMarksWholeRow) {
  // The running sum never strictly exceeds 1, so every column is visited.
  const std::vector<AccumMatrix> list{AccumMatrix::Identity(3, 3)};
  EXPECT_EQ(cosformer::visualize_attention(list, 1.0).values, AccumMatrix::Ones(3, 3));
}

TEST(Visualize, UniformTwoByTwoMarksEverything) {
  const std::vector<AccumMatrix> list{AccumMatrix::Constant(2, 2, 0.5)};
  const auto cov = cosformer::visualize_attention(list, 0.6);
  EXPECT_EQ(cov.values, AccumMatrix::Ones(2, 2));
  EXPECT_EQ(cov.n_matrices, 1);
}

TEST(Visualize, TiesGoToTheLowerColumn) {
  const std::vector<AccumMatrix> list{AccumMatrix::Constant(2, 2, 0.5)};
  AccumMatrix want(2, 2);
  want << 1, 0, 1, 0;
  EXPECT_EQ(cosformer::visualize_attention(list, 0.4).values, want);
}

TEST(Visualize, AveragesOverMatrices) {
  AccumMatrix a = AccumMatrix::Identity(2, 2);
  AccumMatrix b(2, 2);
  b << 0, 1, 0, 1;
  const std::vector<AccumMatrix> list{a, b};
  const auto cov = cosformer::visualize_attention(list, 0.5);
  AccumMatrix want(2, 2);
  want << 0.5, 0.5, 0, 1;
  EXPECT_EQ(cov.values, want);
  EXPECT_EQ(cov.n_matrices, 2);
}

TEST(Visualize, CrossingEntryIsIncluded) {
  AccumMatrix p(1, 1);
  p << 1.0;
  AccumMatrix q(3, 3);
  q << 0.5, 0.3, 0.2,  //
      0.2, 0.5, 0.3,   //
      0.1, 0.1, 0.8;
  const auto cov = cosformer::visualize_attention(std::vector<AccumMatrix>{q}, 0.7);
  AccumMatrix want(3, 3);
  want << 1, 1, 0, 0, 1, 1, 0, 0, 1;
  EXPECT_EQ(cov.values, want);
}

TEST(Visualize, Errors) {
  EXPECT_THROW(cosformer::visualize_attention({}, 0.5), cosformer::UsageError);
  const std::vector<AccumMatrix> ok{AccumMatrix::Identity(2, 2)};
  EXPECT_THROW(cosformer::visualize_attention(ok, 1.5), cosformer::UsageError);
  EXPECT_THROW(cosformer::visualize_attention(ok, -0.1), cosformer::UsageError);
  const std::vector<AccumMatrix> rect{AccumMatrix::Zero(2, 3)};
  EXPECT_THROW(cosformer::visualize_attention(rect, 0.5), cosformer::DimensionError);
  const std::vector<AccumMatrix> mixed{AccumMatrix::Identity(2, 2), AccumMatrix::Identity(3, 3)};
  EXPECT_THROW(cosformer::visualize_attention(mixed, 0.5), cosformer::DimensionError);
  const std::vector<AccumMatrix> heavy{AccumMatrix::Ones(2, 2)};
  EXPECT_THROW(cosformer::visualize_attention(heavy, 0.5), cosformer::UsageError);
}
