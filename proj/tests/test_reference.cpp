// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "cosformer/reference.hpp"
#include "oracles.hpp"

using cosformer::AttentionConfig;
using cosformer::FeatureMap;
using cosformer::Matrix;

TEST(SoftmaxAttention, SingleKeyReturnsItsValue) {
  Matrix<double> q(1, 3), k(1, 3), v(1, 2);
  q << 0.3, -2.0, 1.0;
  k << 4.0, 0.5, -1.0;
  v << 5.0, -3.0;
  const auto out = cosformer::softmax_attention(q, k, v, false, true);
  EXPECT_DOUBLE_EQ(out(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(out(0, 1), -3.0);
}

TEST(SoftmaxAttention, ZeroQueriesAverageValues) {
  std::mt19937_64 rng(1);
  const Matrix<double> q = Matrix<double>::Zero(4, 3);
  const auto k = oracle::random_normal(6, 3, rng);
  const auto v = oracle::random_normal(6, 2, rng);
  const auto out = cosformer::softmax_attention(q, k, v, false, true);
  const Eigen::RowVectorXd mean = v.colwise().mean();
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_NEAR((out.row(i) - mean).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  }
}

TEST(SoftmaxAttention, MatchesScalarLoopOracle) {
  std::mt19937_64 rng(2);
  for (bool causal : {false, true}) {
    for (bool scale : {false, true}) {
      const auto q = oracle::random_normal(8, 4, rng);
      const auto k = oracle::random_normal(8, 4, rng);
      const auto v = oracle::random_normal(8, 4, rng);
      const auto out = cosformer::softmax_attention(q, k, v, causal, scale);
      EXPECT_LT(cosformer::max_relative_error(out, oracle::softmax_attention(q, k, v, causal, scale)), 1e-13);
    }
  }
}

TEST(SoftmaxAttention, OutputsStayInConvexHullOfAdmissibleValues) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = oracle::random_normal(10, 3, rng, 2.0);
    const auto k = oracle::random_normal(10, 3, rng, 2.0);
    const auto v = oracle::random_normal(10, 4, rng);
    const bool causal = trial % 2 == 0;
    const auto out = cosformer::softmax_attention(q, k, v, causal, true);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      const Eigen::Index last = causal ? i + 1 : v.rows();
      for (Eigen::Index c = 0; c < v.cols(); ++c) {
        EXPECT_GE(out(i, c), v.col(c).head(last).minCoeff() - 1e-12);
        EXPECT_LE(out(i, c), v.col(c).head(last).maxCoeff() + 1e-12);
      }
    }
  }
}

TEST(SoftmaxAttention, ShapeMismatchIsDimensionError) {
  Matrix<double> q(2, 3), k(2, 4), v(2, 2);
  q.setOnes();
  k.setOnes();
  v.setOnes();
  EXPECT_THROW(cosformer::softmax_attention(q, k, v, false, true), cosformer::DimensionError);
  Matrix<double> k3 = Matrix<double>::Ones(3, 3), v3 = Matrix<double>::Ones(3, 2);
  EXPECT_THROW(cosformer::softmax_attention(q, k3, v3, true, true), cosformer::DimensionError);
}

TEST(AttentionWeights, SingleEntryNormalizesToOne) {
  Matrix<double> q(1, 1), k(1, 1);
  q << 1.0;
  k << 1.0;
  const auto a = cosformer::attention_weights_quadratic(q, k, AttentionConfig{});
  EXPECT_DOUBLE_EQ(a(0, 0), 1.0);
}

TEST(AttentionWeights, AllNegativeQueryRowGivesZeroRow) {
  std::mt19937_64 rng(4);
  Matrix<double> q = oracle::random_normal(3, 4, rng);
  q.row(1) = -q.row(1).cwiseAbs() - Eigen::RowVectorXd::Constant(4, 0.1);
  const auto k = oracle::random_normal(5, 4, rng);
  const auto a = cosformer::attention_weights_quadratic(q, k, AttentionConfig{});
  EXPECT_EQ(a.row(1).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AttentionWeights, CosineEntriesMatchScalarEvaluation) {
  std::mt19937_64 rng(5);
  const auto q = oracle::random_normal(6, 4, rng);
  const auto k = oracle::random_normal(6, 4, rng);
  const auto a = cosformer::attention_weights_quadratic(q, k, AttentionConfig::cosformer(6));
  for (Eigen::Index i = 0; i < 6; ++i) {
    std::vector<double> raw(6);
    for (Eigen::Index j = 0; j < 6; ++j) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < 4; ++c) s += oracle::relu(q(i, c)) * oracle::relu(k(j, c));
      raw[j] = s * std::cos(std::numbers::pi * static_cast<double>(i - j) / 12.0);
    }
    const double total = std::max(std::accumulate(raw.begin(), raw.end(), 0.0), 1e-6);
    for (Eigen::Index j = 0; j < 6; ++j) EXPECT_NEAR(a(i, j), raw[j] / total, 1e-14);
  }
}

TEST(AttentionWeights, RowsAreStochasticAndNonNegative) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto q = oracle::random_normal(12, 3, rng);
    const auto k = oracle::random_normal(12, 3, rng);
    AttentionConfig config = AttentionConfig::cosformer(12 + trial % 5, trial % 2 == 0);
    if (trial % 3 == 0) config.feature_map = FeatureMap::elu_plus_one();
    const auto a = cosformer::attention_weights_quadratic(q, k, config);
    EXPECT_GE(a.minCoeff(), 0.0);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double sum = a.row(i).sum();
      if (sum != 0.0) EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(AttentionWeights, HorizonSmallerThanSequenceIsConfigError) {
  const Matrix<double> q = Matrix<double>::Ones(5, 2);
  EXPECT_THROW(cosformer::attention_weights_quadratic(q, q, AttentionConfig::cosformer(4)), cosformer::ConfigError);
}

TEST(AttentionWeights, CosineRejectsSignIndefiniteMaps) {
  const Matrix<double> q = Matrix<double>::Ones(3, 2);
  AttentionConfig config = AttentionConfig::cosformer(3);
  config.feature_map = FeatureMap::identity();
  EXPECT_THROW(cosformer::attention_weights_quadratic(q, q, config), cosformer::ConfigError);
}

TEST(KernelAttentionQuadratic, SingleKeyBroadcastsValue) {
  Matrix<double> q(3, 2), k(1, 2), v(1, 3);
  q << 1, 2, 0.5, 0.1, 3, -1;
  k << 1, 1;
  v << 7, -2, 0.25;
  const auto out = cosformer::kernel_attention_quadratic(q, k, v, AttentionConfig{});
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index c = 0; c < 3; ++c) EXPECT_NEAR(out(i, c), v(0, c), 1e-15);
  }
}

TEST(KernelAttentionQuadratic, IdentityValuesSelectWeightRows) {
  std::mt19937_64 rng(8);
  const auto q = oracle::random_normal(4, 3, rng);
  const auto k = oracle::random_normal(4, 3, rng);
  const Matrix<double> v = Matrix<double>::Identity(4, 4);
  const auto out = cosformer::kernel_attention_quadratic(q, k, v, AttentionConfig{});
  const auto a = cosformer::attention_weights_quadratic(q, k, AttentionConfig{});
  EXPECT_LT((out - a).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(KernelAttentionQuadratic, CausalCosineMatchesMaskedScalarLoop) {
  std::mt19937_64 rng(9);
  const auto q = oracle::random_normal(16, 8, rng);
  const auto k = oracle::random_normal(16, 8, rng);
  const auto v = oracle::random_normal(16, 8, rng);
  const auto out = cosformer::kernel_attention_quadratic(q, k, v, AttentionConfig::cosformer(16, true));
  const auto expected = oracle::kernel_attention(q, k, v, oracle::relu, 16, true);
  EXPECT_LT(cosformer::max_relative_error(out, expected), 1e-13);
}

TEST(KernelAttentionQuadratic, CausalPrefixIgnoresSuffixPerturbations) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    auto q = oracle::random_normal(10, 4, rng);
    auto k = oracle::random_normal(10, 4, rng);
    auto v = oracle::random_normal(10, 3, rng);
    const AttentionConfig config = AttentionConfig::cosformer(10, true);
    const auto before = cosformer::kernel_attention_quadratic(q, k, v, config);
    const Eigen::Index cut = 1 + trial % 9;
    q.bottomRows(10 - cut) = oracle::random_normal(10 - cut, 4, rng);
    k.bottomRows(10 - cut) = oracle::random_normal(10 - cut, 4, rng);
    v.bottomRows(10 - cut) = oracle::random_normal(10 - cut, 3, rng);
    const auto after = cosformer::kernel_attention_quadratic(q, k, v, config);
    EXPECT_TRUE((before.topRows(cut).array() == after.topRows(cut).array()).all());
  }
}

TEST(KernelAttentionQuadratic, KeyPermutationEquivarianceWithoutReweight) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto q = oracle::random_normal(7, 4, rng);
    const auto k = oracle::random_normal(9, 4, rng);
    const auto v = oracle::random_normal(9, 3, rng);
    std::vector<int> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    oracle::Mat kp(9, 4), vp(9, 3);
    for (int r = 0; r < 9; ++r) {
      kp.row(r) = k.row(perm[r]);
      vp.row(r) = v.row(perm[r]);
    }
    const auto a = cosformer::kernel_attention_quadratic(q, k, v, AttentionConfig{});
    const auto b = cosformer::kernel_attention_quadratic(q, kp, vp, AttentionConfig{});
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
  }
}
