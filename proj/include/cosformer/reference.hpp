// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_REFERENCE_HPP_
#define COSFORMER_REFERENCE_HPP_

// Quadratic-cost attentions. They materialize the full n_q x n_k weight matrix
// and serve as oracles for the linear-cost implementations.

#include "cosformer/feature_map.hpp"
#include "cosformer/reweight.hpp"
#include "cosformer/types.hpp"

namespace cosformer {

/// Row-softmax of Q K^T (optionally scaled by 1/sqrt(d_k)), applied to V.
template <typename DQ, typename DK, typename DV>
Matrix<typename DQ::Scalar> softmax_attention(const Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DK>& k,
                                              const Eigen::MatrixBase<DV>& v, bool causal, bool scale) {
  using Scalar = typename DQ::Scalar;
  detail::check_qkv(q, k, v, causal);
  const Index n_q = q.rows();
  const Index n_k = k.rows();
  // Logits are overwritten in place by the normalized weights.
  AccumMatrix weights = q.template cast<Accum>() * k.template cast<Accum>().transpose();
  if (scale) {
    weights /= std::sqrt(static_cast<Accum>(q.cols()));
  }
  for (Index i = 0; i < n_q; ++i) {
    const Index last = causal ? i + 1 : n_k;
    auto row = weights.row(i).head(last);
    const Accum top = row.maxCoeff();
    row = (row.array() - top).exp().matrix();
    row /= row.sum();
    weights.row(i).tail(n_k - last).setZero();
  }
  return (weights * v.template cast<Accum>()).template cast<Scalar>();
}

/// Explicit normalized attention matrix of the kernelized form: entry (i, j) is
/// phi(Q_i) . phi(K_j) * w(i, j) divided by max(row sum, eps), with w the cosine
/// weight (or 1) and j > i masked to zero in causal mode.
template <typename DQ, typename DK>
AccumMatrix attention_weights_quadratic(const Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DK>& k,
                                        const AttentionConfig& config) {
  if (q.rows() < 1 || q.cols() < 1 || k.rows() < 1) {
    throw DimensionError("attention inputs must be non-empty");
  }
  if (q.cols() != k.cols()) {
    throw DimensionError("query width " + std::to_string(q.cols()) + " != key width " +
                         std::to_string(k.cols()));
  }
  if (config.causal && q.rows() != k.rows()) {
    throw DimensionError("causal attention needs n_q == n_k");
  }
  validate(config, q.rows(), k.rows());
  const Index n_q = q.rows();
  const Index n_k = k.rows();
  const AccumMatrix qp = apply_feature_map(q.template cast<Accum>(), config.feature_map);
  const AccumMatrix kp = apply_feature_map(k.template cast<Accum>(), config.feature_map);
  AccumMatrix a = qp * kp.transpose();
  if (config.cosine()) {
    for (Index i = 0; i < n_q; ++i) {
      for (Index j = 0; j < n_k; ++j) a(i, j) *= cos_weight(i + 1, j + 1, config.horizon());
    }
  }
  if (config.causal) {
    a.template triangularView<Eigen::StrictlyUpper>().setZero();
  }
  for (Index i = 0; i < n_q; ++i) {
    const Accum denom = std::max(a.row(i).sum(), static_cast<Accum>(config.eps));
    a.row(i) /= denom;
  }
  return a;
}

/// attention_weights_quadratic(Q, K, config) * V.
template <typename DQ, typename DK, typename DV>
Matrix<typename DQ::Scalar> kernel_attention_quadratic(const Eigen::MatrixBase<DQ>& q,
                                                       const Eigen::MatrixBase<DK>& k,
                                                       const Eigen::MatrixBase<DV>& v,
                                                       const AttentionConfig& config) {
  using Scalar = typename DQ::Scalar;
  detail::check_qkv(q, k, v, config.causal);
  const AccumMatrix weights = attention_weights_quadratic(q, k, config);
  return (weights * v.template cast<Accum>()).template cast<Scalar>();
}

}  // namespace cosformer

#endif  // COSFORMER_REFERENCE_HPP_
