// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_DISPATCH_HPP_
#define COSFORMER_DISPATCH_HPP_

#include "cosformer/backward.hpp"
#include "cosformer/linear.hpp"
#include "cosformer/reference.hpp"

namespace cosformer {

/// Runs the linear-cost implementation selected by config: softmax reference,
/// cosFormer when cosine re-weighting is set, plain linear attention otherwise.
template <typename DQ, typename DK, typename DV>
Matrix<typename DQ::Scalar> attention(const Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DK>& k,
                                      const Eigen::MatrixBase<DV>& v, const AttentionConfig& config) {
  if (config.similarity == Similarity::softmax) {
    return softmax_attention(q, k, v, config.causal, config.softmax_scale);
  }
  if (config.cosine()) {
    return cosformer_attention(q, k, v, config);
  }
  return linear_attention(q, k, v, config.feature_map, config.causal, config.eps);
}

template <typename DQ, typename DK, typename DV, typename DG>
AttentionGradients<typename DQ::Scalar> attention_backward(const Eigen::MatrixBase<DQ>& q,
                                                           const Eigen::MatrixBase<DK>& k,
                                                           const Eigen::MatrixBase<DV>& v,
                                                           const AttentionConfig& config,
                                                           const Eigen::MatrixBase<DG>& d_out) {
  if (config.similarity == Similarity::softmax) {
    return softmax_attention_backward(q, k, v, config.causal, config.softmax_scale, d_out);
  }
  if (config.cosine()) {
    return cosformer_backward(q, k, v, config, d_out);
  }
  return linear_attention_backward(q, k, v, config.feature_map, config.causal, config.eps, d_out);
}

inline std::string describe(const AttentionConfig& config) {
  std::string name;
  if (config.similarity == Similarity::softmax) {
    name = "softmax";
  } else if (config.cosine()) {
    name = "cosformer[" + config.feature_map.name() + ",m=" + std::to_string(config.horizon()) + "]";
  } else {
    name = "linear[" + config.feature_map.name() + "]";
  }
  return name + (config.causal ? ",causal" : "");
}

}  // namespace cosformer

#endif  // COSFORMER_DISPATCH_HPP_
