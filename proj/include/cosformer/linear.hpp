// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_LINEAR_HPP_
#define COSFORMER_LINEAR_HPP_

// Linear-cost attentions. None of these materialize an n_q x n_k matrix: keys
// are folded into d_k x d_v accumulators first and each query row is then
// read out against them.

#include <optional>

#include "cosformer/feature_map.hpp"
#include "cosformer/reweight.hpp"
#include "cosformer/types.hpp"

namespace cosformer {

/// Running sums for causal decoding. With cosine re-weighting both branches are
/// live; without it only the cos branch is used (with unit position factors).
struct CausalState {
  AccumMatrix s_cos;  // sum_j k_cos_j^T v_j, d_k x d_v
  AccumMatrix s_sin;
  AccumRow t_cos;     // sum_j k_cos_j, d_k
  AccumRow t_sin;
  Index t = 0;        // positions consumed so far

  Index key_dim() const { return s_cos.rows(); }
  Index value_dim() const { return s_cos.cols(); }
};

inline CausalState causal_state_init(Index d_k, Index d_v) {
  if (d_k < 1 || d_v < 1) {
    throw DimensionError("causal state dims must be >= 1, got " + detail::shape_str(d_k, d_v));
  }
  return CausalState{AccumMatrix::Zero(d_k, d_v), AccumMatrix::Zero(d_k, d_v), AccumRow::Zero(d_k),
                     AccumRow::Zero(d_k), 0};
}

namespace detail {

// Knobs that exist only so the equivalence suite can inject known bugs into the
// real kernel. Production callers always use the defaults.
struct KernelOptions {
  Index query_position_shift = 0;
  bool drop_sin_branch = false;
  bool floor_denominator = true;
};

struct BranchScales {
  double cos = 1.0;
  double sin = 0.0;
};

inline BranchScales branch_scales(std::optional<Index> horizon, Index position) {
  if (!horizon) return {};
  const double a = position_angle(position, *horizon);
  return {std::cos(a), std::sin(a)};
}

// Fold one key/value pair into the accumulators.
template <typename RK, typename RV>
void accumulate(CausalState& state, const RK& kp, const RV& v, const BranchScales& f, bool use_sin) {
  state.s_cos.noalias() += (f.cos * kp).transpose() * v;
  state.t_cos.noalias() += f.cos * kp;
  if (use_sin) {
    state.s_sin.noalias() += (f.sin * kp).transpose() * v;
    state.t_sin.noalias() += f.sin * kp;
  }
}

// Read out one query row against the accumulators.
template <typename RQ>
AccumRow emit(const CausalState& state, const RQ& qp, const BranchScales& f, bool use_sin, double eps,
              bool floor_denominator) {
  AccumRow numerator = f.cos * (qp * state.s_cos);
  Accum denominator = f.cos * qp.dot(state.t_cos);
  if (use_sin) {
    numerator.noalias() += f.sin * (qp * state.s_sin);
    denominator += f.sin * qp.dot(state.t_sin);
  }
  const Accum d = floor_denominator ? std::max(denominator, static_cast<Accum>(eps)) : denominator;
  return numerator / d;
}

template <typename DQ, typename DK, typename DV>
Matrix<typename DQ::Scalar> linear_forward(const Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DK>& k,
                                           const Eigen::MatrixBase<DV>& v, const FeatureMap& map,
                                           std::optional<Index> horizon, bool causal, double eps,
                                           const KernelOptions& options = {}) {
  using Scalar = typename DQ::Scalar;
  const Index n_q = q.rows();
  const Index n_k = k.rows();
  const bool use_sin = horizon.has_value() && !options.drop_sin_branch;

  Matrix<Scalar> out(n_q, v.cols());
  CausalState state = causal_state_init(k.cols(), v.cols());
  AccumRow kp(k.cols());
  AccumRow qp(q.cols());

  auto fold_key = [&](Index j) {
    kp = apply_feature_map(k.row(j).template cast<Accum>(), map);
    accumulate(state, kp, v.row(j).template cast<Accum>(), branch_scales(horizon, j + 1), use_sin);
  };
  auto read_query = [&](Index i) {
    qp = apply_feature_map(q.row(i).template cast<Accum>(), map);
    const BranchScales f = branch_scales(horizon, i + 1 + options.query_position_shift);
    out.row(i) = emit(state, qp, f, use_sin, eps, options.floor_denominator).template cast<Scalar>();
  };

  if (causal) {
    for (Index i = 0; i < n_q; ++i) {
      fold_key(i);
      read_query(i);
    }
  } else {
    for (Index j = 0; j < n_k; ++j) fold_key(j);
    for (Index i = 0; i < n_q; ++i) read_query(i);
  }
  return out;
}

}  // namespace detail

/// Kernelized attention phi(Q) (phi(K)^T V) / max(phi(Q) phi(K)^T 1, eps), with
/// prefix sums in causal mode. Cost Theta(n * d_k * d_v).
template <typename DQ, typename DK, typename DV>
Matrix<typename DQ::Scalar> linear_attention(const Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DK>& k,
                                             const Eigen::MatrixBase<DV>& v, const FeatureMap& map, bool causal,
                                             double eps = 1e-6) {
  detail::check_qkv(q, k, v, causal);
  AttentionConfig config;
  config.feature_map = map;
  config.eps = eps;
  validate(config, q.rows(), k.rows());
  return detail::linear_forward(q, k, v, map, std::nullopt, causal, eps);
}

/// cosFormer attention: relu (or elu+1) features with cosine re-weighting
/// folded into separate cos and sin accumulators.
template <typename DQ, typename DK, typename DV>
Matrix<typename DQ::Scalar> cosformer_attention(const Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DK>& k,
                                                const Eigen::MatrixBase<DV>& v, const AttentionConfig& config) {
  detail::check_qkv(q, k, v, config.causal);
  if (!config.cosine()) {
    throw ConfigError("cosformer_attention needs cosine re-weighting; use linear_attention otherwise");
  }
  validate(config, q.rows(), k.rows());
  return detail::linear_forward(q, k, v, config.feature_map, config.horizon(), config.causal, config.eps);
}

/// Consumes position state.t + 1 and returns its attention output. Per-step
/// cost is Theta(d_k * d_v) independent of how many steps came before.
template <typename RQ, typename RK, typename RV>
AccumRow causal_state_step(CausalState& state, const Eigen::MatrixBase<RQ>& q_t, const Eigen::MatrixBase<RK>& k_t,
                           const Eigen::MatrixBase<RV>& v_t, Index horizon, double eps,
                           const FeatureMap& map = FeatureMap::relu()) {
  if (q_t.size() != state.key_dim() || k_t.size() != state.key_dim() || v_t.size() != state.value_dim()) {
    throw DimensionError("causal_state_step: row widths do not match the state");
  }
  if (!map.non_negative()) {
    throw ConfigError("causal_state_step needs a non-negative feature map");
  }
  if (!(eps > 0.0)) {
    throw ConfigError("eps must be positive");
  }
  const Index position = state.t + 1;
  if (horizon < 1 || position > horizon) {
    throw ConfigError("position " + std::to_string(position) + " exceeds cosine horizon " +
                      std::to_string(horizon));
  }
  const AccumRow kp = apply_feature_map(AccumRow(k_t.template cast<Accum>()), map);
  const AccumRow qp = apply_feature_map(AccumRow(q_t.template cast<Accum>()), map);
  const detail::BranchScales f = detail::branch_scales(horizon, position);
  detail::accumulate(state, kp, AccumRow(v_t.template cast<Accum>()), f, true);
  state.t = position;
  return detail::emit(state, qp, f, true, eps, true);
}

}  // namespace cosformer

#endif  // COSFORMER_LINEAR_HPP_
