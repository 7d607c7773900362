// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_BACKWARD_HPP_
#define COSFORMER_BACKWARD_HPP_

#include <functional>
#include <optional>
#include <vector>

#include "cosformer/feature_map.hpp"
#include "cosformer/linear.hpp"
#include "cosformer/reweight.hpp"
#include "cosformer/types.hpp"

namespace cosformer {

/// Gradients of sum(d_out .* O) with respect to the three attention inputs.
template <typename Scalar>
struct AttentionGradients {
  Matrix<Scalar> dq;
  Matrix<Scalar> dk;
  Matrix<Scalar> dv;
};

namespace detail {

inline void check_upstream(Index rows, Index cols, Index want_rows, Index want_cols) {
  if (rows != want_rows || cols != want_cols) {
    throw DimensionError("upstream gradient is " + shape_str(rows, cols) + ", expected " +
                         shape_str(want_rows, want_cols));
  }
}

// Chain rule through
//   O_i = sum_b a_b(i) phi(Q_i) S_b / max(sum_b a_b(i) phi(Q_i) . T_b, eps)
// where S_b, T_b sum b_b(j) phi(K_j)^T V_j and b_b(j) phi(K_j) over admissible j.
// Branch 0 is cos (or the single unweighted branch), branch 1 is sin.
// Keys see suffix sums over the queries that read them, so the causal case
// runs the query pass forward and the key pass backward. O(n * d_k * d_v).
template <typename DQ, typename DK, typename DV, typename DG>
AttentionGradients<typename DQ::Scalar> linear_backward(const Eigen::MatrixBase<DQ>& q,
                                                        const Eigen::MatrixBase<DK>& k,
                                                        const Eigen::MatrixBase<DV>& v,
                                                        const Eigen::MatrixBase<DG>& d_out, const FeatureMap& map,
                                                        std::optional<Index> horizon, bool causal, double eps) {
  using Scalar = typename DQ::Scalar;
  const Index n_q = q.rows();
  const Index n_k = k.rows();
  const Index d_k = q.cols();
  const Index d_v = v.cols();
  const int branches = horizon ? 2 : 1;

  const AccumMatrix qp = apply_feature_map(q.template cast<Accum>(), map);
  const AccumMatrix kp = apply_feature_map(k.template cast<Accum>(), map);
  const AccumMatrix vv = v.template cast<Accum>();
  const AccumMatrix g = d_out.template cast<Accum>();

  auto scale = [&](int b, Index position) {
    const BranchScales f = branch_scales(horizon, position);
    return b == 0 ? f.cos : f.sin;
  };

  std::vector<AccumMatrix> s(branches, AccumMatrix::Zero(d_k, d_v));
  std::vector<AccumRow> t(branches, AccumRow::Zero(d_k));
  auto fold_key = [&](Index j) {
    for (int b = 0; b < branches; ++b) {
      const double beta = scale(b, j + 1);
      s[b].noalias() += (beta * kp.row(j)).transpose() * vv.row(j);
      t[b].noalias() += beta * kp.row(j);
    }
  };
  if (!causal) {
    for (Index j = 0; j < n_k; ++j) fold_key(j);
  }

  // Query pass: upstream gradients on numerator and denominator, plus dphi(Q).
  AccumMatrix d_num(n_q, d_v);
  Eigen::VectorXd d_den(n_q);
  AccumMatrix dqp(n_q, d_k);
  for (Index i = 0; i < n_q; ++i) {
    if (causal) fold_key(i);
    AccumRow num = AccumRow::Zero(d_v);
    Accum den = 0.0;
    for (int b = 0; b < branches; ++b) {
      const double alpha = scale(b, i + 1);
      num.noalias() += alpha * (qp.row(i) * s[b]);
      den += alpha * qp.row(i).dot(t[b]);
    }
    const bool floored = !(den > eps);
    const Accum dc = floored ? static_cast<Accum>(eps) : den;
    d_num.row(i) = g.row(i) / dc;
    // The floor is a constant when active, so it passes no gradient.
    d_den(i) = floored ? 0.0 : -g.row(i).dot(num) / (dc * dc);
    AccumRow grad = AccumRow::Zero(d_k);
    for (int b = 0; b < branches; ++b) {
      const double alpha = scale(b, i + 1);
      grad.noalias() += alpha * (d_num.row(i) * s[b].transpose() + d_den(i) * t[b]);
    }
    dqp.row(i) = grad;
  }

  // Key pass: u_b = sum_i a_b(i) phi(Q_i)^T dN_i, w_b = sum_i a_b(i) dD_i phi(Q_i).
  std::vector<AccumMatrix> u(branches, AccumMatrix::Zero(d_k, d_v));
  std::vector<AccumRow> w(branches, AccumRow::Zero(d_k));
  auto fold_query = [&](Index i) {
    for (int b = 0; b < branches; ++b) {
      const double alpha = scale(b, i + 1);
      u[b].noalias() += (alpha * qp.row(i)).transpose() * d_num.row(i);
      w[b].noalias() += (alpha * d_den(i)) * qp.row(i);
    }
  };
  if (!causal) {
    for (Index i = 0; i < n_q; ++i) fold_query(i);
  }
  AccumMatrix dkp(n_k, d_k);
  AccumMatrix dv(n_k, d_v);
  for (Index j = n_k - 1; j >= 0; --j) {
    if (causal) fold_query(j);
    AccumRow gk = AccumRow::Zero(d_k);
    AccumRow gv = AccumRow::Zero(d_v);
    for (int b = 0; b < branches; ++b) {
      const double beta = scale(b, j + 1);
      gv.noalias() += beta * (kp.row(j) * u[b]);
      gk.noalias() += beta * (vv.row(j) * u[b].transpose() + w[b]);
    }
    dkp.row(j) = gk;
    dv.row(j) = gv;
  }

  const AccumMatrix dq = dqp.cwiseProduct(feature_map_derivative(q.template cast<Accum>(), map));
  const AccumMatrix dk = dkp.cwiseProduct(feature_map_derivative(k.template cast<Accum>(), map));
  return {dq.template cast<Scalar>(), dk.template cast<Scalar>(), dv.template cast<Scalar>()};
}

}  // namespace detail

/// Backward pass of cosformer_attention for upstream gradient d_out.
template <typename DQ, typename DK, typename DV, typename DG>
AttentionGradients<typename DQ::Scalar> cosformer_backward(const Eigen::MatrixBase<DQ>& q,
                                                           const Eigen::MatrixBase<DK>& k,
                                                           const Eigen::MatrixBase<DV>& v,
                                                           const AttentionConfig& config,
                                                           const Eigen::MatrixBase<DG>& d_out) {
  detail::check_qkv(q, k, v, config.causal);
  if (!config.cosine()) {
    throw ConfigError("cosformer_backward needs cosine re-weighting; use linear_attention_backward otherwise");
  }
  validate(config, q.rows(), k.rows());
  detail::check_upstream(d_out.rows(), d_out.cols(), q.rows(), v.cols());
  return detail::linear_backward(q, k, v, d_out, config.feature_map, config.horizon(), config.causal, config.eps);
}

/// Backward pass of linear_attention.
template <typename DQ, typename DK, typename DV, typename DG>
AttentionGradients<typename DQ::Scalar> linear_attention_backward(const Eigen::MatrixBase<DQ>& q,
                                                                  const Eigen::MatrixBase<DK>& k,
                                                                  const Eigen::MatrixBase<DV>& v,
                                                                  const FeatureMap& map, bool causal, double eps,
                                                                  const Eigen::MatrixBase<DG>& d_out) {
  detail::check_qkv(q, k, v, causal);
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  detail::check_upstream(d_out.rows(), d_out.cols(), q.rows(), v.cols());
  return detail::linear_backward(q, k, v, d_out, map, std::nullopt, causal, eps);
}

/// Backward pass of softmax_attention. Quadratic in sequence length.
template <typename DQ, typename DK, typename DV, typename DG>
AttentionGradients<typename DQ::Scalar> softmax_attention_backward(const Eigen::MatrixBase<DQ>& q,
                                                                   const Eigen::MatrixBase<DK>& k,
                                                                   const Eigen::MatrixBase<DV>& v, bool causal,
                                                                   bool scale, const Eigen::MatrixBase<DG>& d_out) {
  using Scalar = typename DQ::Scalar;
  detail::check_qkv(q, k, v, causal);
  detail::check_upstream(d_out.rows(), d_out.cols(), q.rows(), v.cols());
  const AccumMatrix qa = q.template cast<Accum>();
  const AccumMatrix ka = k.template cast<Accum>();
  const AccumMatrix g = d_out.template cast<Accum>();
  const Accum factor = scale ? 1.0 / std::sqrt(static_cast<Accum>(q.cols())) : 1.0;
  const AccumMatrix logits = factor * (qa * ka.transpose());
  AccumMatrix p = AccumMatrix::Zero(q.rows(), k.rows());
  for (Index i = 0; i < q.rows(); ++i) {
    const Index last = causal ? i + 1 : k.rows();
    const Accum top = logits.row(i).head(last).maxCoeff();
    p.row(i).head(last) = (logits.row(i).head(last).array() - top).exp().matrix();
    p.row(i).head(last) /= p.row(i).head(last).sum();
  }
  const AccumMatrix dv = p.transpose() * g;
  const AccumMatrix dp = g * v.template cast<Accum>().transpose();
  const Eigen::VectorXd inner = dp.cwiseProduct(p).rowwise().sum();
  const AccumMatrix ds = factor * (p.array() * (dp.colwise() - inner).array()).matrix();
  const AccumMatrix dq = ds * ka;
  const AccumMatrix dk = ds.transpose() * qa;
  return {dq.template cast<Scalar>(), dk.template cast<Scalar>(), dv.template cast<Scalar>()};
}

/// Central differences (f(x + h e) - f(x - h e)) / 2h for every coordinate of x.
template <typename Scalar>
Matrix<Scalar> finite_diff_grad(const std::function<Accum(const Matrix<Scalar>&)>& f, const Matrix<Scalar>& x,
                                Scalar h) {
  if (!(h > Scalar(0))) {
    throw ConfigError("finite difference step must be positive");
  }
  Matrix<Scalar> grad(x.rows(), x.cols());
  Matrix<Scalar> probe = x;
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < x.cols(); ++c) {
      const Scalar saved = probe(r, c);
      probe(r, c) = saved + h;
      const Accum up = f(probe);
      probe(r, c) = saved - h;
      const Accum down = f(probe);
      probe(r, c) = saved;
      grad(r, c) = static_cast<Scalar>((up - down) / (2.0 * static_cast<Accum>(h)));
    }
  }
  return grad;
}

}  // namespace cosformer

#endif  // COSFORMER_BACKWARD_HPP_
