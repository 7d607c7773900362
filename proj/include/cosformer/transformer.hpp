// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_TRANSFORMER_HPP_
#define COSFORMER_TRANSFORMER_HPP_

#include <string>

#include "cosformer/dispatch.hpp"
#include "cosformer/types.hpp"

namespace cosformer {

/// One attention head plus a two-layer relu feedforward, both with residuals,
/// and the token embedding / output projection used by the toy trainer.
/// Query/key width (d_head) is free; values stay d_model wide so the attention
/// output adds straight onto the residual.
template <typename Scalar>
struct BlockParams {
  Matrix<Scalar> w_q;        // d_model x d_head
  Matrix<Scalar> w_k;        // d_model x d_head
  Matrix<Scalar> w_v;        // d_model x d_model
  Matrix<Scalar> w_ff1;      // d_model x d_ff
  Matrix<Scalar> w_ff2;      // d_ff x d_model
  Matrix<Scalar> embedding;  // vocab x d_model (may be empty for block-only use)
  Matrix<Scalar> w_out;      // d_model x vocab (may be empty for block-only use)

  Index d_model() const { return w_q.rows(); }
  Index d_head() const { return w_q.cols(); }
  Index d_ff() const { return w_ff1.cols(); }
  Index vocab() const { return embedding.rows(); }

  static BlockParams zeros(Index d_model, Index d_head, Index d_ff, Index vocab = 0) {
    return {Matrix<Scalar>::Zero(d_model, d_head), Matrix<Scalar>::Zero(d_model, d_head),
            Matrix<Scalar>::Zero(d_model, d_model), Matrix<Scalar>::Zero(d_model, d_ff),
            Matrix<Scalar>::Zero(d_ff, d_model),    Matrix<Scalar>::Zero(vocab, d_model),
            Matrix<Scalar>::Zero(d_model, vocab)};
  }
};

namespace detail {

template <typename M>
void expect_shape(const M& m, Index rows, Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(name) + " is " + shape_str(m.rows(), m.cols()) + ", expected " +
                         shape_str(rows, cols));
  }
  if (!m.allFinite()) throw DimensionError(std::string(name) + " holds non-finite values");
}

}  // namespace detail

/// Throws DimensionError unless the block matrices agree with each other.
/// With `with_vocab`, embedding and output projection are checked too.
template <typename Scalar>
void validate(const BlockParams<Scalar>& p, bool with_vocab = false) {
  const Index d = p.d_model();
  if (d < 1 || p.d_head() < 1 || p.d_ff() < 1) throw DimensionError("block dimensions must be >= 1");
  detail::expect_shape(p.w_k, d, p.d_head(), "w_k");
  detail::expect_shape(p.w_v, d, d, "w_v");
  detail::expect_shape(p.w_ff1, d, p.d_ff(), "w_ff1");
  detail::expect_shape(p.w_ff2, p.d_ff(), d, "w_ff2");
  if (with_vocab) {
    if (p.vocab() < 1) throw DimensionError("embedding table is empty");
    detail::expect_shape(p.embedding, p.vocab(), d, "embedding");
    detail::expect_shape(p.w_out, d, p.vocab(), "w_out");
  }
}

/// h = Attn(x W_q, x W_k, x W_v) + x, then h + relu(h W_ff1) W_ff2.
template <typename Derived, typename Scalar>
Matrix<Scalar> transformer_block_forward(const Eigen::MatrixBase<Derived>& x, const BlockParams<Scalar>& params,
                                         const AttentionConfig& config) {
  validate(params);
  if (x.cols() != params.d_model() || x.rows() < 1) {
    throw DimensionError("block input is " + detail::shape_str(x.rows(), x.cols()) + ", expected n x " +
                         std::to_string(params.d_model()));
  }
  const Matrix<Scalar> xs = x;
  const Matrix<Scalar> q = xs * params.w_q;
  const Matrix<Scalar> k = xs * params.w_k;
  const Matrix<Scalar> v = xs * params.w_v;
  const Matrix<Scalar> h = attention(q, k, v, config) + xs;
  return h + (h * params.w_ff1).cwiseMax(Scalar(0)) * params.w_ff2;
}

/// Fixed sinusoidal encodings, 0-based positions: column 2c holds
/// sin(p / base^(2c/d)) and column 2c+1 the matching cos.
AccumMatrix sinusoidal_positions(Index n, Index d_model, double base = 10000.0);

/// Forward activations for a stack of equal-length sequences, kept for backward.
struct BlockCache {
  Index seq_len = 0;
  AccumMatrix x, q, k, v, h, pre, act, out;
};

/// Runs the block over x = [seq_0; seq_1; ...] (each seq_len rows); attention
/// never crosses sequence boundaries.
BlockCache block_forward_cached(const AccumMatrix& x, Index seq_len, const BlockParams<double>& params,
                                const AttentionConfig& config);

struct BlockGradients {
  BlockParams<double> params;  // embedding / w_out left empty
  AccumMatrix dx;
};

BlockGradients block_backward(const BlockCache& cache, const BlockParams<double>& params,
                              const AttentionConfig& config, const AccumMatrix& d_out);

}  // namespace cosformer

#endif  // COSFORMER_TRANSFORMER_HPP_
