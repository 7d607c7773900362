// SPDX-License-Identifier: Apache-2.0
#include "cosformer/transformer.hpp"

#include <cmath>

namespace cosformer {

AccumMatrix sinusoidal_positions(Index n, Index d_model, double base) {
  if (n < 1 || d_model < 1) throw DimensionError("positional table needs positive dimensions");
  if (!(base > 1.0)) throw ConfigError("positional base must exceed 1");
  AccumMatrix pe(n, d_model);
  for (Index p = 0; p < n; ++p) {
    for (Index c = 0; c < d_model; ++c) {
      const Index pair = c / 2;
      const double angle =
          static_cast<double>(p) / std::pow(base, 2.0 * static_cast<double>(pair) / static_cast<double>(d_model));
      pe(p, c) = c % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

BlockCache block_forward_cached(const AccumMatrix& x, Index seq_len, const BlockParams<double>& params,
                                const AttentionConfig& config) {
  validate(params);
  if (seq_len < 1 || x.rows() % seq_len != 0 || x.cols() != params.d_model()) {
    throw DimensionError("block input " + detail::shape_str(x.rows(), x.cols()) +
                         " is not a stack of length-" + std::to_string(seq_len) + " sequences of width " +
                         std::to_string(params.d_model()));
  }
  BlockCache c;
  c.seq_len = seq_len;
  c.x = x;
  c.q = x * params.w_q;
  c.k = x * params.w_k;
  c.v = x * params.w_v;
  c.h = x;
  for (Index s = 0; s < x.rows(); s += seq_len) {
    c.h.middleRows(s, seq_len) +=
        attention(c.q.middleRows(s, seq_len), c.k.middleRows(s, seq_len), c.v.middleRows(s, seq_len), config);
  }
  c.pre = c.h * params.w_ff1;
  c.act = c.pre.cwiseMax(0.0);
  c.out = c.h + c.act * params.w_ff2;
  return c;
}

BlockGradients block_backward(const BlockCache& c, const BlockParams<double>& params, const AttentionConfig& config,
                              const AccumMatrix& d_out) {
  detail::check_upstream(d_out.rows(), d_out.cols(), c.out.rows(), c.out.cols());
  BlockGradients g;
  g.params.w_ff2 = c.act.transpose() * d_out;
  const AccumMatrix d_pre = (d_out * params.w_ff2.transpose()).cwiseProduct((c.pre.array() > 0.0).cast<double>().matrix());
  g.params.w_ff1 = c.h.transpose() * d_pre;
  const AccumMatrix dh = d_out + d_pre * params.w_ff1.transpose();

  AccumMatrix dq(c.q.rows(), c.q.cols());
  AccumMatrix dk(c.k.rows(), c.k.cols());
  AccumMatrix dv(c.v.rows(), c.v.cols());
  const Index n = c.seq_len;
  for (Index s = 0; s < c.x.rows(); s += n) {
    auto grads = attention_backward(c.q.middleRows(s, n), c.k.middleRows(s, n), c.v.middleRows(s, n), config,
                                    dh.middleRows(s, n));
    dq.middleRows(s, n) = grads.dq;
    dk.middleRows(s, n) = grads.dk;
    dv.middleRows(s, n) = grads.dv;
  }
  g.params.w_q = c.x.transpose() * dq;
  g.params.w_k = c.x.transpose() * dk;
  g.params.w_v = c.x.transpose() * dv;
  g.dx = dh + dq * params.w_q.transpose() + dk * params.w_k.transpose() + dv * params.w_v.transpose();
  return g;
}

}  // namespace cosformer
