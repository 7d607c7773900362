// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_GRADCHECK_HPP_
#define COSFORMER_GRADCHECK_HPP_

#include <algorithm>

#include "cosformer/backward.hpp"
#include "cosformer/dispatch.hpp"

namespace cosformer {

struct GradCheckResult {
  // Per-input normwise errors. A block whose true gradient is identically zero
  // (n = 1, or one live feature per row) scores ~1 here from roundoff alone.
  double dq_error = 0.0;
  double dk_error = 0.0;
  double dv_error = 0.0;
  // Normwise error over (dQ, dK, dV) as one vector; this is the figure of merit.
  double error = 0.0;
  Index excluded = 0;  // coordinates skipped next to a feature-map kink

  double max_block_error() const { return std::max({dq_error, dk_error, dv_error}); }
};

namespace detail {

using KeepMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MaskedDiff {
  double diff = 0.0;
  double scale = 0.0;

  double relative() const {
    if (diff == 0.0) return 0.0;
    return scale == 0.0 ? diff : diff / scale;
  }
};

// Largest |analytic - numeric| and largest |numeric| over the kept coordinates.
inline MaskedDiff masked_diff(const AccumMatrix& analytic, const AccumMatrix& numeric, const KeepMask& keep) {
  MaskedDiff m;
  for (Index r = 0; r < analytic.rows(); ++r) {
    for (Index c = 0; c < analytic.cols(); ++c) {
      if (!keep(r, c)) continue;
      m.diff = std::max(m.diff, std::abs(analytic(r, c) - numeric(r, c)));
      m.scale = std::max(m.scale, std::abs(numeric(r, c)));
    }
  }
  return m;
}

}  // namespace detail

/// Compares attention_backward against central differences of
/// sum(d_out .* attention(Q, K, V)). A coordinate is skipped when the
/// stencil [x - h, x + h] straddles a relu kink (|x| < kink_radius).
inline GradCheckResult check_attention_gradients(const AccumMatrix& q, const AccumMatrix& k, const AccumMatrix& v,
                                                 const AttentionConfig& config, const AccumMatrix& d_out,
                                                 double h = 1e-5, double kink_radius = 1e-5) {
  const auto analytic = attention_backward(q, k, v, config, d_out);
  using Mask = detail::KeepMask;
  const bool kinked = config.similarity == Similarity::kernel &&
                      (config.feature_map.kind == FeatureMap::Kind::relu ||
                       config.feature_map.kind == FeatureMap::Kind::leaky_relu);
  auto mask_for = [&](const AccumMatrix& x) -> Mask {
    if (!kinked) return Mask::Constant(x.rows(), x.cols(), true);
    return x.array().abs() >= kink_radius;
  };

  auto loss_q = [&](const AccumMatrix& x) { return attention(x, k, v, config).cwiseProduct(d_out).sum(); };
  auto loss_k = [&](const AccumMatrix& x) { return attention(q, x, v, config).cwiseProduct(d_out).sum(); };
  auto loss_v = [&](const AccumMatrix& x) { return attention(q, k, x, config).cwiseProduct(d_out).sum(); };

  const Mask keep_q = mask_for(q);
  const Mask keep_k = mask_for(k);
  const Mask keep_v = Mask::Constant(v.rows(), v.cols(), true);

  const auto mq = detail::masked_diff(analytic.dq, finite_diff_grad<Accum>(loss_q, q, h), keep_q);
  const auto mk = detail::masked_diff(analytic.dk, finite_diff_grad<Accum>(loss_k, k, h), keep_k);
  const auto mv = detail::masked_diff(analytic.dv, finite_diff_grad<Accum>(loss_v, v, h), keep_v);
  GradCheckResult result;
  result.dq_error = mq.relative();
  result.dk_error = mk.relative();
  result.dv_error = mv.relative();
  result.error = detail::MaskedDiff{std::max({mq.diff, mk.diff, mv.diff}), std::max({mq.scale, mk.scale, mv.scale})}
                     .relative();
  result.excluded = (!keep_q).count() + (!keep_k).count();
  return result;
}

}  // namespace cosformer

#endif  // COSFORMER_GRADCHECK_HPP_
