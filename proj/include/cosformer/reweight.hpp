// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_REWEIGHT_HPP_
#define COSFORMER_REWEIGHT_HPP_

#include <numbers>

#include "cosformer/types.hpp"

namespace cosformer {

// Positions are 1-based throughout this header.

/// Angle pi * pos / (2 * horizon), computed directly per position.
inline double position_angle(Index pos, Index horizon) {
  return std::numbers::pi * static_cast<double>(pos) / (2.0 * static_cast<double>(horizon));
}

/// cos(pi/2 * (i - j) / m). Equals 1 on the diagonal and 0 at |i - j| == m.
inline double cos_weight(Index i, Index j, Index horizon) {
  return std::cos(std::numbers::pi / 2.0 * static_cast<double>(i - j) / static_cast<double>(horizon));
}

inline void check_horizon(Index n_q, Index n_k, Index horizon) {
  if (horizon < 1 || horizon < std::max(n_q, n_k)) {
    throw ConfigError("cosine horizon " + std::to_string(horizon) + " must be >= max(n_q, n_k) = " +
                      std::to_string(std::max(n_q, n_k)));
  }
}

/// Explicit n_q x n_k matrix of cosine distance weights (Toeplitz in i - j).
inline AccumMatrix build_reweight_matrix(Index n_q, Index n_k, Index horizon) {
  if (n_q < 1 || n_k < 1) {
    throw DimensionError("reweight matrix needs positive dimensions");
  }
  check_horizon(n_q, n_k, horizon);
  AccumMatrix w(n_q, n_k);
  for (Index i = 0; i < n_q; ++i) {
    for (Index j = 0; j < n_k; ++j) {
      w(i, j) = cos_weight(i + 1, j + 1, horizon);
    }
  }
  return w;
}

/// cos and sin of the position angle for positions 1..n, as column vectors.
struct PositionFactors {
  Eigen::VectorXd cos;
  Eigen::VectorXd sin;
};

inline PositionFactors position_factors(Index n, Index horizon) {
  PositionFactors f{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Index p = 0; p < n; ++p) {
    const double a = position_angle(p + 1, horizon);
    f.cos(p) = std::cos(a);
    f.sin(p) = std::sin(a);
  }
  return f;
}

/// Feature-mapped queries and keys split into the cos and sin branches so that
/// q_cos_i . k_cos_j + q_sin_i . k_sin_j == (Qp_i . Kp_j) * cos_weight(i, j, m).
struct DecomposedFactors {
  AccumMatrix q_cos;
  AccumMatrix q_sin;
  AccumMatrix k_cos;
  AccumMatrix k_sin;
  Index horizon = 1;

  /// Reassembles the re-weighted similarity matrix from the factors (O(n_q * n_k)).
  AccumMatrix similarity() const {
    return q_cos * k_cos.transpose() + q_sin * k_sin.transpose();
  }
};

/// Splits already feature-mapped Qp, Kp into the four position-scaled factors.
template <typename DQ, typename DK>
DecomposedFactors decompose(const Eigen::MatrixBase<DQ>& qp, const Eigen::MatrixBase<DK>& kp, Index horizon) {
  if (qp.cols() != kp.cols()) {
    throw DimensionError("decompose: query width " + std::to_string(qp.cols()) + " != key width " +
                         std::to_string(kp.cols()));
  }
  check_horizon(qp.rows(), kp.rows(), horizon);
  const PositionFactors fq = position_factors(qp.rows(), horizon);
  const PositionFactors fk = position_factors(kp.rows(), horizon);
  const AccumMatrix q = qp.template cast<Accum>();
  const AccumMatrix k = kp.template cast<Accum>();
  return DecomposedFactors{fq.cos.asDiagonal() * q, fq.sin.asDiagonal() * q, fk.cos.asDiagonal() * k,
                           fk.sin.asDiagonal() * k, horizon};
}

}  // namespace cosformer

#endif  // COSFORMER_REWEIGHT_HPP_
