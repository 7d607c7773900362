// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_FEATURE_MAP_HPP_
#define COSFORMER_FEATURE_MAP_HPP_

#include "cosformer/types.hpp"

namespace cosformer {

template <typename Scalar>
inline Scalar apply_feature(Scalar v, const FeatureMap& map) {
  switch (map.kind) {
    case FeatureMap::Kind::identity:
      return v;
    case FeatureMap::Kind::relu:
      return v > Scalar(0) ? v : Scalar(0);
    case FeatureMap::Kind::leaky_relu:
      return v < Scalar(0) ? static_cast<Scalar>(map.slope) * v : v;
    case FeatureMap::Kind::elu_plus_one:
      // elu(v) + 1 = exp(v) for v < 0
      return v < Scalar(0) ? std::exp(v) : v + Scalar(1);
  }
  return v;
}

// Derivative used by the backward pass. The relu subgradient at exactly 0 is 0.
template <typename Scalar>
inline Scalar feature_derivative(Scalar v, const FeatureMap& map) {
  switch (map.kind) {
    case FeatureMap::Kind::identity:
      return Scalar(1);
    case FeatureMap::Kind::relu:
      return v > Scalar(0) ? Scalar(1) : Scalar(0);
    case FeatureMap::Kind::leaky_relu:
      return v < Scalar(0) ? static_cast<Scalar>(map.slope) : Scalar(1);
    case FeatureMap::Kind::elu_plus_one:
      return v < Scalar(0) ? std::exp(v) : Scalar(1);
  }
  return Scalar(1);
}

/// Applies the feature map entrywise. Shape is preserved.
template <typename Derived>
Matrix<typename Derived::Scalar> apply_feature_map(const Eigen::MatrixBase<Derived>& x, const FeatureMap& map) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([&map](Scalar v) { return apply_feature(v, map); });
}

template <typename Derived>
Matrix<typename Derived::Scalar> feature_map_derivative(const Eigen::MatrixBase<Derived>& x,
                                                        const FeatureMap& map) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([&map](Scalar v) { return feature_derivative(v, map); });
}

}  // namespace cosformer

#endif  // COSFORMER_FEATURE_MAP_HPP_
