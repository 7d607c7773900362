// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_TYPES_HPP_
#define COSFORMER_TYPES_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>

namespace cosformer {

// Row-major so that "row i" is the token at position i + 1.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// Every reduction (row sums, prefix accumulators, dot products feeding a
// normalization) is carried out in this type regardless of the stored Scalar.
using Accum = double;
using AccumMatrix = Matrix<Accum>;
using AccumRow = RowVector<Accum>;

using Index = Eigen::Index;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bad command-line or harness arguments (unknown variant names, empty inputs).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Elementwise map applied to queries and keys before the dot product.
struct FeatureMap {
  enum class Kind { identity, relu, leaky_relu, elu_plus_one };

  Kind kind = Kind::relu;
  double slope = 0.0;  // only meaningful for leaky_relu

  static FeatureMap identity() { return {Kind::identity, 0.0}; }
  static FeatureMap relu() { return {Kind::relu, 0.0}; }
  static FeatureMap elu_plus_one() { return {Kind::elu_plus_one, 0.0}; }
  static FeatureMap leaky_relu(double slope) {
    if (!(slope > 0.0 && slope < 1.0)) {
      throw ConfigError("leaky_relu slope must lie in (0, 1), got " + std::to_string(slope));
    }
    return {Kind::leaky_relu, slope};
  }

  /// True when every output is >= 0 for every finite input.
  bool non_negative() const { return kind == Kind::relu || kind == Kind::elu_plus_one; }

  std::string name() const {
    switch (kind) {
      case Kind::identity: return "identity";
      case Kind::relu: return "relu";
      case Kind::leaky_relu: return "leaky_relu(" + std::to_string(slope) + ")";
      case Kind::elu_plus_one: return "elu_plus_one";
    }
    return "unknown";
  }
};

struct NoReweight {};

/// cos(pi/2 * (i - j) / horizon) distance weighting.
struct CosineReweight {
  Index horizon = 1;
};

using Reweight = std::variant<NoReweight, CosineReweight>;

// kernel: phi(Q) phi(K)^T similarities (optionally re-weighted).
// softmax: exp(Q K^T) reference; feature_map and reweight are ignored.
enum class Similarity { kernel, softmax };

struct AttentionConfig {
  Similarity similarity = Similarity::kernel;
  FeatureMap feature_map = FeatureMap::relu();
  Reweight reweight = NoReweight{};
  bool causal = false;
  double eps = 1e-6;
  bool softmax_scale = true;

  bool cosine() const { return std::holds_alternative<CosineReweight>(reweight); }
  Index horizon() const { return std::get<CosineReweight>(reweight).horizon; }

  /// The default cosFormer setup: relu features, cosine weights with the given horizon.
  static AttentionConfig cosformer(Index horizon, bool causal = false) {
    AttentionConfig config;
    config.reweight = CosineReweight{horizon};
    config.causal = causal;
    return config;
  }

  static AttentionConfig softmax(bool causal = false, bool scale = true) {
    AttentionConfig config;
    config.similarity = Similarity::softmax;
    config.causal = causal;
    config.softmax_scale = scale;
    return config;
  }
};

/// Throws ConfigError unless the config is usable for attention over
/// n_q queries and n_k keys.
inline void validate(const AttentionConfig& config, Index n_q, Index n_k) {
  if (!(config.eps > 0.0)) {
    throw ConfigError("eps must be positive");
  }
  if (config.similarity == Similarity::softmax) return;
  if (config.feature_map.kind == FeatureMap::Kind::leaky_relu &&
      !(config.feature_map.slope > 0.0 && config.feature_map.slope < 1.0)) {
    throw ConfigError("leaky_relu slope must lie in (0, 1)");
  }
  if (config.cosine()) {
    if (!config.feature_map.non_negative()) {
      throw ConfigError("cosine re-weighting needs a non-negative feature map (relu or elu_plus_one), got " +
                        config.feature_map.name());
    }
    const Index needed = std::max(n_q, n_k);
    if (config.horizon() < needed) {
      throw ConfigError("cosine horizon " + std::to_string(config.horizon()) +
                        " is smaller than sequence length " + std::to_string(needed));
    }
  }
}

namespace detail {

inline std::string shape_str(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

template <typename MQ, typename MK, typename MV>
void check_qkv(const MQ& q, const MK& k, const MV& v, bool causal) {
  if (q.rows() < 1 || q.cols() < 1 || k.rows() < 1 || v.cols() < 1) {
    throw DimensionError("attention inputs must be non-empty");
  }
  if (q.cols() != k.cols()) {
    throw DimensionError("query width " + std::to_string(q.cols()) + " != key width " +
                         std::to_string(k.cols()));
  }
  if (k.rows() != v.rows()) {
    throw DimensionError("key rows " + std::to_string(k.rows()) + " != value rows " +
                         std::to_string(v.rows()));
  }
  if (causal && q.rows() != k.rows()) {
    throw DimensionError("causal attention needs n_q == n_k, got " + std::to_string(q.rows()) + " and " +
                         std::to_string(k.rows()));
  }
}

}  // namespace detail

/// Largest |a - b| over all entries divided by the largest |b|; 0 when both are
/// zero, infinity when either side holds a NaN or Inf.
template <typename A, typename B>
double max_relative_error(const A& actual, const B& reference) {
  if (actual.rows() != reference.rows() || actual.cols() != reference.cols()) {
    throw DimensionError("max_relative_error: shape mismatch " +
                         detail::shape_str(actual.rows(), actual.cols()) + " vs " +
                         detail::shape_str(reference.rows(), reference.cols()));
  }
  const AccumMatrix a = actual.template cast<Accum>();
  const AccumMatrix b = reference.template cast<Accum>();
  if (!a.allFinite() || !b.allFinite()) return std::numeric_limits<double>::infinity();
  const double diff = (a - b).cwiseAbs().maxCoeff();
  const double scale = b.cwiseAbs().maxCoeff();
  if (diff == 0.0) return 0.0;
  if (scale == 0.0) return diff;
  return diff / scale;
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace cosformer

#endif  // COSFORMER_TYPES_HPP_
