// SPDX-License-Identifier: Apache-2.0
#include "cosformer/equivalence.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <future>
#include <iomanip>
#include <ostream>
#include <random>

#include "cosformer/linear.hpp"
#include "cosformer/reference.hpp"

namespace cosformer {

namespace {

constexpr double kStandardTolerance = 1e-5;
constexpr double kWideTolerance = 1e-10;
constexpr double kStreamingTolerance = 1e-12;

// Order matters: reports list variants in this order.
enum Variant : int {
  kCosformerWide,
  kCosformerStandard,
  kLinearReluWide,
  kLinearEluWide,
  kStreamingWide,
  kVariantCount
};

const char* variant_name(int v) {
  switch (v) {
    case kCosformerWide: return "cosformer/wide";
    case kCosformerStandard: return "cosformer/standard";
    case kLinearReluWide: return "linear_relu/wide";
    case kLinearEluWide: return "linear_elu/wide";
    case kStreamingWide: return "causal_streaming/wide";
  }
  return "?";
}

double variant_tolerance(int v) {
  switch (v) {
    case kCosformerStandard: return kStandardTolerance;
    case kStreamingWide: return kStreamingTolerance;
    default: return kWideTolerance;
  }
}

bool variant_enabled(int v, Precision p) {
  if (v == kCosformerStandard) return p != Precision::wide;
  return p != Precision::standard;
}

struct TrialOutcome {
  std::array<double, kVariantCount> error{};
  std::array<bool, kVariantCount> ran{};
};

detail::KernelOptions kernel_options(Mutation m) {
  detail::KernelOptions o;
  switch (m) {
    case Mutation::none: break;
    case Mutation::position_off_by_one: o.query_position_shift = 1; break;
    case Mutation::drop_sin_branch: o.drop_sin_branch = true; break;
    case Mutation::no_denominator_floor: o.floor_denominator = false; break;
  }
  return o;
}

AccumMatrix normal_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  AccumMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

// NaN must count as a failure, hence the negated comparison at the call site.
double error_or_nan(double e) { return std::isnan(e) ? std::numeric_limits<double>::infinity() : e; }

TrialOutcome run_trial(const EquivalenceOptions& options, Index trial) {
  std::seed_seq seq{static_cast<std::uint64_t>(options.seed), static_cast<std::uint64_t>(trial),
                    std::uint64_t{0x636f73}};
  std::mt19937_64 rng(seq);
  auto uniform = [&](Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); };

  const bool causal = uniform(0, 1) == 1;
  const Index n_k = uniform(1, options.max_len);
  const Index n_q = causal || uniform(0, 1) == 0 ? n_k : uniform(1, options.max_len);
  const Index d_k = uniform(1, options.max_dim);
  const Index d_v = uniform(1, options.max_dim);
  const Index longest = std::max(n_q, n_k);
  const Index horizon = uniform(0, 1) == 0 ? longest : 2 * longest;

  const AccumMatrix q = normal_matrix(n_q, d_k, rng);
  const AccumMatrix k = normal_matrix(n_k, d_k, rng);
  const AccumMatrix v = normal_matrix(n_k, d_v, rng);

  const AttentionConfig config = AttentionConfig::cosformer(horizon, causal);
  const detail::KernelOptions mutated = kernel_options(options.mutation);
  TrialOutcome outcome;

  auto cosformer_kernel = [&](const auto& qq, const auto& kk, const auto& vv) {
    return detail::linear_forward(qq, kk, vv, config.feature_map, horizon, causal, config.eps, mutated);
  };

  if (variant_enabled(kCosformerWide, options.precision)) {
    const AccumMatrix oracle = kernel_attention_quadratic(q, k, v, config);
    outcome.error[kCosformerWide] = error_or_nan(max_relative_error(cosformer_kernel(q, k, v), oracle));
    outcome.ran[kCosformerWide] = true;
  }
  if (variant_enabled(kCosformerStandard, options.precision)) {
    const Matrix<float> qf = q.cast<float>(), kf = k.cast<float>(), vf = v.cast<float>();
    const AccumMatrix oracle = kernel_attention_quadratic(qf.cast<Accum>(), kf.cast<Accum>(), vf.cast<Accum>(), config);
    outcome.error[kCosformerStandard] = error_or_nan(max_relative_error(cosformer_kernel(qf, kf, vf), oracle));
    outcome.ran[kCosformerStandard] = true;
  }
  if (variant_enabled(kLinearReluWide, options.precision)) {
    AttentionConfig plain;
    plain.causal = causal;
    outcome.error[kLinearReluWide] = error_or_nan(
        max_relative_error(linear_attention(q, k, v, plain.feature_map, causal, plain.eps),
                           kernel_attention_quadratic(q, k, v, plain)));
    plain.feature_map = FeatureMap::elu_plus_one();
    outcome.error[kLinearEluWide] = error_or_nan(
        max_relative_error(linear_attention(q, k, v, plain.feature_map, causal, plain.eps),
                           kernel_attention_quadratic(q, k, v, plain)));
    outcome.ran[kLinearReluWide] = outcome.ran[kLinearEluWide] = true;
  }
  if (variant_enabled(kStreamingWide, options.precision)) {
    // Streaming check: its own square causal case, up to max_streaming_len.
    const Index n = uniform(1, options.max_streaming_len);
    const Index m = uniform(0, 1) == 0 ? n : 2 * n;
    const AccumMatrix sq = normal_matrix(n, d_k, rng);
    const AccumMatrix sk = normal_matrix(n, d_k, rng);
    const AccumMatrix sv = normal_matrix(n, d_v, rng);
    const AttentionConfig streaming = AttentionConfig::cosformer(m, true);
    const AccumMatrix batch =
        detail::linear_forward(sq, sk, sv, streaming.feature_map, m, true, streaming.eps, mutated);
    CausalState state = causal_state_init(d_k, d_v);
    AccumMatrix stepped(n, d_v);
    for (Index t = 0; t < n; ++t) {
      stepped.row(t) = causal_state_step(state, sq.row(t), sk.row(t), sv.row(t), m, streaming.eps);
    }
    outcome.error[kStreamingWide] = error_or_nan(max_relative_error(stepped, batch));
    outcome.ran[kStreamingWide] = true;
  }
  return outcome;
}

}  // namespace

Mutation parse_mutation(const std::string& name) {
  if (name == "none") return Mutation::none;
  if (name == "position-off-by-one") return Mutation::position_off_by_one;
  if (name == "drop-sin") return Mutation::drop_sin_branch;
  if (name == "no-floor") return Mutation::no_denominator_floor;
  throw UsageError("unknown mutation '" + name + "' (none, position-off-by-one, drop-sin, no-floor)");
}

std::string to_string(Mutation m) {
  switch (m) {
    case Mutation::none: return "none";
    case Mutation::position_off_by_one: return "position-off-by-one";
    case Mutation::drop_sin_branch: return "drop-sin";
    case Mutation::no_denominator_floor: return "no-floor";
  }
  return "?";
}

Precision parse_precision(const std::string& name) {
  if (name == "standard") return Precision::standard;
  if (name == "wide") return Precision::wide;
  if (name == "both") return Precision::both;
  throw UsageError("unknown precision '" + name + "' (standard, wide, both)");
}

bool EquivalenceReport::passed() const {
  return std::all_of(variants.begin(), variants.end(), [](const VariantResult& v) { return v.passed(); });
}

const VariantResult* EquivalenceReport::find(const std::string& name) const {
  for (const auto& v : variants)
    if (v.name == name) return &v;
  return nullptr;
}

EquivalenceReport run_equivalence_suite(const EquivalenceOptions& options) {
  if (options.trials < 1) throw UsageError("trials must be >= 1");
  if (options.max_len < 1 || options.max_dim < 1 || options.max_streaming_len < 1) {
    throw UsageError("max_len, max_dim and max_streaming_len must be >= 1");
  }

  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(options.trials));
  const unsigned workers = std::max(1u, options.threads);
  if (workers == 1) {
    for (Index t = 0; t < options.trials; ++t) outcomes[static_cast<std::size_t>(t)] = run_trial(options, t);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (Index t = w; t < options.trials; t += workers) {
          outcomes[static_cast<std::size_t>(t)] = run_trial(options, t);
        }
      }));
    }
    for (auto& job : jobs) job.get();
  }

  EquivalenceReport report{options.seed, options.trials, {}};
  for (int v = 0; v < kVariantCount; ++v) {
    if (!variant_enabled(v, options.precision)) continue;
    VariantResult result{variant_name(v), variant_tolerance(v), 0.0, 0, 0};
    for (const auto& o : outcomes) {
      if (!o.ran[v]) continue;
      ++result.trials;
      result.max_error = std::max(result.max_error, o.error[v]);
      if (!(o.error[v] <= result.tolerance)) ++result.failures;
    }
    report.variants.push_back(result);
  }
  return report;
}

void print_report(const EquivalenceReport& report, std::ostream& out) {
  out << "equivalence suite: seed=" << report.seed << " trials=" << report.trials << '\n';
  for (const auto& v : report.variants) {
    out << "  " << std::left << std::setw(24) << v.name << " max_rel_err=" << std::scientific
        << std::setprecision(3) << v.max_error << " tol=" << v.tolerance << std::defaultfloat
        << " failures=" << v.failures << '/' << v.trials << "  " << (v.passed() ? "PASS" : "FAIL") << '\n';
  }
  out << (report.passed() ? "PASS" : "FAIL") << '\n';
}

void write_report_csv(const EquivalenceReport& report, std::ostream& out) {
  out << "variant,trials,failures,max_rel_err,tolerance,passed\n";
  out << std::setprecision(6);
  for (const auto& v : report.variants) {
    out << v.name << ',' << v.trials << ',' << v.failures << ',' << v.max_error << ',' << v.tolerance << ','
        << (v.passed() ? 1 : 0) << '\n';
  }
}

}  // namespace cosformer
