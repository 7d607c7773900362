// SPDX-License-Identifier: Apache-2.0
#include "cosformer/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <new>
#include <numeric>
#include <ostream>
#include <random>

#include "cosformer/backward.hpp"
#include "cosformer/linear.hpp"
#include "cosformer/reference.hpp"

namespace cosformer {

namespace {

struct VariantInfo {
  std::string name;
  enum class Family { linear, cosformer, softmax, kernel_quadratic } family;
  bool causal;
};

const std::vector<VariantInfo>& variant_table() {
  static const std::vector<VariantInfo> all{
      {"cosformer", VariantInfo::Family::cosformer, false},
      {"cosformer_causal", VariantInfo::Family::cosformer, true},
      {"linear", VariantInfo::Family::linear, false},
      {"linear_causal", VariantInfo::Family::linear, true},
      {"softmax", VariantInfo::Family::softmax, false},
      {"softmax_causal", VariantInfo::Family::softmax, true},
      {"kernel_quadratic", VariantInfo::Family::kernel_quadratic, false},
  };
  return all;
}

const VariantInfo& find_variant(const std::string& name) {
  for (const auto& s : variant_table())
    if (s.name == name) return s;
  throw UsageError("unknown benchmark variant '" + name + "'");
}

template <typename Scalar>
Matrix<Scalar> normal_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix<Scalar> m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = static_cast<Scalar>(dist(rng));
  return m;
}

template <typename Scalar>
struct Inputs {
  Matrix<Scalar> q, k, v, d_out;
};

template <typename Scalar>
Inputs<Scalar> make_inputs(std::uint64_t seed, Index n, Index d) {
  std::seed_seq seq{seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(d)};
  std::mt19937_64 rng(seq);
  Inputs<Scalar> in;
  in.q = normal_matrix<Scalar>(n, d, rng);
  in.k = normal_matrix<Scalar>(n, d, rng);
  in.v = normal_matrix<Scalar>(n, d, rng);
  in.d_out = normal_matrix<Scalar>(n, d, rng);
  return in;
}

// Returns a checksum so the optimizer cannot drop the call.
template <typename Scalar>
double run_once(const VariantInfo& info, const Inputs<Scalar>& in, BenchMode mode) {
  const Index n = in.q.rows();
  const AttentionConfig cos_config = AttentionConfig::cosformer(n, info.causal);
  AttentionConfig plain;
  plain.causal = info.causal;
  const bool train = mode == BenchMode::train;
  switch (info.family) {
    case VariantInfo::Family::cosformer: {
      double sum = cosformer_attention(in.q, in.k, in.v, cos_config)(0, 0);
      if (train) sum += cosformer_backward(in.q, in.k, in.v, cos_config, in.d_out).dq(0, 0);
      return sum;
    }
    case VariantInfo::Family::linear: {
      double sum = linear_attention(in.q, in.k, in.v, plain.feature_map, info.causal)(0, 0);
      if (train) {
        sum += linear_attention_backward(in.q, in.k, in.v, plain.feature_map, info.causal, plain.eps, in.d_out)
                   .dq(0, 0);
      }
      return sum;
    }
    case VariantInfo::Family::softmax: {
      double sum = softmax_attention(in.q, in.k, in.v, info.causal, true)(0, 0);
      if (train) sum += softmax_attention_backward(in.q, in.k, in.v, info.causal, true, in.d_out).dq(0, 0);
      return sum;
    }
    case VariantInfo::Family::kernel_quadratic:
      return kernel_attention_quadratic(in.q, in.k, in.v, cos_config)(0, 0);
  }
  return 0.0;
}

template <typename Scalar>
void time_cell(const VariantInfo& info, const Inputs<Scalar>& in, const BenchmarkOptions& options,
               BenchmarkRecord& record) {
  using Clock = std::chrono::steady_clock;
  volatile double sink = run_once(info, in, options.mode);  // warm-up
  std::vector<double> seconds;
  for (Index r = 0; r < options.repeats; ++r) {
    const auto start = Clock::now();
    sink = sink + run_once(info, in, options.mode);
    seconds.push_back(std::chrono::duration<double>(Clock::now() - start).count());
  }
  const double mean = std::accumulate(seconds.begin(), seconds.end(), 0.0) / static_cast<double>(seconds.size());
  double var = 0.0;
  for (double s : seconds) var += (s - mean) * (s - mean);
  var /= static_cast<double>(seconds.size() - 1);
  std::vector<double> sorted = seconds;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  record.mean_seconds = mean;
  record.std_seconds = std::sqrt(var);
  record.median_seconds = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
}

}  // namespace

BenchMode parse_bench_mode(const std::string& name) {
  if (name == "inference") return BenchMode::inference;
  if (name == "train") return BenchMode::train;
  throw UsageError("unknown benchmark mode '" + name + "' (inference, train)");
}

std::string to_string(BenchMode mode) { return mode == BenchMode::train ? "train" : "inference"; }

const std::vector<std::string>& benchmark_variants() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& s : variant_table()) out.push_back(s.name);
    return out;
  }();
  return names;
}

std::uint64_t transient_scalars(const std::string& variant, Index n_in, Index d_in, BenchMode mode,
                                Precision precision) {
  const VariantInfo& info = find_variant(variant);
  const std::uint64_t n = static_cast<std::uint64_t>(n_in);
  const std::uint64_t d = static_cast<std::uint64_t>(d_in);
  const bool narrow = precision == Precision::standard;
  const bool train = mode == BenchMode::train;
  switch (info.family) {
    case VariantInfo::Family::cosformer:
    case VariantInfo::Family::linear: {
      // output n*d; two d x d and two d accumulators; kp, qp and numerator rows.
      std::uint64_t total = n * d + 2 * d * d + 2 * d + 3 * d;
      if (train) {
        const std::uint64_t branches = info.family == VariantInfo::Family::cosformer ? 2 : 1;
        // phi(Q), phi(K), V and upstream copies, d_num, dphi(Q), dphi(K), dV,
        // dQ, dK and the two derivative masks: 12 n x d. d_den: n. Forward
        // sums s, t and key-pass sums u, w per branch.
        total += 12 * n * d + n + branches * 2 * (d * d + d) + (narrow ? 3 * n * d : 0);
      }
      return total;
    }
    case VariantInfo::Family::softmax: {
      // weights n x n, output n x d; narrow inputs add Q, K, V casts and an accumulated output.
      std::uint64_t total = n * n + n * d + (narrow ? 4 * n * d : 0);
      if (train) {
        // logits, P, dP, dS: 4 n x n. Q, K, upstream, V copies, dV, dQ, dK: 7 n x d. Row inner products: n.
        total += 4 * n * n + 7 * n * d + n + (narrow ? 3 * n * d : 0);
      }
      return total;
    }
    case VariantInfo::Family::kernel_quadratic: {
      if (train) throw UsageError("kernel_quadratic has no backward pass; use inference mode");
      // phi(Q), phi(K), weights, output.
      return 2 * n * d + n * n + n * d + (narrow ? 2 * n * d : 0);
    }
  }
  return 0;
}

std::vector<BenchmarkRecord> run_benchmark(const BenchmarkOptions& options) {
  if (options.variants.empty()) throw UsageError("no benchmark variants given");
  if (options.lengths.empty()) throw UsageError("no sequence lengths given");
  if (!std::is_sorted(options.lengths.begin(), options.lengths.end())) {
    throw UsageError("sequence lengths must be sorted ascending");
  }
  if (options.lengths.front() < 1 || options.d_model < 1) throw UsageError("lengths and d_model must be >= 1");
  if (options.repeats < 3) throw UsageError("repeats must be >= 3");
  if (options.precision == Precision::both) throw UsageError("benchmark precision must be standard or wide");
  for (const auto& name : options.variants) {
    transient_scalars(name, 1, 1, options.mode);  // validates name and mode
  }

  std::vector<BenchmarkRecord> records;
  for (const auto& name : options.variants) {
    const VariantInfo& info = find_variant(name);
    for (Index n : options.lengths) {
      BenchmarkRecord record;
      record.variant = name;
      record.seq_len = n;
      record.d_model = options.d_model;
      record.repeats = options.repeats;
      record.mode = options.mode;
      record.transient_scalars = transient_scalars(name, n, options.d_model, options.mode, options.precision);
      if (record.transient_scalars > options.memory_budget_scalars) {
        record.failed = true;
        records.push_back(record);
        continue;
      }
      try {
        if (options.precision == Precision::standard) {
          time_cell(info, make_inputs<float>(options.seed, n, options.d_model), options, record);
        } else {
          time_cell(info, make_inputs<double>(options.seed, n, options.d_model), options, record);
        }
      } catch (const std::bad_alloc&) {
        record.failed = true;
      }
      records.push_back(record);
    }
  }
  return records;
}

void write_benchmark_csv(const std::vector<BenchmarkRecord>& records, std::ostream& out) {
  out << "variant,seq_len,d_model,repeats,mean_s,std_s,median_s,transient_scalars,mode\n";
  out << std::setprecision(9);
  for (const auto& r : records) {
    out << r.variant << ',' << r.seq_len << ',' << r.d_model << ',' << r.repeats << ',';
    if (r.failed) {
      out << "oom,oom,oom,";
    } else {
      out << r.mean_seconds << ',' << r.std_seconds << ',' << r.median_seconds << ',';
    }
    out << r.transient_scalars << ',' << to_string(r.mode) << '\n';
  }
}

}  // namespace cosformer
