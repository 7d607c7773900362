// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_BENCHMARK_HPP_
#define COSFORMER_BENCHMARK_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cosformer/equivalence.hpp"
#include "cosformer/types.hpp"

namespace cosformer {

enum class BenchMode { inference, train };

BenchMode parse_bench_mode(const std::string& name);
std::string to_string(BenchMode mode);

/// Variant names accepted by run_benchmark.
const std::vector<std::string>& benchmark_variants();

struct BenchmarkOptions {
  std::vector<std::string> variants{"cosformer", "softmax"};
  std::vector<Index> lengths{1024, 2048, 4096};
  Index d_model = 64;
  Index repeats = 5;
  BenchMode mode = BenchMode::inference;
  Precision precision = Precision::wide;
  std::uint64_t seed = 0;
  // Cells whose analytic footprint exceeds this many scalars are recorded as
  // failed without running, the way an out-of-memory run would be.
  std::uint64_t memory_budget_scalars = std::uint64_t{1} << 29;
};

struct BenchmarkRecord {
  std::string variant;
  Index seq_len = 0;
  Index d_model = 0;
  Index repeats = 0;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;
  double median_seconds = 0.0;
  std::uint64_t transient_scalars = 0;
  BenchMode mode = BenchMode::inference;
  bool failed = false;
};

/// Peak scalars held by the buffers one attention call allocates, counted from
/// the implementation (outputs included, inputs excluded).
std::uint64_t transient_scalars(const std::string& variant, Index n, Index d, BenchMode mode,
                                Precision precision = Precision::wide);

/// Times every (variant, length) cell: one warm-up call, then `repeats` timed
/// calls on inputs drawn from `seed` (identical across variants).
std::vector<BenchmarkRecord> run_benchmark(const BenchmarkOptions& options);

void write_benchmark_csv(const std::vector<BenchmarkRecord>& records, std::ostream& out);

}  // namespace cosformer

#endif  // COSFORMER_BENCHMARK_HPP_
