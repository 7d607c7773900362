// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <sstream>

#include "cosformer/benchmark.hpp"

using namespace cosformer;

TEST(Benchmark, TransientCountsFollowTheBufferFormulas) {
  const std::uint64_t n = 1024, d = 64;
  EXPECT_EQ(transient_scalars("softmax", 1024, 64, BenchMode::inference), n * n + n * d);
  EXPECT_EQ(transient_scalars("kernel_quadratic", 1024, 64, BenchMode::inference), n * n + 3 * n * d);
  EXPECT_EQ(transient_scalars("cosformer", 1024, 64, BenchMode::inference), n * d + 2 * d * d + 5 * d);
  EXPECT_GE(transient_scalars("softmax", 1024, 64, BenchMode::inference),
            10 * transient_scalars("cosformer", 1024, 64, BenchMode::inference));
  EXPECT_GT(transient_scalars("cosformer", 1024, 64, BenchMode::train),
            transient_scalars("cosformer", 1024, 64, BenchMode::inference));
}

TEST(Benchmark, LinearVariantsGrowLinearly) {
  for (const char* v : {"cosformer", "cosformer_causal", "linear"}) {
    const auto a = transient_scalars(v, 1000, 16, BenchMode::inference);
    const auto b = transient_scalars(v, 2000, 16, BenchMode::inference);
    EXPECT_LT(static_cast<double>(b) / static_cast<double>(a), 2.0) << v;
  }
  const auto a = transient_scalars("softmax", 1000, 16, BenchMode::train);
  const auto b = transient_scalars("softmax", 2000, 16, BenchMode::train);
  EXPECT_GT(static_cast<double>(b) / static_cast<double>(a), 3.5);
}

TEST(Benchmark, RunsAndWritesCsv) {
  BenchmarkOptions o;
  o.variants = {"cosformer", "softmax_causal", "kernel_quadratic"};
  o.lengths = {8, 16};
  o.d_model = 4;
  o.repeats = 3;
  const auto records = run_benchmark(o);
  ASSERT_EQ(records.size(), 6u);
  for (const auto& r : records) {
    EXPECT_FALSE(r.failed);
    EXPECT_GT(r.mean_seconds, 0.0);
    EXPECT_GE(r.std_seconds, 0.0);
    EXPECT_GT(r.transient_scalars, 0u);
  }
  std::ostringstream out;
  write_benchmark_csv(records, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "variant,seq_len,d_model,repeats,mean_s,std_s,median_s,transient_scalars,mode");
}

TEST(Benchmark, TrainModeAndStandardPrecision) {
  BenchmarkOptions o;
  o.variants = {"cosformer_causal", "linear", "softmax"};
  o.lengths = {8};
  o.d_model = 4;
  o.repeats = 3;
  o.mode = BenchMode::train;
  o.precision = Precision::standard;
  for (const auto& r : run_benchmark(o)) EXPECT_FALSE(r.failed) << r.variant;
}

TEST(Benchmark, OverBudgetCellIsMarkedFailed) {
  BenchmarkOptions o;
  o.variants = {"softmax", "cosformer"};
  o.lengths = {64};
  o.d_model = 4;
  o.repeats = 3;
  o.memory_budget_scalars = 2000;
  const auto records = run_benchmark(o);
  EXPECT_TRUE(records[0].failed);
  EXPECT_FALSE(records[1].failed);
  std::ostringstream out;
  write_benchmark_csv(records, out);
  EXPECT_NE(out.str().find("softmax,64,4,3,oom,oom,oom"), std::string::npos);
}

TEST(Benchmark, RejectsBadOptions) {
  BenchmarkOptions o;
  o.lengths = {16, 8};
  EXPECT_THROW(run_benchmark(o), UsageError);
  o.lengths = {8};
  o.repeats = 2;
  EXPECT_THROW(run_benchmark(o), UsageError);
  o.repeats = 3;
  o.variants = {"performer"};
  EXPECT_THROW(run_benchmark(o), UsageError);
  o.variants = {"kernel_quadratic"};
  o.mode = BenchMode::train;
  EXPECT_THROW(run_benchmark(o), UsageError);
  EXPECT_THROW(parse_bench_mode("eval"), UsageError);
}
