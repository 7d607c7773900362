// SPDX-License-Identifier: Apache-2.0
// Command-line front end: equivalence suite, scaling benchmark, coverage
// heatmaps and the copy-task trainer.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cosformer/benchmark.hpp"
#include "cosformer/cosformer.hpp"
#include "cosformer/equivalence.hpp"
#include "cosformer/matrix_io.hpp"
#include "cosformer/train.hpp"
#include "cosformer/visualize.hpp"

namespace {

using namespace cosformer;

enum Exit { kOk = 0, kSuiteFailure = 1, kUsage = 2, kIo = 3 };

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  std::string precision;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--out", c.out, "CSV output path");
  cmd->add_option("--precision", c.precision, "standard (float) or wide (double)")
      ->check(CLI::IsMember({"standard", "wide"}));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  return file;
}

int run_check(const Common& c, Index trials, const std::string& mutation, unsigned threads) {
  EquivalenceOptions options;
  options.seed = c.seed;
  options.trials = trials;
  options.mutation = parse_mutation(mutation);
  options.threads = threads;
  if (!c.precision.empty()) options.precision = parse_precision(c.precision);
  if (trials < 1) throw UsageError("--trials must be >= 1");
  const EquivalenceReport report = run_equivalence_suite(options);
  print_report(report, std::cout);
  if (!c.out.empty()) {
    std::ofstream file = open_out(c.out);
    write_report_csv(report, file);
  }
  return report.passed() ? kOk : kSuiteFailure;
}

int run_bench(const Common& c, BenchmarkOptions options, const std::string& mode) {
  options.seed = c.seed;
  options.mode = parse_bench_mode(mode);
  options.precision = c.precision.empty() ? Precision::wide : parse_precision(c.precision);
  const auto records = run_benchmark(options);
  if (c.out.empty()) {
    write_benchmark_csv(records, std::cout);
  } else {
    std::ofstream file = open_out(c.out);
    write_benchmark_csv(records, file);
    std::cout << "wrote " << records.size() << " rows to " << c.out << '\n';
  }
  return kOk;
}

// Attention matrices for random inputs, so viz works without input files.
std::vector<AccumMatrix> generate_matrices(const Common& c, Index count, Index length, Index dim,
                                           const std::string& variant) {
  if (count < 1 || length < 1 || dim < 1) throw UsageError("--generate, --length and --dim must be >= 1");
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<AccumMatrix> out;
  for (Index i = 0; i < count; ++i) {
    AccumMatrix q(length, dim);
    AccumMatrix k(length, dim);
    for (Index r = 0; r < length; ++r) {
      for (Index j = 0; j < dim; ++j) q(r, j) = normal(rng);
      for (Index j = 0; j < dim; ++j) k(r, j) = normal(rng);
    }
    if (variant == "softmax") {
      AccumMatrix w = q * k.transpose() / std::sqrt(static_cast<double>(dim));
      for (Index r = 0; r < length; ++r) {
        w.row(r).array() -= w.row(r).maxCoeff();
        w.row(r) = w.row(r).array().exp().matrix();
        w.row(r) /= w.row(r).sum();
      }
      out.push_back(w);
    } else if (variant == "cosformer") {
      out.push_back(attention_weights_quadratic(q, k, AttentionConfig::cosformer(length)));
    } else if (variant == "linear") {
      out.push_back(attention_weights_quadratic(q, k, AttentionConfig{}));
    } else {
      throw UsageError("unknown --variant '" + variant + "' (cosformer, linear, softmax)");
    }
  }
  return out;
}

int run_viz(const Common& c, const std::vector<std::string>& inputs, double threshold, const std::string& pgm,
            Index generate, Index length, Index dim, const std::string& variant) {
  if (!c.precision.empty() && c.precision != "wide") {
    throw UsageError("viz reads and writes wide precision only");
  }
  if (inputs.empty() == (generate == 0)) throw UsageError("give matrix files or --generate N (not both)");
  std::vector<AccumMatrix> matrices;
  if (generate > 0) {
    matrices = generate_matrices(c, generate, length, dim, variant);
  } else {
    for (const auto& path : inputs) matrices.push_back(read_matrix(path));
  }
  const CoverageMatrix coverage = visualize_attention(matrices, threshold);
  if (!pgm.empty()) write_pgm(coverage, pgm);
  if (!c.out.empty()) write_matrix(coverage.values, c.out);
  std::cout << "coverage " << coverage.size() << "x" << coverage.size() << " over " << coverage.n_matrices
            << " matrices, threshold " << threshold << ", mean " << coverage.values.mean() << '\n';
  return kOk;
}

int run_train(const Common& c, const std::string& variant, TrainOptions options, double min_accuracy) {
  if (!c.precision.empty() && c.precision != "wide") {
    throw UsageError("train-toy runs in wide precision only");
  }
  AttentionConfig config;
  if (variant == "cosformer") {
    config = AttentionConfig::cosformer(options.seq_len(), true);
  } else if (variant == "softmax") {
    config = AttentionConfig::softmax(true);
  } else if (variant == "linear") {
    config.causal = true;
  } else {
    throw UsageError("unknown --variant '" + variant + "' (cosformer, linear, softmax)");
  }
  const TrainReport report = train_copy_task(config, c.seed, options);
  write_summary(report, std::cout);
  if (!c.out.empty()) {
    std::ofstream file = open_out(c.out);
    write_loss_csv(report, file);
  }
  return report.token_accuracy >= min_accuracy ? kOk : kSuiteFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cosformer: linear attention with cosine re-weighting"};
  app.require_subcommand(1);

  Common check_common;
  Index trials = 1000;
  std::string mutation = "none";
  unsigned threads = 1;
  auto* check = app.add_subcommand("check", "randomized linear-vs-quadratic equivalence suite");
  add_common(check, check_common);
  check->add_option("--trials", trials)->capture_default_str();
  check->add_option("--mutation", mutation, "none, position-off-by-one, drop-sin, no-floor")->capture_default_str();
  check->add_option("--threads", threads, "parallel trials (results do not depend on it)")->capture_default_str();

  Common bench_common;
  BenchmarkOptions bench_options;
  std::string bench_mode = "inference";
  auto* bench = app.add_subcommand("bench", "time and memory scaling benchmark");
  add_common(bench, bench_common);
  bench->add_option("--variants", bench_options.variants)->delimiter(',')->capture_default_str();
  bench->add_option("--lengths", bench_options.lengths)->delimiter(',')->capture_default_str();
  bench->add_option("--d-model", bench_options.d_model)->capture_default_str();
  bench->add_option("--repeats", bench_options.repeats)->capture_default_str();
  bench->add_option("--mode", bench_mode, "inference or train")->capture_default_str();
  bench->add_option("--budget", bench_options.memory_budget_scalars, "scalar budget per cell")
      ->capture_default_str();

  Common viz_common;
  std::vector<std::string> viz_inputs;
  double threshold = 0.9;
  std::string pgm;
  Index generate = 0;
  Index viz_length = 64;
  Index viz_dim = 16;
  std::string viz_variant = "cosformer";
  auto* viz = app.add_subcommand("viz", "attention coverage heatmap");
  add_common(viz, viz_common);
  viz->add_option("inputs", viz_inputs, "row-stochastic matrix files");
  viz->add_option("--threshold", threshold)->capture_default_str();
  viz->add_option("--pgm", pgm, "PGM heatmap output path");
  viz->add_option("--generate", generate, "use N random attention matrices instead of files");
  viz->add_option("--length", viz_length)->capture_default_str();
  viz->add_option("--dim", viz_dim)->capture_default_str();
  viz->add_option("--variant", viz_variant, "cosformer, linear or softmax")->capture_default_str();

  Common train_common;
  TrainOptions train_options;
  std::string train_variant = "cosformer";
  double min_accuracy = 0.0;
  auto* train = app.add_subcommand("train-toy", "train one causal block on the copy task");
  add_common(train, train_common);
  train->add_option("--variant", train_variant, "cosformer, linear or softmax")->capture_default_str();
  train->add_option("--steps", train_options.steps)->capture_default_str();
  train->add_option("--batch", train_options.batch)->capture_default_str();
  train->add_option("--log-every", train_options.log_every)->capture_default_str();
  train->add_option("--min-accuracy", min_accuracy, "exit 1 below this held-out accuracy")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (check->parsed()) return run_check(check_common, trials, mutation, threads);
    if (bench->parsed()) return run_bench(bench_common, bench_options, bench_mode);
    if (viz->parsed()) {
      return run_viz(viz_common, viz_inputs, threshold, pgm, generate, viz_length, viz_dim, viz_variant);
    }
    if (train->parsed()) return run_train(train_common, train_variant, train_options, min_accuracy);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kIo;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
