// SPDX-License-Identifier: Apache-2.0
#include "cosformer/train.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

namespace cosformer {

namespace {

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kEvalStream = 2;

AccumMatrix normal(Index rows, Index cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  AccumMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

void check_options(const TrainOptions& o) {
  if (o.vocab < 2 || o.copy_len < 1 || o.d_model < 2 || o.d_head < 1 || o.d_ff < 1) {
    throw ConfigError("copy task needs vocab >= 2, copy_len >= 1, d_model >= 2 and positive widths");
  }
  if (o.steps < 0 || o.batch < 1 || o.log_every < 1 || o.eval_sequences < 1) {
    throw ConfigError("steps must be >= 0; batch, log_every and eval_sequences >= 1");
  }
  if (!(o.lr > 0.0) || !(o.beta1 >= 0.0 && o.beta1 < 1.0) || !(o.beta2 >= 0.0 && o.beta2 < 1.0) ||
      !(o.adam_eps > 0.0)) {
    throw ConfigError("invalid optimizer settings");
  }
}

AttentionConfig causal_variant(AttentionConfig config, Index seq_len) {
  config.causal = true;
  validate(config, seq_len, seq_len);
  return config;
}

struct Forward {
  AccumMatrix x;       // embedded inputs, stacked
  BlockCache block;
  AccumMatrix z;       // block outputs at scored rows
  AccumMatrix probs;   // softmax over vocab at scored rows
  std::vector<Index> scored_rows;
  std::vector<int> targets;
};

Forward run_forward(const BlockParams<double>& p, const Matrix<int>& tokens, const AccumMatrix& positions,
                    const AttentionConfig& config, const TrainOptions& o) {
  const Index n = o.seq_len();
  const Index count = tokens.rows();
  Forward f;
  f.x.resize(count * n, o.d_model);
  for (Index s = 0; s < count; ++s)
    for (Index t = 0; t < n; ++t) f.x.row(s * n + t) = p.embedding.row(tokens(s, t)) + positions.row(t);
  f.block = block_forward_cached(f.x, n, p, config);

  // Positions copy_len .. 2*copy_len - 1 predict the copied tokens after them.
  for (Index s = 0; s < count; ++s) {
    for (Index t = o.copy_len; t < 2 * o.copy_len; ++t) {
      f.scored_rows.push_back(s * n + t);
      f.targets.push_back(tokens(s, t + 1));
    }
  }
  const Index rows = static_cast<Index>(f.scored_rows.size());
  f.z.resize(rows, o.d_model);
  for (Index r = 0; r < rows; ++r) f.z.row(r) = f.block.out.row(f.scored_rows[static_cast<std::size_t>(r)]);
  f.probs = f.z * p.w_out;
  for (Index r = 0; r < rows; ++r) {
    auto row = f.probs.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return f;
}

double mean_loss(const Forward& f) {
  double total = 0.0;
  for (std::size_t r = 0; r < f.targets.size(); ++r) {
    total -= std::log(f.probs(static_cast<Index>(r), f.targets[r]));
  }
  return total / static_cast<double>(f.targets.size());
}

BlockParams<double> gradients(const BlockParams<double>& p, const Matrix<int>& tokens, const Forward& f,
                              const AttentionConfig& config, const TrainOptions& o) {
  const Index rows = f.probs.rows();
  AccumMatrix d_logits = f.probs;
  for (Index r = 0; r < rows; ++r) d_logits(r, f.targets[static_cast<std::size_t>(r)]) -= 1.0;
  d_logits /= static_cast<double>(rows);

  const AccumMatrix dz = d_logits * p.w_out.transpose();
  AccumMatrix d_out = AccumMatrix::Zero(f.block.out.rows(), f.block.out.cols());
  for (Index r = 0; r < rows; ++r) d_out.row(f.scored_rows[static_cast<std::size_t>(r)]) = dz.row(r);

  BlockGradients g = block_backward(f.block, p, config, d_out);
  g.params.w_out = f.z.transpose() * d_logits;
  g.params.embedding = AccumMatrix::Zero(p.vocab(), p.d_model());
  const Index n = o.seq_len();
  for (Index s = 0; s < tokens.rows(); ++s)
    for (Index t = 0; t < n; ++t) g.params.embedding.row(tokens(s, t)) += g.dx.row(s * n + t);
  return g.params;
}

BlockParams<double> zeros_like(const BlockParams<double>& p) {
  return BlockParams<double>::zeros(p.d_model(), p.d_head(), p.d_ff(), p.vocab());
}

}  // namespace

bool operator==(const TrainReport& a, const TrainReport& b) {
  return a.steps == b.steps && a.initial_loss == b.initial_loss && a.final_loss == b.final_loss &&
         a.token_accuracy == b.token_accuracy && a.loss_curve == b.loss_curve;
}

BlockParams<double> init_copy_params(const TrainOptions& o, std::uint64_t seed) {
  check_options(o);
  std::seed_seq seq{seed, kInitStream};
  std::mt19937_64 rng(seq);
  const double fan_in = 1.0 / std::sqrt(static_cast<double>(o.d_model));
  BlockParams<double> p;
  p.embedding = normal(o.vocab, o.d_model, 1.0, rng);
  p.w_q = normal(o.d_model, o.d_head, fan_in, rng);
  p.w_k = normal(o.d_model, o.d_head, fan_in, rng);
  p.w_v = normal(o.d_model, o.d_model, fan_in, rng);
  p.w_ff1 = normal(o.d_model, o.d_ff, fan_in, rng);
  // Small second layer and output head keep the untrained model near uniform.
  p.w_ff2 = normal(o.d_ff, o.d_model, 0.1 / std::sqrt(static_cast<double>(o.d_ff)), rng);
  p.w_out = normal(o.d_model, o.vocab, 0.02, rng);
  return p;
}

Matrix<int> make_copy_batch(const TrainOptions& o, Index count, std::uint64_t seed, std::uint64_t stream) {
  check_options(o);
  std::seed_seq seq{seed, stream};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<int> token(1, static_cast<int>(o.vocab) - 1);
  Matrix<int> batch(count, o.seq_len());
  for (Index s = 0; s < count; ++s) {
    for (Index t = 0; t < o.copy_len; ++t) {
      const int v = token(rng);
      batch(s, t) = v;
      batch(s, o.copy_len + 1 + t) = v;
    }
    batch(s, o.copy_len) = 0;
  }
  return batch;
}

std::pair<double, double> evaluate_copy(const BlockParams<double>& params, const Matrix<int>& tokens,
                                        const AttentionConfig& config, const TrainOptions& o) {
  check_options(o);
  validate(params, true);
  if (tokens.cols() != o.seq_len() || tokens.rows() < 1) throw DimensionError("token batch has the wrong shape");
  const AttentionConfig cfg = causal_variant(config, o.seq_len());
  const Forward f = run_forward(params, tokens, sinusoidal_positions(o.seq_len(), o.d_model, o.position_base), cfg, o);
  Index correct = 0;
  for (Index r = 0; r < f.probs.rows(); ++r) {
    Index best = 0;
    f.probs.row(r).maxCoeff(&best);
    if (best == f.targets[static_cast<std::size_t>(r)]) ++correct;
  }
  return {mean_loss(f), static_cast<double>(correct) / static_cast<double>(f.probs.rows())};
}

TrainReport train_copy_task(const AttentionConfig& config, std::uint64_t seed, const TrainOptions& o) {
  check_options(o);
  const AttentionConfig cfg = causal_variant(config, o.seq_len());
  const AccumMatrix positions = sinusoidal_positions(o.seq_len(), o.d_model, o.position_base);

  BlockParams<double> p = init_copy_params(o, seed);
  BlockParams<double> m = zeros_like(p);
  BlockParams<double> v = zeros_like(p);

  std::seed_seq seq{seed, kTrainStream};
  std::mt19937_64 batch_rng(seq);

  TrainReport report;
  for (Index step = 0; step < o.steps; ++step) {
    const Matrix<int> tokens = make_copy_batch(o, o.batch, batch_rng(), kTrainStream);
    const Forward f = run_forward(p, tokens, positions, cfg, o);
    const double loss = mean_loss(f);
    if (step == 0) report.initial_loss = loss;
    if (step % o.log_every == 0) report.loss_curve.emplace_back(step, loss);

    BlockParams<double> g = gradients(p, tokens, f, cfg, o);
    const double t = static_cast<double>(step + 1);
    const double c1 = 1.0 - std::pow(o.beta1, t);
    const double c2 = 1.0 - std::pow(o.beta2, t);
    auto update = [&](AccumMatrix& w, AccumMatrix& mw, AccumMatrix& vw, const AccumMatrix& gw) {
      mw = o.beta1 * mw + (1.0 - o.beta1) * gw;
      vw = o.beta2 * vw + (1.0 - o.beta2) * gw.cwiseAbs2();
      w.array() -= o.lr * (mw.array() / c1) / ((vw.array() / c2).sqrt() + o.adam_eps);
    };
    update(p.w_q, m.w_q, v.w_q, g.w_q);
    update(p.w_k, m.w_k, v.w_k, g.w_k);
    update(p.w_v, m.w_v, v.w_v, g.w_v);
    update(p.w_ff1, m.w_ff1, v.w_ff1, g.w_ff1);
    update(p.w_ff2, m.w_ff2, v.w_ff2, g.w_ff2);
    update(p.embedding, m.embedding, v.embedding, g.embedding);
    update(p.w_out, m.w_out, v.w_out, g.w_out);
  }
  report.steps = o.steps;

  const Matrix<int> held_out = make_copy_batch(o, o.eval_sequences, seed, kEvalStream);
  const auto [loss, accuracy] = evaluate_copy(p, held_out, cfg, o);
  if (o.steps == 0) report.initial_loss = loss;
  report.final_loss = loss;
  report.token_accuracy = accuracy;
  return report;
}

void write_loss_csv(const TrainReport& report, std::ostream& out) {
  out << "step,loss\n" << std::setprecision(10);
  for (const auto& [step, loss] : report.loss_curve) out << step << ',' << loss << '\n';
}

void write_summary(const TrainReport& report, std::ostream& out) {
  out << std::setprecision(6) << "steps=" << report.steps << " initial_loss=" << report.initial_loss
      << " final_loss=" << report.final_loss << " token_accuracy=" << report.token_accuracy << '\n';
}

}  // namespace cosformer
