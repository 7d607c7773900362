// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_TRAIN_HPP_
#define COSFORMER_TRAIN_HPP_

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "cosformer/transformer.hpp"
#include "cosformer/types.hpp"

namespace cosformer {

// Copy task: tokens s_1..s_L, delimiter 0, then s_1..s_L again. The model is
// scored on predicting the second copy from the positions before it.
struct TrainOptions {
  Index vocab = 16;
  Index copy_len = 16;
  Index d_model = 32;
  Index d_head = 128;
  Index d_ff = 128;
  Index steps = 2000;
  Index batch = 32;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-8;
  double position_base = 30.0;
  Index log_every = 10;
  Index eval_sequences = 512;

  Index seq_len() const { return 2 * copy_len + 1; }
};

struct TrainReport {
  Index steps = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;      // held-out cross-entropy after the last step
  double token_accuracy = 0.0;  // held-out, copied half only
  std::vector<std::pair<Index, double>> loss_curve;  // (step, training-batch loss)
};

bool operator==(const TrainReport& a, const TrainReport& b);

/// Random initial parameters for the copy-task model.
BlockParams<double> init_copy_params(const TrainOptions& options, std::uint64_t seed);

/// `count` copy-task sequences, one per row.
Matrix<int> make_copy_batch(const TrainOptions& options, Index count, std::uint64_t seed, std::uint64_t stream);

/// Mean cross-entropy and argmax accuracy of `params` on the copied half of `tokens`.
std::pair<double, double> evaluate_copy(const BlockParams<double>& params, const Matrix<int>& tokens,
                                        const AttentionConfig& config, const TrainOptions& options);

/// Trains the one-block causal model with Adam. The attention variant is taken
/// from `config` with causal forced on. Deterministic for a given seed.
TrainReport train_copy_task(const AttentionConfig& config, std::uint64_t seed, const TrainOptions& options = {});

void write_loss_csv(const TrainReport& report, std::ostream& out);
void write_summary(const TrainReport& report, std::ostream& out);

}  // namespace cosformer

#endif  // COSFORMER_TRAIN_HPP_
