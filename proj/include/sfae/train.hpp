#pragma once

#include <stdexcept>

#include "sfae/data.hpp"

namespace sfae {

// Raised when optimization produces non-finite values.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Objective { full, drlim };

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t pairs_per_epoch = 256;
  std::size_t batch_size = 16;
  Hyperparams hyper;
  Objective objective = Objective::full;
  double neighbor_prob = 0.5;
  std::uint32_t seed = 0;
  std::string checkpoint_path;  // written after each epoch when non-empty
  // Model shape; the trainer builds the encoder and decoder itself.
  std::size_t num_hidden = 64;
  std::size_t group_size = 4;
  std::size_t stride = 2;
};

struct EpochStats {
  LossBreakdown mean_loss;
  double mean_sparsity = 0.0;  // fraction of exactly-zero hidden units
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  double wall_seconds = 0.0;
};

struct OptimizerState {
  Matrix encoder_velocity;
  Matrix decoder_velocity;
};

// v <- momentum * v - lr * g; w <- w + v. Rejects non-finite gradients,
// reporting the offending coordinate.
void sgd_step(ModelParams& params, const Gradients& grads, OptimizerState& state,
              const Hyperparams& hyper);

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

// Minibatched SGD over sampled frame pairs. Expects a normalized sequence.
// Fully deterministic given config.seed. Aborts with numeric_error when the
// loss becomes non-finite; the checkpoint from the last completed epoch, if
// any, stays on disk.
TrainResult train(const FrameSequence& seq, const TrainConfig& config);

void save_checkpoint(const ModelParams& params, const Hyperparams& hyper,
                     const std::string& path);

struct Checkpoint {
  ModelParams params;
  Hyperparams hyper;
};

Checkpoint load_checkpoint(const std::string& path);

// Least-squares refit of the decoder on the hidden codes of a sequence,
// leaving the encoder untouched.
Matrix fit_linear_decoder(const FrameSequence& seq, const ModelParams& params);

}  // namespace sfae
