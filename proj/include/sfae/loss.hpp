#pragma once

#include "sfae/model.hpp"

namespace sfae {

struct Hyperparams {
  double sparsity_weight = 0.5;  // L1 coefficient on hidden activations
  double slowness_weight = 1.0;  // coefficient on pooled-difference penalty
  double margin = 1.0;           // hinge margin for non-neighbor pairs
  double norm_order = 2.0;       // p of the group norm; gradients require p = 2
  double eps = 1e-8;             // guard for norm denominators
  double learning_rate = 0.05;
  double momentum = 0.9;
};

// Two frames of one sequence plus their temporal gap |t - t'| >= 1.
struct FramePair {
  std::vector<double> frame_a;
  std::vector<double> frame_b;
  std::size_t temporal_gap = 1;
};

struct LossBreakdown {
  double recon = 0.0;        // sum over both frames of ||decoded - x||^2
  double sparsity = 0.0;     // weighted L1 of hidden activations, both frames
  double slowness = 0.0;     // weighted sum_i |z_a,i - z_b,i|
  double contrastive = 0.0;  // hinge objective value (contrastive mode only)
  double total = 0.0;
};

struct Gradients {
  Matrix d_encoder;  // same shape as ModelParams::encoder
  Matrix d_decoder;  // same shape as ModelParams::decoder
};

// Neighbor pairs (gap 1) pay the feature distance itself; non-neighbors pay
// the margin hinge max(0, m - dist). Distance is the norm_order norm.
double drlim_loss(const std::vector<double>& pooled_a, const std::vector<double>& pooled_b,
                  std::size_t temporal_gap, const Hyperparams& hyper);

// Reconstruction + L1 + pooled-slowness objective over one frame pair, with
// the components reported separately.
LossBreakdown full_loss(const FramePair& pair, const ModelParams& params,
                        const Hyperparams& hyper);

// Analytic gradient of full_loss with the two branches sharing one weight
// set. Rectifier gates gradients to active units; sign(0) = 0 for both the
// L1 term and the pooled-difference term; pooled-norm denominators are
// guarded by max(z, eps). Rejects norm_order != 2.
Gradients backward(const FramePair& pair, const ModelParams& params, const Hyperparams& hyper);

// Encoder-only gradient of drlim_loss through the pooled output; the decoder
// gradient stays zero and the inactive hinge region contributes nothing.
Gradients drlim_backward(const FramePair& pair, const ModelParams& params,
                         const Hyperparams& hyper);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t excluded = 0;  // coordinates too close to a kink for finite differences
};

// Central-finite-difference verification of backward over every parameter
// coordinate. Encoder coordinates whose unit sits within 10*step of a
// rectifier kink, or whose group's pooled difference is within 10*step of a
// sign flip, are excluded and counted. Relative error per coordinate is
// |a - f| / max(|a|, |f|, floor) with floor = 1e-6 * max(1, ||f||_inf).
GradCheckResult grad_check(const ModelParams& params, const FramePair& pair,
                           const Hyperparams& hyper, double step);

}  // namespace sfae
