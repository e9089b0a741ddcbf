#include "sfae/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sfae {

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Forward state of one branch, kept around for backprop.
struct Branch {
  std::vector<double> pre;     // encoder output before rectification
  std::vector<double> hidden;  // rectified
  std::vector<double> pooled;  // group norms
};

Branch run_branch(const std::vector<double>& x, const ModelParams& params, double order) {
  Branch b;
  b.pre = matvec(params.encoder, homogeneous_input(x));
  b.hidden = b.pre;
  for (double& h : b.hidden) h = h > 0.0 ? h : 0.0;
  b.pooled = pool_groups(b.hidden, params.topology, order);
  return b;
}

void check_pair(const FramePair& pair, const ModelParams& params) {
  if (pair.frame_a.size() != pair.frame_b.size()) {
    throw std::invalid_argument("frame pair: frames have lengths " +
                                std::to_string(pair.frame_a.size()) + " and " +
                                std::to_string(pair.frame_b.size()));
  }
  if (pair.frame_a.size() != params.input_dim()) {
    throw std::invalid_argument("frame pair: frame length " +
                                std::to_string(pair.frame_a.size()) + " but model expects " +
                                std::to_string(params.input_dim()));
  }
}

double pooled_norm_distance(const std::vector<double>& a, const std::vector<double>& b,
                            double order) {
  double acc = 0.0;
  if (order == 2.0) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
    return std::sqrt(acc);
  }
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::pow(std::abs(a[i] - b[i]), order);
  return std::pow(acc, 1.0 / order);
}

}  // namespace

double drlim_loss(const std::vector<double>& pooled_a, const std::vector<double>& pooled_b,
                  std::size_t temporal_gap, const Hyperparams& hyper) {
  if (pooled_a.size() != pooled_b.size()) {
    throw std::invalid_argument("drlim_loss: feature lengths " +
                                std::to_string(pooled_a.size()) + " and " +
                                std::to_string(pooled_b.size()) + " differ");
  }
  if (temporal_gap < 1) throw std::invalid_argument("drlim_loss: temporal_gap must be >= 1");
  const double dist = pooled_norm_distance(pooled_a, pooled_b, hyper.norm_order);
  if (temporal_gap == 1) return dist;
  return std::max(0.0, hyper.margin - dist);
}

LossBreakdown full_loss(const FramePair& pair, const ModelParams& params,
                        const Hyperparams& hyper) {
  check_pair(pair, params);
  const Branch a = run_branch(pair.frame_a, params, hyper.norm_order);
  const Branch b = run_branch(pair.frame_b, params, hyper.norm_order);

  LossBreakdown out;
  const std::vector<double>* frames[2] = {&pair.frame_a, &pair.frame_b};
  const Branch* branches[2] = {&a, &b};
  double l1 = 0.0;
  for (int t = 0; t < 2; ++t) {
    const std::vector<double> decoded = decode_fc(branches[t]->hidden, params);
    double recon = 0.0;
    for (std::size_t d = 0; d < decoded.size(); ++d) {
      const double r = decoded[d] - (*frames[t])[d];
      recon += r * r;
    }
    out.recon += recon;
    for (double h : branches[t]->hidden) l1 += h;  // h >= 0, so |h| = h
  }
  out.sparsity = hyper.sparsity_weight * l1;
  double slow = 0.0;
  for (std::size_t i = 0; i < a.pooled.size(); ++i) slow += std::abs(a.pooled[i] - b.pooled[i]);
  out.slowness = hyper.slowness_weight * slow;
  out.total = out.recon + out.sparsity + out.slowness;
  return out;
}

Gradients backward(const FramePair& pair, const ModelParams& params, const Hyperparams& hyper) {
  check_pair(pair, params);
  if (hyper.norm_order != 2.0) {
    throw std::invalid_argument("backward: analytic gradients require norm order 2, got " +
                                std::to_string(hyper.norm_order));
  }
  const std::size_t dim = params.input_dim();
  const std::size_t n = params.num_hidden();
  const Branch a = run_branch(pair.frame_a, params, 2.0);
  const Branch b = run_branch(pair.frame_b, params, 2.0);

  Gradients grads{Matrix(n, dim + 1), Matrix(dim, n)};

  const std::vector<double>* frames[2] = {&pair.frame_a, &pair.frame_b};
  const Branch* branches[2] = {&a, &b};
  const double branch_sign[2] = {1.0, -1.0};

  for (int t = 0; t < 2; ++t) {
    const Branch& br = *branches[t];
    const std::vector<double>& x = *frames[t];

    std::vector<double> residual = decode_fc(br.hidden, params);
    for (std::size_t d = 0; d < dim; ++d) residual[d] -= x[d];

    for (std::size_t d = 0; d < dim; ++d) {
      const double r2 = 2.0 * residual[d];
      for (std::size_t j = 0; j < n; ++j) grads.d_decoder(d, j) += r2 * br.hidden[j];
    }

    // Slowness routes through every group containing the unit; the shared
    // per-unit coefficient is sign(z_a - z_b) * (+-1) / max(z, eps).
    std::vector<double> slow_coef(n, 0.0);
    if (hyper.slowness_weight != 0.0) {
      for (std::size_t i = 0; i < params.topology.groups.size(); ++i) {
        const double s = sgn(a.pooled[i] - b.pooled[i]) * branch_sign[t];
        if (s == 0.0) continue;
        const double denom = std::max(br.pooled[i], hyper.eps);
        for (std::size_t j : params.topology.groups[i]) slow_coef[j] += s / denom;
      }
    }

    for (std::size_t j = 0; j < n; ++j) {
      if (br.pre[j] <= 0.0) continue;  // rectifier gate
      double dh = hyper.sparsity_weight * sgn(br.hidden[j]) +
                  hyper.slowness_weight * slow_coef[j] * br.hidden[j];
      for (std::size_t d = 0; d < dim; ++d) dh += 2.0 * params.decoder(d, j) * residual[d];
      for (std::size_t d = 0; d < dim; ++d) grads.d_encoder(j, d) += dh * x[d];
      grads.d_encoder(j, dim) += dh;  // bias sees the homogeneous 1
    }
  }
  return grads;
}

Gradients drlim_backward(const FramePair& pair, const ModelParams& params,
                         const Hyperparams& hyper) {
  check_pair(pair, params);
  if (hyper.norm_order != 2.0) {
    throw std::invalid_argument("drlim_backward: analytic gradients require norm order 2, got " +
                                std::to_string(hyper.norm_order));
  }
  const std::size_t dim = params.input_dim();
  const std::size_t n = params.num_hidden();
  const Branch a = run_branch(pair.frame_a, params, 2.0);
  const Branch b = run_branch(pair.frame_b, params, 2.0);

  Gradients grads{Matrix(n, dim + 1), Matrix(dim, n)};

  double dist = 0.0;
  for (std::size_t i = 0; i < a.pooled.size(); ++i) {
    const double d = a.pooled[i] - b.pooled[i];
    dist += d * d;
  }
  dist = std::sqrt(dist);

  double scale;  // d(loss)/d(dist)
  if (pair.temporal_gap == 1) {
    scale = 1.0;
  } else if (dist >= hyper.margin) {
    return grads;  // hinge inactive
  } else {
    scale = -1.0;
  }

  const Branch* branches[2] = {&a, &b};
  const std::vector<double>* frames[2] = {&pair.frame_a, &pair.frame_b};
  const double branch_sign[2] = {1.0, -1.0};
  const double denom = std::max(dist, hyper.eps);

  for (int t = 0; t < 2; ++t) {
    const Branch& br = *branches[t];
    std::vector<double> coef(n, 0.0);
    for (std::size_t i = 0; i < params.topology.groups.size(); ++i) {
      const double dz = scale * branch_sign[t] * (a.pooled[i] - b.pooled[i]) / denom;
      if (dz == 0.0) continue;
      const double zd = std::max(br.pooled[i], hyper.eps);
      for (std::size_t j : params.topology.groups[i]) coef[j] += dz / zd;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (br.pre[j] <= 0.0) continue;
      const double dh = coef[j] * br.hidden[j];
      if (dh == 0.0) continue;
      const std::vector<double>& x = *frames[t];
      for (std::size_t d = 0; d < dim; ++d) grads.d_encoder(j, d) += dh * x[d];
      grads.d_encoder(j, dim) += dh;
    }
  }
  return grads;
}

GradCheckResult grad_check(const ModelParams& params, const FramePair& pair,
                           const Hyperparams& hyper, double step) {
  if (step <= 0.0) throw std::invalid_argument("grad_check: step must be positive");
  const Gradients analytic = backward(pair, params, hyper);
  const std::size_t dim = params.input_dim();
  const std::size_t n = params.num_hidden();

  const Branch a = run_branch(pair.frame_a, params, 2.0);
  const Branch b = run_branch(pair.frame_b, params, 2.0);
  const double kink_radius = 10.0 * step;

  // Finite differences are invalid where the loss is about to cross a
  // rectifier or absolute-value kink; those rows are skipped and counted.
  std::vector<bool> exclude_unit(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    exclude_unit[j] = std::abs(a.pre[j]) < kink_radius || std::abs(b.pre[j]) < kink_radius;
  }
  if (hyper.slowness_weight != 0.0) {
    for (std::size_t i = 0; i < params.topology.groups.size(); ++i) {
      if (std::abs(a.pooled[i] - b.pooled[i]) < kink_radius) {
        for (std::size_t j : params.topology.groups[i]) exclude_unit[j] = true;
      }
    }
  }

  ModelParams work = params;
  const auto fd_at = [&](double* coord) {
    const double saved = *coord;
    *coord = saved + step;
    const double up = full_loss(pair, work, hyper).total;
    *coord = saved - step;
    const double down = full_loss(pair, work, hyper).total;
    *coord = saved;
    return (up - down) / (2.0 * step);
  };

  std::vector<double> fd_enc(n * (dim + 1), 0.0);
  std::vector<double> fd_dec(dim * n, 0.0);
  GradCheckResult result;
  double fd_inf = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (exclude_unit[j]) {
      result.excluded += dim + 1;
      continue;
    }
    for (std::size_t c = 0; c <= dim; ++c) {
      const double fd = fd_at(&work.encoder(j, c));
      fd_enc[j * (dim + 1) + c] = fd;
      fd_inf = std::max(fd_inf, std::abs(fd));
    }
  }
  for (std::size_t idx = 0; idx < fd_dec.size(); ++idx) {
    const double fd = fd_at(&work.decoder.data[idx]);
    fd_dec[idx] = fd;
    fd_inf = std::max(fd_inf, std::abs(fd));
  }

  const double floor = 1e-6 * std::max(1.0, fd_inf);
  const auto rel = [floor](double an, double fd) {
    return std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), floor});
  };
  for (std::size_t j = 0; j < n; ++j) {
    if (exclude_unit[j]) continue;
    for (std::size_t c = 0; c <= dim; ++c) {
      result.max_rel_error =
          std::max(result.max_rel_error, rel(analytic.d_encoder(j, c), fd_enc[j * (dim + 1) + c]));
      ++result.checked;
    }
  }
  for (std::size_t idx = 0; idx < fd_dec.size(); ++idx) {
    result.max_rel_error = std::max(result.max_rel_error, rel(analytic.d_decoder.data[idx], fd_dec[idx]));
    ++result.checked;
  }
  return result;
}

}  // namespace sfae
