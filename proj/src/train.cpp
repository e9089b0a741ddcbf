#include "sfae/train.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>

namespace sfae {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'A', 'E'};
constexpr unsigned char kVersion = 0x01;

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {
      static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
      static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffull));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void put_f32(std::ostream& out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

double get_f64(const unsigned char* p) {
  const std::uint64_t lo = get_u32(p);
  const std::uint64_t hi = get_u32(p + 4);
  return std::bit_cast<double>(lo | (hi << 32));
}

double get_f32(const unsigned char* p) {
  return static_cast<double>(std::bit_cast<float>(get_u32(p)));
}

void check_shapes(const ModelParams& params, const Matrix& enc_like, const Matrix& dec_like,
                  const char* what) {
  if (enc_like.rows != params.encoder.rows || enc_like.cols != params.encoder.cols ||
      dec_like.rows != params.decoder.rows || dec_like.cols != params.decoder.cols) {
    throw std::invalid_argument(std::string(what) + ": shapes do not match parameters");
  }
}

double zero_fraction(const std::vector<double>& hidden) {
  std::size_t zeros = 0;
  for (double h : hidden) {
    if (h == 0.0) ++zeros;
  }
  return static_cast<double>(zeros) / static_cast<double>(hidden.size());
}

}  // namespace

void sgd_step(ModelParams& params, const Gradients& grads, OptimizerState& state,
              const Hyperparams& hyper) {
  check_shapes(params, grads.d_encoder, grads.d_decoder, "sgd_step gradients");
  check_shapes(params, state.encoder_velocity, state.decoder_velocity, "sgd_step state");
  for (std::size_t i = 0; i < grads.d_encoder.data.size(); ++i) {
    if (!std::isfinite(grads.d_encoder.data[i])) {
      throw numeric_error("sgd_step: non-finite gradient at encoder(" +
                          std::to_string(i / params.encoder.cols) + "," +
                          std::to_string(i % params.encoder.cols) + ")");
    }
  }
  for (std::size_t i = 0; i < grads.d_decoder.data.size(); ++i) {
    if (!std::isfinite(grads.d_decoder.data[i])) {
      throw numeric_error("sgd_step: non-finite gradient at decoder(" +
                          std::to_string(i / params.decoder.cols) + "," +
                          std::to_string(i % params.decoder.cols) + ")");
    }
  }
  for (std::size_t i = 0; i < params.encoder.data.size(); ++i) {
    double& v = state.encoder_velocity.data[i];
    v = hyper.momentum * v - hyper.learning_rate * grads.d_encoder.data[i];
    params.encoder.data[i] += v;
  }
  for (std::size_t i = 0; i < params.decoder.data.size(); ++i) {
    double& v = state.decoder_velocity.data[i];
    v = hyper.momentum * v - hyper.learning_rate * grads.d_decoder.data[i];
    params.decoder.data[i] += v;
  }
}

TrainResult train(const FrameSequence& seq, const TrainConfig& config) {
  if (config.epochs == 0 || config.pairs_per_epoch == 0 || config.batch_size == 0) {
    throw std::invalid_argument("train: counts must be >= 1");
  }
  if (config.batch_size > config.pairs_per_epoch) {
    throw std::invalid_argument("train: batch_size exceeds pairs_per_epoch");
  }
  if (seq.num_frames() < 2) throw std::invalid_argument("train: need at least 2 frames");

  const auto start = std::chrono::steady_clock::now();
  const std::size_t dim = seq.height * seq.width;
  TrainResult result;
  result.params =
      init_params(dim, config.num_hidden, config.group_size, config.stride, config.seed);
  ModelParams& params = result.params;
  const std::size_t n = config.num_hidden;

  OptimizerState state{Matrix(n, dim + 1), Matrix(dim, n)};
  std::mt19937 pair_rng(config.seed ^ 0x9e3779b9u);
  const std::size_t steps_per_epoch = config.pairs_per_epoch / config.batch_size;
  const double inv_batch = 1.0 / static_cast<double>(config.batch_size);

  result.report.epochs.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    LossBreakdown sum;
    double sparsity_sum = 0.0;
    std::size_t pair_count = 0;

    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      Gradients batch{Matrix(n, dim + 1), Matrix(dim, n)};
      for (std::size_t b = 0; b < config.batch_size; ++b) {
        const FramePair pair = sample_pair(seq, config.neighbor_prob, pair_rng);
        LossBreakdown lb;
        Gradients g;
        const Activations act_a = encode_fc(pair.frame_a, params, config.hyper.norm_order);
        const Activations act_b = encode_fc(pair.frame_b, params, config.hyper.norm_order);
        if (config.objective == Objective::full) {
          lb = full_loss(pair, params, config.hyper);
          g = backward(pair, params, config.hyper);
        } else {
          lb.contrastive =
              drlim_loss(act_a.pooled, act_b.pooled, pair.temporal_gap, config.hyper);
          lb.total = lb.contrastive;
          g = drlim_backward(pair, params, config.hyper);
        }
        if (!std::isfinite(lb.total)) {
          throw numeric_error("train: loss diverged at epoch " + std::to_string(epoch + 1) +
                              " step " + std::to_string(step + 1) +
                              (config.checkpoint_path.empty()
                                   ? std::string()
                                   : "; last completed epoch kept at " + config.checkpoint_path));
        }
        sum.recon += lb.recon;
        sum.sparsity += lb.sparsity;
        sum.slowness += lb.slowness;
        sum.contrastive += lb.contrastive;
        sum.total += lb.total;
        sparsity_sum += 0.5 * (zero_fraction(act_a.hidden) + zero_fraction(act_b.hidden));
        ++pair_count;
        for (std::size_t i = 0; i < batch.d_encoder.data.size(); ++i) {
          batch.d_encoder.data[i] += inv_batch * g.d_encoder.data[i];
        }
        for (std::size_t i = 0; i < batch.d_decoder.data.size(); ++i) {
          batch.d_decoder.data[i] += inv_batch * g.d_decoder.data[i];
        }
      }
      sgd_step(params, batch, state, config.hyper);
    }

    EpochStats stats;
    const double inv_pairs = 1.0 / static_cast<double>(pair_count);
    stats.mean_loss.recon = sum.recon * inv_pairs;
    stats.mean_loss.sparsity = sum.sparsity * inv_pairs;
    stats.mean_loss.slowness = sum.slowness * inv_pairs;
    stats.mean_loss.contrastive = sum.contrastive * inv_pairs;
    stats.mean_loss.total = sum.total * inv_pairs;
    stats.mean_sparsity = sparsity_sum * inv_pairs;
    result.report.epochs.push_back(stats);

    if (!config.checkpoint_path.empty()) {
      save_checkpoint(params, config.hyper, config.checkpoint_path);
    }
  }

  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void save_checkpoint(const ModelParams& params, const Hyperparams& hyper,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  out.put(static_cast<char>(kVersion));
  put_u32(out, static_cast<std::uint32_t>(params.input_dim()));
  put_u32(out, static_cast<std::uint32_t>(params.num_hidden()));
  put_u32(out, static_cast<std::uint32_t>(params.topology.num_groups()));
  put_u32(out, static_cast<std::uint32_t>(params.topology.group_size));
  put_u32(out, static_cast<std::uint32_t>(params.topology.stride));
  put_f64(out, hyper.sparsity_weight);
  put_f64(out, hyper.slowness_weight);
  put_f64(out, hyper.margin);
  put_f64(out, hyper.eps);
  for (double v : params.encoder.data) put_f32(out, v);
  for (double v : params.decoder.data) put_f32(out, v);
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 4 || !std::equal(kMagic, kMagic + 4, bytes.data())) {
    throw std::runtime_error("load_checkpoint: " + path + ": bad magic at byte offset 0");
  }
  if (bytes.size() < 5 || bytes[4] != kVersion) {
    throw std::runtime_error("load_checkpoint: " + path + ": unsupported version " +
                             std::to_string(bytes.size() < 5 ? -1 : static_cast<int>(bytes[4])) +
                             " at byte offset 4");
  }
  if (bytes.size() < 57) {
    throw std::runtime_error("load_checkpoint: " + path + ": truncated header at byte offset 5");
  }
  const std::uint32_t dim = get_u32(bytes.data() + 5);
  const std::uint32_t n = get_u32(bytes.data() + 9);
  const std::uint32_t k = get_u32(bytes.data() + 13);
  const std::uint32_t group_size = get_u32(bytes.data() + 17);
  const std::uint32_t stride = get_u32(bytes.data() + 21);

  Checkpoint ckpt;
  ckpt.hyper.sparsity_weight = get_f64(bytes.data() + 25);
  ckpt.hyper.slowness_weight = get_f64(bytes.data() + 33);
  ckpt.hyper.margin = get_f64(bytes.data() + 41);
  ckpt.hyper.eps = get_f64(bytes.data() + 49);

  ckpt.params.topology = make_ring_topology(n, group_size, stride);
  if (ckpt.params.topology.num_groups() != k) {
    throw std::runtime_error("load_checkpoint: " + path + ": group count " + std::to_string(k) +
                             " does not match ring of " + std::to_string(n) + "/" +
                             std::to_string(stride));
  }
  const std::uint64_t enc_count = static_cast<std::uint64_t>(n) * (dim + 1);
  const std::uint64_t dec_count = static_cast<std::uint64_t>(dim) * n;
  const std::uint64_t expected = 57 + 4 * (enc_count + dec_count);
  if (bytes.size() != expected) {
    throw std::runtime_error("load_checkpoint: " + path +
                             ": payload length mismatch at byte offset 57 (header implies " +
                             std::to_string(expected) + " bytes, file has " +
                             std::to_string(bytes.size()) + ")");
  }
  ckpt.params.encoder = Matrix(n, dim + 1);
  ckpt.params.decoder = Matrix(dim, n);
  std::size_t offset = 57;
  for (double& v : ckpt.params.encoder.data) {
    v = get_f32(bytes.data() + offset);
    offset += 4;
  }
  for (double& v : ckpt.params.decoder.data) {
    v = get_f32(bytes.data() + offset);
    offset += 4;
  }
  return ckpt;
}

Matrix fit_linear_decoder(const FrameSequence& seq, const ModelParams& params) {
  const std::size_t n = params.num_hidden();
  const std::size_t dim = params.input_dim();
  if (seq.height * seq.width != dim) {
    throw std::invalid_argument("fit_linear_decoder: frame size does not match model input");
  }
  Matrix hh(n, n);   // sum of h h^T
  Matrix hx(n, dim);  // sum of h x^T
  for (const Image& frame : seq.frames) {
    const std::vector<double> h = encode_fc(frame.data, params).hidden;
    for (std::size_t i = 0; i < n; ++i) {
      if (h[i] == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) hh(i, j) += h[i] * h[j];
      for (std::size_t d = 0; d < dim; ++d) hx(i, d) += h[i] * frame.data[d];
    }
  }
  // Small ridge keeps dead or duplicated units from making the system singular.
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += hh(i, i);
  const double ridge = 1e-8 * (trace / static_cast<double>(n) + 1.0);
  for (std::size_t i = 0; i < n; ++i) hh(i, i) += ridge;
  return transpose(solve_linear(std::move(hh), std::move(hx)));
}

}  // namespace sfae
