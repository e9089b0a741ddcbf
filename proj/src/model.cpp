#include "sfae/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sfae/rng.hpp"

namespace sfae {

PoolingTopology make_ring_topology(std::size_t num_hidden, std::size_t group_size,
                                   std::size_t stride) {
  if (num_hidden == 0 || group_size == 0 || stride == 0) {
    throw std::invalid_argument("make_ring_topology: counts must be positive");
  }
  if (group_size > num_hidden) {
    throw std::invalid_argument("make_ring_topology: group_size " + std::to_string(group_size) +
                                " exceeds hidden count " + std::to_string(num_hidden));
  }
  if (stride > group_size) {
    throw std::invalid_argument("make_ring_topology: stride " + std::to_string(stride) +
                                " > group_size " + std::to_string(group_size) +
                                " would leave units unpooled");
  }
  PoolingTopology topo;
  topo.num_hidden = num_hidden;
  topo.group_size = group_size;
  topo.stride = stride;
  const std::size_t k = (num_hidden + stride - 1) / stride;
  topo.groups.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    topo.groups[i].reserve(group_size);
    for (std::size_t j = 0; j < group_size; ++j) {
      topo.groups[i].push_back((i * stride + j) % num_hidden);
    }
  }
  return topo;
}

ModelParams init_params(std::size_t input_dim, std::size_t num_hidden, std::size_t group_size,
                        std::size_t stride, std::uint32_t seed) {
  if (input_dim == 0) throw std::invalid_argument("init_params: input_dim must be >= 1");
  ModelParams p;
  p.topology = make_ring_topology(num_hidden, group_size, stride);
  p.encoder = Matrix(num_hidden, input_dim + 1);
  p.decoder = Matrix(input_dim, num_hidden);
  std::mt19937 rng(seed);
  const double enc_scale = 1.0 / std::sqrt(static_cast<double>(input_dim + 1));
  for (std::size_t j = 0; j < num_hidden; ++j) {
    for (std::size_t d = 0; d < input_dim; ++d) {
      p.encoder(j, d) = uniform_range(rng, -enc_scale, enc_scale);
    }
    // bias column stays zero
  }
  const double dec_scale = 1.0 / std::sqrt(static_cast<double>(num_hidden));
  for (double& w : p.decoder.data) w = uniform_range(rng, -dec_scale, dec_scale);
  return p;
}

std::vector<double> homogeneous_input(const std::vector<double>& x) {
  std::vector<double> hx(x.size() + 1);
  std::copy(x.begin(), x.end(), hx.begin());
  hx.back() = 1.0;
  return hx;
}

std::vector<double> pool_groups(const std::vector<double>& hidden,
                                const PoolingTopology& topology, double order) {
  if (hidden.size() != topology.num_hidden) {
    throw std::invalid_argument("pool_groups: hidden length " + std::to_string(hidden.size()) +
                                " does not match topology size " +
                                std::to_string(topology.num_hidden));
  }
  if (order < 1.0) throw std::invalid_argument("pool_groups: norm order must be >= 1");
  std::vector<double> pooled(topology.num_groups(), 0.0);
  for (std::size_t i = 0; i < topology.groups.size(); ++i) {
    double acc = 0.0;
    if (order == 2.0) {
      for (std::size_t j : topology.groups[i]) acc += hidden[j] * hidden[j];
      pooled[i] = std::sqrt(acc);
    } else {
      for (std::size_t j : topology.groups[i]) acc += std::pow(hidden[j], order);
      pooled[i] = std::pow(acc, 1.0 / order);
    }
  }
  return pooled;
}

Activations encode_fc(const std::vector<double>& x, const ModelParams& params,
                      double pool_order) {
  if (x.size() != params.input_dim()) {
    throw std::invalid_argument("encode_fc: input length " + std::to_string(x.size()) +
                                " but model expects " + std::to_string(params.input_dim()));
  }
  Activations acts;
  acts.hidden = matvec(params.encoder, homogeneous_input(x));
  for (double& h : acts.hidden) h = h > 0.0 ? h : 0.0;
  acts.pooled = pool_groups(acts.hidden, params.topology, pool_order);
  return acts;
}

std::vector<double> decode_fc(const std::vector<double>& hidden, const ModelParams& params) {
  if (hidden.size() != params.num_hidden()) {
    throw std::invalid_argument("decode_fc: hidden length " + std::to_string(hidden.size()) +
                                " but model has " + std::to_string(params.num_hidden()) +
                                " units");
  }
  return matvec(params.decoder, hidden);
}

namespace {

void validate_conv_params(const ConvModelParams& params) {
  const std::size_t n = params.encoder_kernels.size();
  if (n == 0) throw std::invalid_argument("conv model: no encoder kernels");
  if (params.encoder_biases.size() != n || params.decoder_kernels.size() != n ||
      params.topology.num_hidden != n) {
    throw std::invalid_argument("conv model: kernel, bias, and topology counts disagree");
  }
  const std::size_t kh = params.encoder_kernels[0].height;
  const std::size_t kw = params.encoder_kernels[0].width;
  for (const Image& k : params.encoder_kernels) {
    if (k.height != kh || k.width != kw) {
      throw std::invalid_argument("conv model: encoder kernels must share one shape");
    }
  }
  if (params.spatial_pool == 0) {
    throw std::invalid_argument("conv model: spatial_pool must be >= 1");
  }
}

}  // namespace

ConvModelParams init_conv_params(std::size_t kernel_h, std::size_t kernel_w,
                                 std::size_t num_maps, std::size_t group_size,
                                 std::size_t stride, std::size_t spatial_pool,
                                 std::uint32_t seed) {
  if (kernel_h == 0 || kernel_w == 0) {
    throw std::invalid_argument("init_conv_params: kernel dims must be >= 1");
  }
  ConvModelParams p;
  p.topology = make_ring_topology(num_maps, group_size, stride);
  p.spatial_pool = spatial_pool;
  if (spatial_pool == 0) throw std::invalid_argument("init_conv_params: spatial_pool must be >= 1");
  std::mt19937 rng(seed);
  const double enc_scale = 1.0 / std::sqrt(static_cast<double>(kernel_h * kernel_w + 1));
  const double dec_scale = 1.0 / std::sqrt(static_cast<double>(num_maps));
  p.encoder_kernels.reserve(num_maps);
  p.decoder_kernels.reserve(num_maps);
  p.encoder_biases.assign(num_maps, 0.0);
  for (std::size_t n = 0; n < num_maps; ++n) {
    Image k(kernel_h, kernel_w);
    for (double& v : k.data) v = uniform_range(rng, -enc_scale, enc_scale);
    p.encoder_kernels.push_back(std::move(k));
  }
  for (std::size_t n = 0; n < num_maps; ++n) {
    Image k(kernel_h, kernel_w);
    for (double& v : k.data) v = uniform_range(rng, -dec_scale, dec_scale);
    p.decoder_kernels.push_back(std::move(k));
  }
  return p;
}

ConvActivations encode_conv(const Image& img, const ConvModelParams& params, double pool_order) {
  validate_conv_params(params);
  if (pool_order < 1.0) throw std::invalid_argument("encode_conv: norm order must be >= 1");
  const std::size_t n = params.encoder_kernels.size();
  ConvActivations acts;
  acts.hidden.reserve(n);
  for (std::size_t m = 0; m < n; ++m) {
    Image map = conv2d_valid(img, params.encoder_kernels[m]);
    const double bias = params.encoder_biases[m];
    for (double& v : map.data) {
      v += bias;
      if (v < 0.0) v = 0.0;
    }
    acts.hidden.push_back(std::move(map));
  }
  const std::size_t map_h = acts.hidden[0].height;
  const std::size_t map_w = acts.hidden[0].width;
  const std::size_t s = params.spatial_pool;
  const std::size_t wy = map_h / s;  // ragged edges truncated
  const std::size_t wx = map_w / s;
  acts.pooled.reserve(params.topology.num_groups());
  for (const std::vector<std::size_t>& group : params.topology.groups) {
    Image pooled(wy, wx);
    for (std::size_t gy = 0; gy < wy; ++gy) {
      for (std::size_t gx = 0; gx < wx; ++gx) {
        double acc = 0.0;
        for (std::size_t j : group) {
          const Image& map = acts.hidden[j];
          for (std::size_t py = gy * s; py < gy * s + s; ++py) {
            for (std::size_t px = gx * s; px < gx * s + s; ++px) {
              const double v = map(py, px);
              if (pool_order == 2.0) {
                acc += v * v;
              } else {
                acc += std::pow(v, pool_order);
              }
            }
          }
        }
        pooled(gy, gx) = pool_order == 2.0 ? std::sqrt(acc) : std::pow(acc, 1.0 / pool_order);
      }
    }
    acts.pooled.push_back(std::move(pooled));
  }
  return acts;
}

Image decode_conv(const ConvActivations& acts, const ConvModelParams& params) {
  validate_conv_params(params);
  if (acts.hidden.size() != params.decoder_kernels.size()) {
    throw std::invalid_argument("decode_conv: feature map count " +
                                std::to_string(acts.hidden.size()) + " does not match kernels " +
                                std::to_string(params.decoder_kernels.size()));
  }
  Image out;
  for (std::size_t n = 0; n < acts.hidden.size(); ++n) {
    Image part = conv2d_transposed(acts.hidden[n], params.decoder_kernels[n]);
    if (n == 0) {
      out = std::move(part);
    } else {
      if (part.height != out.height || part.width != out.width) {
        throw std::invalid_argument("decode_conv: feature maps disagree on shape");
      }
      for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += part.data[i];
    }
  }
  return out;
}

}  // namespace sfae
