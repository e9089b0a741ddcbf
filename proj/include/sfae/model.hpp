#pragma once

#include <cstdint>

#include "sfae/numerics.hpp"

namespace sfae {

// Index neighborhoods over hidden units. Groups may overlap; every hidden
// unit belongs to at least one group.
struct PoolingTopology {
  std::size_t num_hidden = 0;
  std::vector<std::vector<std::size_t>> groups;
  std::size_t group_size = 0;
  std::size_t stride = 0;

  std::size_t num_groups() const { return groups.size(); }
};

// 1-D ring of K = ceil(N / stride) groups: group i covers indices
// (i*stride + j) mod N for j < group_size. Requires stride <= group_size so
// that every unit is covered.
PoolingTopology make_ring_topology(std::size_t num_hidden, std::size_t group_size,
                                   std::size_t stride);

struct ModelParams {
  Matrix encoder;  // N x (D+1); the last column is the bias
  Matrix decoder;  // D x N
  PoolingTopology topology;

  std::size_t input_dim() const { return encoder.cols - 1; }
  std::size_t num_hidden() const { return encoder.rows; }
};

struct Activations {
  std::vector<double> hidden;  // rectified, length N
  std::vector<double> pooled;  // group norms, length K
};

ModelParams init_params(std::size_t input_dim, std::size_t num_hidden,
                        std::size_t group_size, std::size_t stride, std::uint32_t seed);

// Appends the homogeneous 1 so the bias rides along in the matrix product.
std::vector<double> homogeneous_input(const std::vector<double>& x);

// Group norms z_i = (sum_{j in P_i} h_j^order)^(1/order) over rectified h.
std::vector<double> pool_groups(const std::vector<double>& hidden,
                                const PoolingTopology& topology, double order = 2.0);

Activations encode_fc(const std::vector<double>& x, const ModelParams& params,
                      double pool_order = 2.0);

std::vector<double> decode_fc(const std::vector<double>& hidden, const ModelParams& params);

// Convolutional counterpart: one kernel and bias per hidden feature map,
// pooling groups run across maps, and each pooled value also pools over a
// spatial_pool x spatial_pool window (ragged edges truncated).
struct ConvModelParams {
  std::vector<Image> encoder_kernels;
  std::vector<double> encoder_biases;
  std::vector<Image> decoder_kernels;
  PoolingTopology topology;  // over the feature maps
  std::size_t spatial_pool = 1;
};

struct ConvActivations {
  std::vector<Image> hidden;  // N rectified feature maps
  std::vector<Image> pooled;  // K pooled maps
};

ConvModelParams init_conv_params(std::size_t kernel_h, std::size_t kernel_w,
                                 std::size_t num_maps, std::size_t group_size,
                                 std::size_t stride, std::size_t spatial_pool,
                                 std::uint32_t seed);

ConvActivations encode_conv(const Image& img, const ConvModelParams& params,
                            double pool_order = 2.0);

Image decode_conv(const ConvActivations& acts, const ConvModelParams& params);

}  // namespace sfae
