#pragma once

#include <functional>
#include <iosfwd>

#include "sfae/train.hpp"

namespace sfae {

enum class PooledNorm { l1, l2 };

// Distance between two frames in pooled-feature space. The default L1 form
// is the exact functional the slowness penalty trains to be small for
// temporal neighbors.
double pooled_distance(const std::vector<double>& frame_a, const std::vector<double>& frame_b,
                       const ModelParams& params, PooledNorm norm = PooledNorm::l1);

using FrameMetric = std::function<double(const Image&, const Image&)>;

FrameMetric pixel_metric();
FrameMetric learned_metric(const ModelParams& params, PooledNorm norm = PooledNorm::l1);

// Fraction of frames whose nearest neighbor under the metric is temporally
// adjacent. Ties break toward the smaller frame index.
double temporal_precision_at_1(const FrameSequence& seq, const FrameMetric& metric);

struct GapDistance {
  std::size_t gap = 0;
  double mean_distance = 0.0;
};

// Mean pooled distance between frames g apart, for g = 1..max_gap.
std::vector<GapDistance> distance_by_gap(const FrameSequence& seq, const ModelParams& params,
                                         std::size_t max_gap);

struct MetricReport {
  double learned_precision = 0.0;
  double pixel_precision = 0.0;
  double chance_precision = 0.0;  // 2 / (T - 1)
  std::vector<GapDistance> gaps;
};

MetricReport evaluate_metric(const FrameSequence& seq, const ModelParams& params,
                             std::size_t max_gap, PooledNorm norm = PooledNorm::l1);

// key: value lines followed by a gap,distance CSV block.
void write_report(std::ostream& out, const MetricReport& report);

double mean_reconstruction_error(const FrameSequence& seq, const ModelParams& params);

// Tiles the decoder columns as square patches, one row of tiles per pool
// group with a 1-pixel black separator between groups, normalized per tile
// to the full gray range. Written as binary PGM (P5, maxval 255).
void export_dictionary(const ModelParams& params, const std::string& path);

}  // namespace sfae
