#pragma once

#include <random>
#include <string>

#include "sfae/loss.hpp"

namespace sfae {

// Ordered grayscale frames, all the same size.
struct FrameSequence {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Image> frames;

  std::size_t num_frames() const { return frames.size(); }
};

enum class SequenceKind { translating_blob, drifting_texture, constant };

struct SequenceSpec {
  SequenceKind kind = SequenceKind::drifting_texture;
  std::size_t num_frames = 64;
  std::size_t height = 16;
  std::size_t width = 16;
  double velocity_y = 0.0;  // per-frame drift in pixels
  double velocity_x = 1.0;
  double blob_sigma = 2.0;
  std::uint32_t seed = 0;
};

// Deterministic synthetic sequences. Motion wraps toroidally; subpixel
// shifts use bilinear interpolation.
FrameSequence generate(const SequenceSpec& spec);

// With probability neighbor_prob a uniform adjacent pair (gap 1), otherwise
// a uniform pair with gap >= 2. Frames are returned flattened.
FramePair sample_pair(const FrameSequence& seq, double neighbor_prob, std::mt19937& rng);

// Subtracts each frame's mean, then rescales globally so the per-frame
// standard deviation averages 1. A constant sequence maps to all zeros.
FrameSequence normalize(const FrameSequence& seq);

void save_sequence(const FrameSequence& seq, const std::string& path);
FrameSequence load_sequence(const std::string& path);

}  // namespace sfae
