#include "sfae/data.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include "sfae/rng.hpp"

namespace sfae {

namespace {

constexpr char kMagic[8] = {'S', 'F', 'V', 'S', 'E', 'Q', '1', '\0'};
constexpr std::size_t kMaxDim = 1u << 20;

// Signed offset folded into [-period/2, period/2).
double toroidal_delta(double a, double period) {
  double d = std::fmod(a, period);
  if (d < -period / 2.0) d += period;
  if (d >= period / 2.0) d -= period;
  return d;
}

std::size_t wrap_index(long long i, std::size_t n) {
  long long m = i % static_cast<long long>(n);
  if (m < 0) m += static_cast<long long>(n);
  return static_cast<std::size_t>(m);
}

double sample_bilinear_toroidal(const Image& img, double y, double x) {
  const double fy = std::floor(y);
  const double fx = std::floor(x);
  const double wy = y - fy;
  const double wx = x - fx;
  const std::size_t y0 = wrap_index(static_cast<long long>(fy), img.height);
  const std::size_t y1 = wrap_index(static_cast<long long>(fy) + 1, img.height);
  const std::size_t x0 = wrap_index(static_cast<long long>(fx), img.width);
  const std::size_t x1 = wrap_index(static_cast<long long>(fx) + 1, img.width);
  return (1.0 - wy) * (1.0 - wx) * img(y0, x0) + (1.0 - wy) * wx * img(y0, x1) +
         wy * (1.0 - wx) * img(y1, x0) + wy * wx * img(y1, x1);
}

// White noise smoothed by a separable toroidal Gaussian; correlation length
// of a couple of pixels so subpixel drift changes frames smoothly.
Image smooth_noise_field(std::size_t height, std::size_t width, std::mt19937& rng) {
  Image noise(height, width);
  for (double& v : noise.data) v = uniform_range(rng, -1.0, 1.0);

  constexpr double sigma = 1.5;
  constexpr int radius = 4;
  double weights[2 * radius + 1];
  double wsum = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    weights[t + radius] = std::exp(-0.5 * t * t / (sigma * sigma));
    wsum += weights[t + radius];
  }
  for (double& w : weights) w /= wsum;

  Image rows(height, width);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        acc += weights[t + radius] * noise(y, wrap_index(static_cast<long long>(x) + t, width));
      }
      rows(y, x) = acc;
    }
  }
  Image out(height, width);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        acc += weights[t + radius] * rows(wrap_index(static_cast<long long>(y) + t, height), x);
      }
      out(y, x) = acc;
    }
  }
  return out;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {
      static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
      static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

FrameSequence generate(const SequenceSpec& spec) {
  if (spec.num_frames < 2) throw std::invalid_argument("generate: need at least 2 frames");
  if (spec.height == 0 || spec.width == 0) {
    throw std::invalid_argument("generate: frame dims must be >= 1");
  }
  if (spec.kind == SequenceKind::translating_blob && !(spec.blob_sigma > 0.0)) {
    throw std::invalid_argument("generate: blob_sigma must be positive");
  }

  FrameSequence seq;
  seq.height = spec.height;
  seq.width = spec.width;
  seq.frames.reserve(spec.num_frames);
  std::mt19937 rng(spec.seed);

  const double period_y = static_cast<double>(spec.height);
  const double period_x = static_cast<double>(spec.width);

  switch (spec.kind) {
    case SequenceKind::translating_blob: {
      const double cy0 = uniform01(rng) * period_y;
      const double cx0 = uniform01(rng) * period_x;
      const double inv2s2 = 1.0 / (2.0 * spec.blob_sigma * spec.blob_sigma);
      for (std::size_t t = 0; t < spec.num_frames; ++t) {
        // Reduce the displacement modulo the period first so a full wrap
        // reproduces the original frame exactly.
        const double cy = cy0 + std::fmod(static_cast<double>(t) * spec.velocity_y, period_y);
        const double cx = cx0 + std::fmod(static_cast<double>(t) * spec.velocity_x, period_x);
        Image frame(spec.height, spec.width);
        for (std::size_t y = 0; y < spec.height; ++y) {
          const double dy = toroidal_delta(static_cast<double>(y) - cy, period_y);
          for (std::size_t x = 0; x < spec.width; ++x) {
            const double dx = toroidal_delta(static_cast<double>(x) - cx, period_x);
            frame(y, x) = std::exp(-(dy * dy + dx * dx) * inv2s2);
          }
        }
        seq.frames.push_back(std::move(frame));
      }
      break;
    }
    case SequenceKind::drifting_texture: {
      const Image field = smooth_noise_field(spec.height, spec.width, rng);
      for (std::size_t t = 0; t < spec.num_frames; ++t) {
        const double dy = std::fmod(static_cast<double>(t) * spec.velocity_y, period_y);
        const double dx = std::fmod(static_cast<double>(t) * spec.velocity_x, period_x);
        Image frame(spec.height, spec.width);
        for (std::size_t y = 0; y < spec.height; ++y) {
          for (std::size_t x = 0; x < spec.width; ++x) {
            frame(y, x) = sample_bilinear_toroidal(field, static_cast<double>(y) + dy,
                                                   static_cast<double>(x) + dx);
          }
        }
        seq.frames.push_back(std::move(frame));
      }
      break;
    }
    case SequenceKind::constant: {
      const Image field = smooth_noise_field(spec.height, spec.width, rng);
      for (std::size_t t = 0; t < spec.num_frames; ++t) seq.frames.push_back(field);
      break;
    }
  }
  return seq;
}

FramePair sample_pair(const FrameSequence& seq, double neighbor_prob, std::mt19937& rng) {
  const std::size_t t_count = seq.num_frames();
  if (t_count < 2) throw std::invalid_argument("sample_pair: need at least 2 frames");
  if (neighbor_prob < 0.0 || neighbor_prob > 1.0) {
    throw std::invalid_argument("sample_pair: neighbor_prob must be in [0, 1]");
  }
  if (t_count < 3 && neighbor_prob < 1.0) {
    throw std::invalid_argument("sample_pair: no non-neighbor pair exists with fewer than 3 frames");
  }
  std::size_t t, u;
  if (uniform01(rng) < neighbor_prob) {
    t = uniform_index(rng, t_count - 1);
    u = t + 1;
  } else {
    do {
      t = uniform_index(rng, t_count);
      u = uniform_index(rng, t_count);
    } while ((t > u ? t - u : u - t) < 2);
  }
  FramePair pair;
  pair.frame_a = seq.frames[t].data;
  pair.frame_b = seq.frames[u].data;
  pair.temporal_gap = t > u ? t - u : u - t;
  return pair;
}

FrameSequence normalize(const FrameSequence& seq) {
  FrameSequence out = seq;
  double sd_sum = 0.0;
  for (Image& frame : out.frames) {
    const double count = static_cast<double>(frame.data.size());
    double mean = 0.0;
    for (double v : frame.data) mean += v;
    mean /= count;
    double var = 0.0;
    for (double& v : frame.data) {
      v -= mean;
      var += v * v;
    }
    sd_sum += std::sqrt(var / count);
  }
  const double mean_sd = sd_sum / static_cast<double>(out.num_frames());
  if (mean_sd > 0.0) {
    for (Image& frame : out.frames) {
      for (double& v : frame.data) v /= mean_sd;
    }
  }
  return out;
}

void save_sequence(const FrameSequence& seq, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_sequence: cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, static_cast<std::uint32_t>(seq.num_frames()));
  put_u32(out, static_cast<std::uint32_t>(seq.height));
  put_u32(out, static_cast<std::uint32_t>(seq.width));
  for (const Image& frame : seq.frames) {
    for (double v : frame.data) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  if (!out) throw std::runtime_error("save_sequence: write failed for " + path);
}

FrameSequence load_sequence(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_sequence: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

  if (bytes.size() < 8 || !std::equal(kMagic, kMagic + 8, bytes.data())) {
    throw std::runtime_error("load_sequence: " + path + ": bad magic at byte offset 0");
  }
  if (bytes.size() < 20) {
    throw std::runtime_error("load_sequence: " + path + ": truncated header at byte offset 8");
  }
  const std::uint32_t t_count = get_u32(bytes.data() + 8);
  const std::uint32_t height = get_u32(bytes.data() + 12);
  const std::uint32_t width = get_u32(bytes.data() + 16);
  if (t_count < 2 || height == 0 || width == 0) {
    throw std::runtime_error("load_sequence: " + path + ": invalid dims " +
                             std::to_string(t_count) + "x" + std::to_string(height) + "x" +
                             std::to_string(width) + " at byte offset 8");
  }
  if (t_count > kMaxDim || height > kMaxDim || width > kMaxDim) {
    throw std::runtime_error("load_sequence: " + path + ": dimension overflow at byte offset 8");
  }
  const std::uint64_t values =
      static_cast<std::uint64_t>(t_count) * height * width;
  const std::uint64_t expected = 20 + 4 * values;
  if (bytes.size() != expected) {
    throw std::runtime_error("load_sequence: " + path + ": payload length mismatch at byte offset 20 (header implies " +
                             std::to_string(expected) + " bytes, file has " +
                             std::to_string(bytes.size()) + ")");
  }

  FrameSequence seq;
  seq.height = height;
  seq.width = width;
  seq.frames.reserve(t_count);
  std::size_t offset = 20;
  for (std::uint32_t t = 0; t < t_count; ++t) {
    Image frame(height, width);
    for (double& v : frame.data) {
      v = static_cast<double>(std::bit_cast<float>(get_u32(bytes.data() + offset)));
      offset += 4;
    }
    for (double v : frame.data) {
      if (!std::isfinite(v)) {
        throw std::runtime_error("load_sequence: " + path + ": non-finite value near byte offset " +
                                 std::to_string(offset));
      }
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

}  // namespace sfae
