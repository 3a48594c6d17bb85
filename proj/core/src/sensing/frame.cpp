#include "csmc/sensing/frame.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csmc/error.hpp"

namespace csmc::sensing {

FramePlane center_crop(const FramePlane& frame, std::size_t block) {
  if (block == 0) throw ConfigError("block size must be positive");
  const std::size_t h = frame.height / block * block;
  const std::size_t w = frame.width / block * block;
  if (h == 0 || w == 0) {
    throw GeometryError("frame " + std::to_string(frame.height) + "x" + std::to_string(frame.width) +
                        " is smaller than block size " + std::to_string(block));
  }
  if (h == frame.height && w == frame.width) return frame;
  const std::size_t top = (frame.height - h) / 2;
  const std::size_t left = (frame.width - w) / 2;
  FramePlane out(h, w, 0.0, frame.index);
  for (std::size_t r = 0; r < h; ++r) {
    std::copy_n(frame.values.begin() + static_cast<std::ptrdiff_t>((top + r) * frame.width + left), w,
                out.values.begin() + static_cast<std::ptrdiff_t>(r * w));
  }
  return out;
}

NormStats compute_norm_stats(std::span<const FramePlane> frames) {
  double sum = 0.0;
  double count = 0.0;
  for (const auto& f : frames) {
    for (double v : f.values) sum += v;
    count += static_cast<double>(f.values.size());
  }
  if (count == 0.0) throw ConfigError("cannot compute normalization statistics of an empty dataset");
  const double mean = sum / count;
  double var = 0.0;
  for (const auto& f : frames) {
    for (double v : f.values) var += (v - mean) * (v - mean);
  }
  const double stddev = std::sqrt(var / count);
  return {mean, stddev > 0.0 ? stddev : 1.0};
}

FramePlane normalize(const FramePlane& frame, const NormStats& stats) {
  FramePlane out = frame;
  for (double& v : out.values) v = stats.normalize(v);
  return out;
}

FramePlane denormalize(const FramePlane& frame, const NormStats& stats) {
  FramePlane out = frame;
  for (double& v : out.values) v = std::clamp(stats.denormalize(v), 0.0, 255.0);
  return out;
}

}  // namespace csmc::sensing
