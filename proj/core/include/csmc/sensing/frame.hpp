#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace csmc::sensing {

/// One luma plane, row-major.
struct FramePlane {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;
  std::int64_t index = 0;

  FramePlane() = default;
  FramePlane(std::size_t h, std::size_t w, double fill = 0.0, std::int64_t t = 0)
      : height(h), width(w), values(h * w, fill), index(t) {}

  double& at(std::size_t row, std::size_t col) { return values[row * width + col]; }
  double at(std::size_t row, std::size_t col) const { return values[row * width + col]; }

  friend bool operator==(const FramePlane&, const FramePlane&) = default;
};

/// Largest centered crop whose sides are multiples of `block`.
FramePlane center_crop(const FramePlane& frame, std::size_t block);

/// Pixel statistics used to map [0, 255] intensities to zero mean, unit
/// standard deviation.
struct NormStats {
  double mean = 0.0;
  double stddev = 1.0;

  double normalize(double v) const { return (v - mean) / stddev; }
  double denormalize(double v) const { return v * stddev + mean; }
};

NormStats compute_norm_stats(std::span<const FramePlane> frames);
FramePlane normalize(const FramePlane& frame, const NormStats& stats);
/// Maps back to pixel scale and clamps to [0, 255].
FramePlane denormalize(const FramePlane& frame, const NormStats& stats);

}  // namespace csmc::sensing
