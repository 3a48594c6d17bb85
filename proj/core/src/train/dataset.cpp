#include "csmc/train/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "csmc/error.hpp"
#include "csmc/random.hpp"

namespace csmc::train {

using sensing::FramePlane;

namespace {

struct Wave {
  double fy, fx, phase, amplitude;
};

struct Rect {
  double top, left, height, width, level;
};

// Smooth random canvas: a handful of low-frequency plane waves over a
// mid-gray base plus a few soft-edged rectangles.
std::vector<double> make_canvas(std::size_t height, std::size_t width, Rng& rng) {
  std::vector<Wave> waves(6);
  for (auto& w : waves) {
    const double freq = rng.uniform(0.015, 0.12);
    const double angle = rng.uniform(0.0, std::numbers::pi);
    w.fy = freq * std::sin(angle);
    w.fx = freq * std::cos(angle);
    w.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    w.amplitude = rng.uniform(10.0, 30.0);
  }
  std::vector<Rect> rects(4);
  for (auto& r : rects) {
    r.height = rng.uniform(8.0, 28.0);
    r.width = rng.uniform(8.0, 28.0);
    r.top = rng.uniform(-8.0, static_cast<double>(height));
    r.left = rng.uniform(-8.0, static_cast<double>(width));
    r.level = rng.uniform(-50.0, 50.0);
  }
  const double base = rng.uniform(100.0, 156.0);

  std::vector<double> canvas(height * width);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      double v = base;
      for (const auto& w : waves) {
        v += w.amplitude * std::sin(2.0 * std::numbers::pi * (w.fy * y + w.fx * x) + w.phase);
      }
      for (const auto& r : rects) {
        if (y >= r.top && y < r.top + r.height && x >= r.left && x < r.left + r.width) v += r.level;
      }
      canvas[y * width + x] = std::clamp(v, 0.0, 255.0);
    }
  }
  return canvas;
}

}  // namespace

Clip make_synthetic_sequence(std::size_t n_frames, Geometry geometry, MotionSpec motion, std::uint64_t seed,
                             std::size_t block) {
  if (block == 0 || geometry.height == 0 || geometry.width == 0 || geometry.height % block != 0 ||
      geometry.width % block != 0) {
    throw GeometryError("synthetic geometry " + std::to_string(geometry.height) + "x" +
                        std::to_string(geometry.width) + " is not a multiple of block size " + std::to_string(block));
  }
  Rng rng(seed);
  std::ptrdiff_t dy = motion.dy;
  std::ptrdiff_t dx = motion.dx;
  if (motion.jitter > 0) {
    const auto span = 2 * motion.jitter + 1;
    dy += static_cast<std::ptrdiff_t>(rng.index(span)) - static_cast<std::ptrdiff_t>(motion.jitter);
    dx += static_cast<std::ptrdiff_t>(rng.index(span)) - static_cast<std::ptrdiff_t>(motion.jitter);
  }
  const std::size_t travel = n_frames > 0 ? n_frames - 1 : 0;
  const std::size_t extra_y = travel * static_cast<std::size_t>(std::abs(dy));
  const std::size_t extra_x = travel * static_cast<std::size_t>(std::abs(dx));
  const std::size_t ch = geometry.height + extra_y;
  const std::size_t cw = geometry.width + extra_x;
  const auto canvas = make_canvas(ch, cw, rng);

  // frame t samples the canvas at (r + base - t * d) so content moves by +d.
  const std::ptrdiff_t base_y = dy > 0 ? static_cast<std::ptrdiff_t>(extra_y) : 0;
  const std::ptrdiff_t base_x = dx > 0 ? static_cast<std::ptrdiff_t>(extra_x) : 0;
  Clip clip;
  clip.reserve(n_frames);
  for (std::size_t t = 0; t < n_frames; ++t) {
    FramePlane f(geometry.height, geometry.width, 0.0, static_cast<std::int64_t>(t));
    const std::ptrdiff_t oy = base_y - static_cast<std::ptrdiff_t>(t) * dy;
    const std::ptrdiff_t ox = base_x - static_cast<std::ptrdiff_t>(t) * dx;
    for (std::size_t r = 0; r < geometry.height; ++r) {
      for (std::size_t c = 0; c < geometry.width; ++c) {
        const auto sy = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(r) + oy);
        const auto sx = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(c) + ox);
        f.at(r, c) = canvas[sy * cw + sx];
      }
    }
    clip.push_back(std::move(f));
  }
  return clip;
}

std::vector<Clip> make_synthetic_clips(std::size_t n_clips, std::size_t n_frames, Geometry geometry,
                                       MotionSpec motion, std::uint64_t seed, std::size_t block) {
  Rng seeds(seed);
  std::vector<Clip> clips;
  clips.reserve(n_clips);
  for (std::size_t i = 0; i < n_clips; ++i) {
    clips.push_back(make_synthetic_sequence(n_frames, geometry, motion, seeds.next_u64(), block));
  }
  return clips;
}

std::vector<TrainSample> make_synthetic_dataset(std::size_t n_frames, Geometry geometry, MotionSpec motion,
                                                std::uint64_t seed, std::size_t block) {
  Clip clip = make_synthetic_sequence(n_frames, geometry, motion, seed, block);
  std::vector<TrainSample> samples;
  samples.reserve(clip.size());
  for (std::size_t t = 0; t < clip.size(); ++t) {
    TrainSample s;
    s.x = clip[t];
    if (t > 0) s.x_ref = clip[t - 1];
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace csmc::train
