#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "csmc/sensing/frame.hpp"

namespace csmc::train {

struct Geometry {
  std::size_t height = 64;
  std::size_t width = 64;
};

/// Per-frame content displacement in pixels. Each clip adds an independent
/// uniform draw in [-jitter, jitter] to both components.
struct MotionSpec {
  std::ptrdiff_t dy = 0;
  std::ptrdiff_t dx = 0;
  std::size_t jitter = 0;
};

using Clip = std::vector<sensing::FramePlane>;

/// Texture (low-frequency sinusoids plus rectangles) translated by a fixed
/// shift per frame: frame[t+1](r + dy, c + dx) == frame[t](r, c). Pixel scale
/// [0, 255]; deterministic in `seed`.
Clip make_synthetic_sequence(std::size_t n_frames, Geometry geometry, MotionSpec motion, std::uint64_t seed,
                             std::size_t block = 16);

std::vector<Clip> make_synthetic_clips(std::size_t n_clips, std::size_t n_frames, Geometry geometry,
                                       MotionSpec motion, std::uint64_t seed, std::size_t block = 16);

/// A frame and the frame it is predicted from.
struct TrainSample {
  sensing::FramePlane x;
  std::optional<sensing::FramePlane> x_ref;
};

/// Ground-truth pairs of one synthetic sequence; the first frame has no
/// reference.
std::vector<TrainSample> make_synthetic_dataset(std::size_t n_frames, Geometry geometry, MotionSpec motion,
                                                std::uint64_t seed, std::size_t block = 16);

}  // namespace csmc::train
