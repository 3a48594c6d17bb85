#include "csmc/sensing/sampling.hpp"

#include <cmath>
#include <string>

#include "csmc/diffcore/ops.hpp"
#include "csmc/error.hpp"

namespace csmc::sensing {

void check_geometry(const FramePlane& frame, std::size_t block) {
  if (block == 0 || frame.height == 0 || frame.width == 0 || frame.height % block != 0 ||
      frame.width % block != 0) {
    throw GeometryError("frame " + std::to_string(frame.height) + "x" + std::to_string(frame.width) +
                        " is not divisible by block size " + std::to_string(block));
  }
  if (frame.values.size() != frame.height * frame.width) {
    throw GeometryError("frame holds " + std::to_string(frame.values.size()) + " values for geometry " +
                        std::to_string(frame.height) + "x" + std::to_string(frame.width));
  }
}

std::vector<double> MeasurementGrid::block(std::size_t gy, std::size_t gx) const {
  std::vector<double> y(channels);
  for (std::size_t m = 0; m < channels; ++m) y[m] = at(m, gy, gx);
  return y;
}

void MeasurementGrid::set_block(std::size_t gy, std::size_t gx, std::span<const double> values) {
  if (values.size() != channels) {
    throw DimensionError("block measurement of length " + std::to_string(values.size()) + " for " +
                         std::to_string(channels) + " channels");
  }
  for (std::size_t m = 0; m < channels; ++m) at(m, gy, gx) = values[m];
}

std::vector<double> sample_block(const OperatorView& view, std::span<const double> block) {
  const auto& phi = view.matrix();
  const std::size_t cols = phi.dim(1);
  if (block.size() != cols) {
    throw DimensionError("block of length " + std::to_string(block.size()) + " for operator " +
                         diff::to_string(phi.shape()));
  }
  std::vector<double> y(phi.dim(0), 0.0);
  for (std::size_t m = 0; m < y.size(); ++m) {
    const double* row = phi.data().data() + m * cols;
    double acc = 0.0;
    for (std::size_t n = 0; n < cols; ++n) acc += row[n] * block[n];
    y[m] = acc;
  }
  return y;
}

MeasurementGrid sample_frame(const OperatorView& view, const FramePlane& frame, Ratio cr) {
  check_geometry(frame, view.block());
  diff::Tape tape(false);
  const auto x = tape.constant(diff::Tensor({1, frame.height, frame.width}, frame.values));
  const auto k = tape.constant(view.as_filters());
  const auto y = diff::conv2d_valid_strided(tape, x, k, view.block());
  const auto& out = tape.value(y);

  MeasurementGrid grid;
  grid.channels = out.dim(0);
  grid.grid_h = out.dim(1);
  grid.grid_w = out.dim(2);
  grid.data.assign(out.data().begin(), out.data().end());
  grid.cr = cr;
  return grid;
}

std::vector<double> extract_block(const FramePlane& frame, std::size_t block, std::size_t gy, std::size_t gx) {
  std::vector<double> out(block * block);
  for (std::size_t r = 0; r < block; ++r) {
    for (std::size_t c = 0; c < block; ++c) out[r * block + c] = frame.at(gy * block + r, gx * block + c);
  }
  return out;
}

std::vector<std::vector<double>> split_blocks(const FramePlane& frame, std::size_t block) {
  check_geometry(frame, block);
  const std::size_t gh = frame.height / block, gw = frame.width / block;
  std::vector<std::vector<double>> blocks;
  blocks.reserve(gh * gw);
  for (std::size_t gy = 0; gy < gh; ++gy) {
    for (std::size_t gx = 0; gx < gw; ++gx) blocks.push_back(extract_block(frame, block, gy, gx));
  }
  return blocks;
}

FramePlane assemble_frame(std::span<const std::vector<double>> blocks, std::size_t grid_h, std::size_t grid_w) {
  if (blocks.size() != grid_h * grid_w || blocks.empty()) {
    throw GeometryError("got " + std::to_string(blocks.size()) + " blocks for a " + std::to_string(grid_h) + "x" +
                        std::to_string(grid_w) + " grid");
  }
  const auto block = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(blocks.front().size()))));
  if (block * block != blocks.front().size()) {
    throw GeometryError("block of " + std::to_string(blocks.front().size()) + " values is not square");
  }
  FramePlane frame(grid_h * block, grid_w * block);
  for (std::size_t gy = 0; gy < grid_h; ++gy) {
    for (std::size_t gx = 0; gx < grid_w; ++gx) {
      const auto& b = blocks[gy * grid_w + gx];
      if (b.size() != block * block) throw GeometryError("blocks of unequal size");
      for (std::size_t r = 0; r < block; ++r) {
        for (std::size_t c = 0; c < block; ++c) frame.at(gy * block + r, gx * block + c) = b[r * block + c];
      }
    }
  }
  return frame;
}

}  // namespace csmc::sensing
