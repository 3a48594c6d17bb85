#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csmc/sensing/frame.hpp"
#include "csmc/sensing/operator.hpp"

namespace csmc::sensing {

/// Per-block measurements laid out channel-major over the block grid:
/// data[(m * grid_h + gy) * grid_w + gx].
struct MeasurementGrid {
  std::size_t channels = 0;
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::vector<double> data;
  Ratio cr;

  double& at(std::size_t m, std::size_t gy, std::size_t gx) { return data[(m * grid_h + gy) * grid_w + gx]; }
  double at(std::size_t m, std::size_t gy, std::size_t gx) const { return data[(m * grid_h + gy) * grid_w + gx]; }

  /// Measurement vector of one block.
  std::vector<double> block(std::size_t gy, std::size_t gx) const;
  void set_block(std::size_t gy, std::size_t gx, std::span<const double> values);

  friend bool operator==(const MeasurementGrid&, const MeasurementGrid&) = default;
};

/// y = Phi_B x for one rasterized block.
std::vector<double> sample_block(const OperatorView& view, std::span<const double> block);

/// Strided-convolution sampling of a whole frame.
MeasurementGrid sample_frame(const OperatorView& view, const FramePlane& frame, Ratio cr = {});

/// Raster-order list of rasterized B x B blocks.
std::vector<std::vector<double>> split_blocks(const FramePlane& frame, std::size_t block);
FramePlane assemble_frame(std::span<const std::vector<double>> blocks, std::size_t grid_h, std::size_t grid_w);

std::vector<double> extract_block(const FramePlane& frame, std::size_t block, std::size_t gy, std::size_t gx);

void check_geometry(const FramePlane& frame, std::size_t block);

}  // namespace csmc::sensing
