#include "csmc/mhme/hypotheses.hpp"

#include <algorithm>
#include <string>

#include "csmc/error.hpp"

namespace csmc::mhme {
namespace {

std::size_t window_origin(std::size_t block_origin, std::size_t block, std::size_t window, std::size_t extent) {
  const std::ptrdiff_t centered = static_cast<std::ptrdiff_t>(block_origin) - static_cast<std::ptrdiff_t>(block / 2);
  const std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(extent - window);
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(centered, 0, hi));
}

void check_position(const sensing::FramePlane& ref, BlockPos pos, std::size_t block) {
  if (block == 0 || block > ref.height || block > ref.width) {
    throw GeometryError("block size " + std::to_string(block) + " exceeds reference frame " +
                        std::to_string(ref.height) + "x" + std::to_string(ref.width));
  }
  if ((pos.gy + 1) * block > ref.height || (pos.gx + 1) * block > ref.width) {
    throw GeometryError("block (" + std::to_string(pos.gy) + "," + std::to_string(pos.gx) +
                        ") lies outside the reference frame");
  }
}

}  // namespace

const sensing::FramePlane& ReferenceBuffer::plane() const {
  if (!plane_) throw Error("reference buffer is empty");
  return *plane_;
}

std::size_t hypothesis_count(std::size_t block, std::size_t stride) {
  if (stride == 0) throw ConfigError("hypothesis stride must be positive");
  const std::size_t side = block / stride + 1;
  return side * side;
}

SearchWindow search_window(const sensing::FramePlane& ref, BlockPos pos, std::size_t block) {
  check_position(ref, pos, block);
  SearchWindow w;
  w.height = std::min(2 * block, ref.height);
  w.width = std::min(2 * block, ref.width);
  w.top = window_origin(pos.gy * block, block, w.height, ref.height);
  w.left = window_origin(pos.gx * block, block, w.width, ref.width);
  w.pixels.resize(w.height * w.width);
  for (std::size_t r = 0; r < w.height; ++r) {
    std::copy_n(ref.values.begin() + static_cast<std::ptrdiff_t>((w.top + r) * ref.width + w.left), w.width,
                w.pixels.begin() + static_cast<std::ptrdiff_t>(r * w.width));
  }
  return w;
}

HypothesisSet extract_hypotheses(const sensing::FramePlane& ref, BlockPos pos, std::size_t block,
                                 std::size_t stride) {
  if (stride == 0) throw ConfigError("hypothesis stride must be positive");
  const SearchWindow w = search_window(ref, pos, block);
  const std::size_t ny = (w.height - block) / stride + 1;
  const std::size_t nx = (w.width - block) / stride + 1;
  const std::size_t area = block * block;

  HypothesisSet set;
  set.block = block;
  set.rows = diff::Tensor({ny * nx, area});
  set.offsets.reserve(ny * nx);
  const auto oy = static_cast<std::ptrdiff_t>(pos.gy * block);
  const auto ox = static_cast<std::ptrdiff_t>(pos.gx * block);
  std::size_t k = 0;
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix, ++k) {
      const std::size_t top = iy * stride, left = ix * stride;
      double* dst = set.rows.data().data() + k * area;
      for (std::size_t r = 0; r < block; ++r) {
        std::copy_n(w.pixels.begin() + static_cast<std::ptrdiff_t>((top + r) * w.width + left), block,
                    dst + r * block);
      }
      set.offsets.push_back({static_cast<std::ptrdiff_t>(w.top + top) - oy,
                             static_cast<std::ptrdiff_t>(w.left + left) - ox});
    }
  }
  return set;
}

HypothesisSet extract_hypotheses(const ReferenceBuffer& ref, BlockPos pos, std::size_t block, std::size_t stride) {
  return extract_hypotheses(ref.plane(), pos, block, stride);
}

}  // namespace csmc::mhme
