#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "csmc/diffcore/tensor.hpp"
#include "csmc/sensing/frame.hpp"

namespace csmc::mhme {

/// Block coordinates on the block grid (not pixels).
struct BlockPos {
  std::size_t gy = 0;
  std::size_t gx = 0;
};

/// Displacement of a candidate block relative to the target block, pixels.
struct Offset {
  std::ptrdiff_t dy = 0;
  std::ptrdiff_t dx = 0;
  friend bool operator==(Offset, Offset) = default;
};

/// Square of twice the block size centered on the block, shifted to stay
/// inside the frame. Smaller frames shrink the window to the frame.
struct SearchWindow {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;
};

/// The K rasterized candidate blocks of a search window, one per row.
struct HypothesisSet {
  std::size_t block = 0;
  diff::Tensor rows;  // K x B^2
  std::vector<Offset> offsets;

  std::size_t count() const noexcept { return offsets.size(); }
};

/// Holds the most recently decoded frame.
class ReferenceBuffer {
 public:
  bool empty() const noexcept { return !plane_.has_value(); }
  const sensing::FramePlane& plane() const;
  void store(sensing::FramePlane frame) { plane_ = std::move(frame); }
  void clear() { plane_.reset(); }

 private:
  std::optional<sensing::FramePlane> plane_;
};

SearchWindow search_window(const sensing::FramePlane& ref, BlockPos pos, std::size_t block);

/// All B x B sub-blocks of the search window on a `stride` lattice, in raster
/// order of their origin.
HypothesisSet extract_hypotheses(const sensing::FramePlane& ref, BlockPos pos, std::size_t block,
                                 std::size_t stride = 1);
HypothesisSet extract_hypotheses(const ReferenceBuffer& ref, BlockPos pos, std::size_t block,
                                 std::size_t stride = 1);

/// K for a full 2B x 2B window: (floor(B / stride) + 1)^2.
std::size_t hypothesis_count(std::size_t block, std::size_t stride);

}  // namespace csmc::mhme
