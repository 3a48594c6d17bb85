#pragma once

#include <span>
#include <vector>

#include "csmc/mhme/hypotheses.hpp"
#include "csmc/sensing/operator.hpp"
#include "csmc/sensing/sampling.hpp"
#include "csmc/unfold/model.hpp"

namespace csmc::unfold {

struct DecodeOptions {
  /// When false every frame is decoded as a key frame (no reference).
  bool use_mhme = true;
};

/// Maps pixel-domain measurements to the normalized domain:
/// (y - mean * Phi 1) / stddev.
std::vector<double> normalize_measurements(std::span<const double> y, const sensing::OperatorView& view,
                                           const sensing::NormStats& norm);

/// Decodes one frame from pixel-domain measurements. The reference holds the
/// previously decoded frame in pixel scale; an empty buffer (or use_mhme =
/// false) bypasses motion estimation. Output is clamped to [0, 255].
sensing::FramePlane reconstruct_frame(const ModelParams& model, const sensing::MeasurementOperator& op,
                                      const sensing::MeasurementGrid& grid, const mhme::ReferenceBuffer& ref,
                                      const DecodeOptions& options = {});

/// Frame-sequential decode; each decoded frame becomes the next reference.
std::vector<sensing::FramePlane> decode_sequence(const ModelParams& model, const sensing::MeasurementOperator& op,
                                                 std::span<const sensing::MeasurementGrid> grids,
                                                 const DecodeOptions& options = {});

}  // namespace csmc::unfold
