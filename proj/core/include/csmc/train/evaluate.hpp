#pragma once

#include <cstddef>
#include <vector>

#include "csmc/sensing/operator.hpp"
#include "csmc/train/dataset.hpp"
#include "csmc/unfold/decoder.hpp"

namespace csmc::train {

struct EvalResult {
  double psnr = 0.0;  // mean over the evaluated frames
  double ssim = 0.0;
  std::size_t frames = 0;
};

/// Samples each clip at `cr`, decodes it frame-sequentially and averages
/// PSNR / SSIM over frames [first_frame, end) of every clip.
EvalResult evaluate_clips(const unfold::ModelParams& model, const sensing::MeasurementOperator& op,
                          const std::vector<Clip>& clips, sensing::Ratio cr, const unfold::DecodeOptions& options,
                          std::size_t first_frame = 0);

}  // namespace csmc::train
