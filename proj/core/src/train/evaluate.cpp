#include "csmc/train/evaluate.hpp"

#include "csmc/error.hpp"
#include "csmc/io/metrics.hpp"
#include "csmc/sensing/sampling.hpp"

namespace csmc::train {

EvalResult evaluate_clips(const unfold::ModelParams& model, const sensing::MeasurementOperator& op,
                          const std::vector<Clip>& clips, sensing::Ratio cr, const unfold::DecodeOptions& options,
                          std::size_t first_frame) {
  const auto view = op.rate_view(cr);
  EvalResult r;
  for (const auto& clip : clips) {
    std::vector<sensing::MeasurementGrid> grids;
    grids.reserve(clip.size());
    for (const auto& f : clip) grids.push_back(sensing::sample_frame(view, f, cr));
    const auto decoded = unfold::decode_sequence(model, op, grids, options);
    for (std::size_t t = first_frame; t < clip.size(); ++t) {
      r.psnr += io::psnr(decoded[t], clip[t]);
      r.ssim += io::ssim(decoded[t], clip[t]);
      ++r.frames;
    }
  }
  if (r.frames == 0) throw ConfigError("evaluation selected no frames");
  r.psnr /= static_cast<double>(r.frames);
  r.ssim /= static_cast<double>(r.frames);
  return r;
}

}  // namespace csmc::train
