#include "csmc/unfold/decoder.hpp"

#include <string>

#include "csmc/error.hpp"
#include "csmc/unfold/stage.hpp"

namespace csmc::unfold {

using sensing::FramePlane;
using sensing::MeasurementGrid;

std::vector<double> normalize_measurements(std::span<const double> y, const sensing::OperatorView& view,
                                           const sensing::NormStats& norm) {
  const auto& phi = view.matrix();
  if (y.size() != phi.dim(0)) {
    throw DimensionError("measurement vector of length " + std::to_string(y.size()) + " for operator " +
                         diff::to_string(phi.shape()));
  }
  const std::size_t cols = phi.dim(1);
  std::vector<double> out(y.size());
  for (std::size_t m = 0; m < y.size(); ++m) {
    double row_sum = 0.0;
    for (std::size_t n = 0; n < cols; ++n) row_sum += phi[m * cols + n];
    out[m] = (y[m] - norm.mean * row_sum) / norm.stddev;
  }
  return out;
}

FramePlane reconstruct_frame(const ModelParams& model, const sensing::MeasurementOperator& op,
                             const MeasurementGrid& grid, const mhme::ReferenceBuffer& ref,
                             const DecodeOptions& options) {
  const auto& cfg = model.config;
  if (op.block() != cfg.block) {
    throw GeometryError("operator block size " + std::to_string(op.block()) + " differs from model block size " +
                        std::to_string(cfg.block));
  }
  const sensing::Ratio cr = grid.cr.milli() != 0 ? grid.cr : cfg.rate_for_channels(grid.channels);
  if (!cfg.supports(cr)) {
    throw UnsupportedRateError("model was not trained for compression ratio " + to_string(cr));
  }
  if (grid.channels != sensing::measurement_count(cr, cfg.block)) {
    throw GeometryError("grid has " + std::to_string(grid.channels) + " channels, rate " + to_string(cr) +
                        " needs " + std::to_string(sensing::measurement_count(cr, cfg.block)));
  }
  if (grid.grid_h == 0 || grid.grid_w == 0 || grid.data.size() != grid.channels * grid.grid_h * grid.grid_w) {
    throw GeometryError("malformed measurement grid");
  }

  const auto raw_view = op.rate_view(cr);
  const auto stage_view = cfg.itp ? op.row_view(cfg.max_measurements()) : raw_view;
  const std::size_t height = grid.grid_h * cfg.block;
  const std::size_t width = grid.grid_w * cfg.block;

  const bool use_ref = options.use_mhme && !ref.empty();
  FramePlane ref_norm;
  if (use_ref) {
    const auto& plane = ref.plane();
    if (plane.height != height || plane.width != width) {
      throw GeometryError("reference frame " + std::to_string(plane.height) + "x" + std::to_string(plane.width) +
                          " does not match decoded geometry " + std::to_string(height) + "x" + std::to_string(width));
    }
    if (height < 2 * cfg.block || width < 2 * cfg.block) {
      throw GeometryError("motion estimation needs frames of at least twice the block size");
    }
    ref_norm = sensing::normalize(plane, cfg.norm);
  }

  const diff::Binder frozen;
  std::vector<std::vector<double>> blocks;
  blocks.reserve(grid.grid_h * grid.grid_w);
  for (std::size_t gy = 0; gy < grid.grid_h; ++gy) {
    for (std::size_t gx = 0; gx < grid.grid_w; ++gx) {
      diff::Tape tape(false);
      const auto y = normalize_measurements(grid.block(gy, gx), raw_view, cfg.norm);
      const auto yv = tape.constant(diff::Tensor({y.size()}, y));
      const auto phi = tape.constant_ref(stage_view.matrix());
      BlockContext ctx;
      if (use_ref) {
        auto hyp = mhme::extract_hypotheses(ref_norm, {gy, gx}, cfg.block, cfg.hypothesis_stride);
        auto win = mhme::search_window(ref_norm, {gy, gx}, cfg.block);
        ctx.hypotheses = tape.constant(std::move(hyp.rows));
        const std::size_t win_size = win.pixels.size();
        ctx.window = tape.constant(diff::Tensor({win_size}, std::move(win.pixels)));
      }
      const auto fwd = forward_block(tape, frozen, model, phi, yv, cr, ctx);
      const auto out = tape.value(fwd.output()).data();
      blocks.emplace_back(out.begin(), out.end());
    }
  }
  FramePlane frame = sensing::assemble_frame(blocks, grid.grid_h, grid.grid_w);
  return sensing::denormalize(frame, cfg.norm);
}

std::vector<FramePlane> decode_sequence(const ModelParams& model, const sensing::MeasurementOperator& op,
                                        std::span<const MeasurementGrid> grids, const DecodeOptions& options) {
  std::vector<FramePlane> frames;
  frames.reserve(grids.size());
  mhme::ReferenceBuffer ref;
  for (std::size_t t = 0; t < grids.size(); ++t) {
    FramePlane f = reconstruct_frame(model, op, grids[t], ref, options);
    f.index = static_cast<std::int64_t>(t);
    ref.store(f);
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace csmc::unfold
