#include "csmc/unfold/stage.hpp"

#include <cmath>
#include <string>

#include "csmc/diffcore/ops.hpp"
#include "csmc/error.hpp"
#include "csmc/unfold/itp.hpp"

namespace csmc::unfold {

using diff::Var;

Var conv_stack(diff::Tape& tape, const diff::Binder& bind, const std::vector<ConvLayer>& convs, Var x,
               std::size_t block) {
  if (convs.empty()) return x;
  Var h = diff::reshape(tape, x, {1, block, block});
  for (std::size_t l = 0; l < convs.size(); ++l) {
    h = diff::conv2d_same(tape, h, bind(tape, convs[l].kernel), bind(tape, convs[l].bias));
    if (l + 1 < convs.size()) h = diff::relu(tape, h);
  }
  return diff::reshape(tape, h, {block * block});
}

Var preliminary_reconstruct(diff::Tape& tape, const diff::Binder& bind, const ReconBranch& branch, Var y,
                            std::size_t block) {
  const auto& w = branch.fc.weight;
  if (w.rank() != 2 || w.dim(0) != block * block || w.dim(1) != tape.value(y).size()) {
    throw DimensionError("reconstruction branch " + diff::to_string(w.shape()) + " cannot take " +
                         std::to_string(tape.value(y).size()) + " measurements for B=" + std::to_string(block));
  }
  const Var fc = diff::linear(tape, y, bind(tape, branch.fc.weight), bind(tape, branch.fc.bias));
  return conv_stack(tape, bind, branch.convs, fc, block);
}

Var fuse(diff::Tape& tape, Var a, Var b, double alpha, double beta) {
  if (std::abs(alpha + beta - 1.0) > 1e-12) {
    throw ConfigError("fusion weights must sum to one, got " + std::to_string(alpha) + " + " + std::to_string(beta));
  }
  return diff::add(tape, diff::scale(tape, a, alpha), diff::scale(tape, b, beta));
}

Var residual_correct(diff::Tape& tape, const diff::Binder& bind, const ReconBranch& branch, Var phi, Var y, Var mix,
                     std::size_t block) {
  const auto& p = tape.value(phi);
  if (p.rank() != 2 || p.dim(0) != tape.value(y).size() || p.dim(1) != tape.value(mix).size()) {
    throw DimensionError("remeasurement operator " + diff::to_string(p.shape()) + " does not match " +
                         std::to_string(tape.value(y).size()) + " measurements of a " +
                         std::to_string(tape.value(mix).size()) + "-pixel block");
  }
  const Var remeasured = diff::linear(tape, mix, phi);
  const Var residual = diff::sub(tape, y, remeasured);
  const Var correction = preliminary_reconstruct(tape, bind, branch, residual, block);
  return diff::add(tape, mix, correction);
}

StageResult run_stage(diff::Tape& tape, const diff::Binder& bind, const StageParams& stage,
                      const ModelConfig& config, Var phi, Var y, Var previous, const BlockContext& context,
                      Var prediction) {
  StageResult r;
  if (previous.valid()) {
    r.preliminary = previous;
  } else {
    if (!stage.preliminary) throw ConfigError("stage without a preliminary branch needs the previous stage output");
    r.preliminary = preliminary_reconstruct(tape, bind, *stage.preliminary, y, config.block);
  }

  if (context.has_reference()) {
    if (prediction.valid()) {
      r.prediction = prediction;
    } else {
      const Var omega = mhme::predict_weights(tape, bind, stage.mhme, y, context.window);
      r.prediction = mhme::mh_predict(tape, omega, context.hypotheses);
    }
    r.mix = fuse(tape, r.preliminary, r.prediction, config.alpha, 1.0 - config.alpha);
  } else {
    r.mix = r.preliminary;
  }

  r.output = residual_correct(tape, bind, stage.residual, phi, y, r.mix, config.block);
  return r;
}

BlockForward forward_block(diff::Tape& tape, const diff::Binder& bind, const ModelParams& model, Var phi, Var y,
                           sensing::Ratio cr, const BlockContext& context) {
  const auto& cfg = model.config;
  if (!cfg.supports(cr)) {
    throw UnsupportedRateError("model was not trained for compression ratio " + to_string(cr));
  }
  BlockForward f;
  f.measurements = model.itp ? itp_forward(tape, bind, *model.itp, y, cr, cfg.block) : y;
  if (tape.value(f.measurements).size() != cfg.stage_measurements(cr)) {
    throw DimensionError("stage input has " + std::to_string(tape.value(f.measurements).size()) +
                         " measurements, model expects " + std::to_string(cfg.stage_measurements(cr)));
  }
  Var previous;
  Var reuse;
  for (std::size_t s = 0; s < model.stages.size(); ++s) {
    StageResult r = run_stage(tape, bind, model.stages[s], cfg, phi, f.measurements, previous, context, reuse);
    previous = r.output;
    if (!cfg.mhme_every_stage && s == 0) reuse = r.prediction;
    f.stages.push_back(r);
  }
  return f;
}

}  // namespace csmc::unfold
