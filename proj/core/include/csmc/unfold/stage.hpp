#pragma once

#include <cstddef>
#include <vector>

#include "csmc/diffcore/tape.hpp"
#include "csmc/unfold/model.hpp"

namespace csmc::unfold {

/// Reference-frame context of one block, already on the tape. Invalid vars
/// mean there is no reference and motion estimation is bypassed.
struct BlockContext {
  diff::Var hypotheses;  // K x B^2
  diff::Var window;      // 4 B^2
  bool has_reference() const { return hypotheses.valid(); }
};

/// Same-size conv stack on a B x B block (flat B^2 in, flat B^2 out). ReLU
/// after every layer but the last.
diff::Var conv_stack(diff::Tape& tape, const diff::Binder& bind, const std::vector<ConvLayer>& convs, diff::Var x,
                     std::size_t block);

/// FC to B^2 then the conv stack.
diff::Var preliminary_reconstruct(diff::Tape& tape, const diff::Binder& bind, const ReconBranch& branch,
                                  diff::Var y, std::size_t block);

/// alpha * a + beta * b. Throws ConfigError unless alpha + beta == 1.
diff::Var fuse(diff::Tape& tape, diff::Var a, diff::Var b, double alpha, double beta);

/// x_mix + branch(y - Phi x_mix).
diff::Var residual_correct(diff::Tape& tape, const diff::Binder& bind, const ReconBranch& branch, diff::Var phi,
                           diff::Var y, diff::Var mix, std::size_t block);

struct StageResult {
  diff::Var output;
  diff::Var mix;
  diff::Var preliminary;
  diff::Var prediction;  // invalid when bypassed
};

/// One reconstruction stage. `previous` is the prior stage's output (invalid
/// for the first stage); `prediction` is reused instead of re-running the
/// predictor when valid.
StageResult run_stage(diff::Tape& tape, const diff::Binder& bind, const StageParams& stage,
                      const ModelConfig& config, diff::Var phi, diff::Var y, diff::Var previous,
                      const BlockContext& context, diff::Var prediction = {});

struct BlockForward {
  diff::Var measurements;  // what the stages consumed (ITP output when enabled)
  std::vector<StageResult> stages;
  diff::Var output() const { return stages.back().output; }
};

/// All stages for one block. `y` is the raw normalized measurement vector at
/// rate `cr`; `phi` is the operator the residual path remeasures with
/// (rate view without ITP, M_max view with ITP).
BlockForward forward_block(diff::Tape& tape, const diff::Binder& bind, const ModelParams& model, diff::Var phi,
                           diff::Var y, sensing::Ratio cr, const BlockContext& context);

}  // namespace csmc::unfold
