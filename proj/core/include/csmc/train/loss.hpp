#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csmc/diffcore/tape.hpp"
#include "csmc/random.hpp"
#include "csmc/sensing/operator.hpp"

namespace csmc::train {

struct LossValue {
  double total = 0.0;
  double err = 0.0;  // (1/2N) sum ||f(y) - x||^2
  double mc = 0.0;   // (1/2N) sum ||y - Phi x_mc||^2
};

struct LossVars {
  diff::Var total;
  diff::Var err;
  diff::Var mc;
};

/// One block's share of the batch loss L_err + lambda * L_mc, scaled by
/// 1 / (2 * batch). With several stages the motion term is averaged over the
/// stages' fused estimates.
LossVars block_loss(diff::Tape& tape, diff::Var output, diff::Var target, std::span<const diff::Var> mixes,
                    diff::Var y, diff::Var phi, double lambda, std::size_t batch);

/// Batch loss from plain vectors: outputs[i], targets[i], fused[i] are B^2
/// blocks, measurements[i] the block's measurements under `view`.
LossValue loss(std::span<const std::vector<double>> outputs, std::span<const std::vector<double>> targets,
               std::span<const std::vector<double>> fused, std::span<const std::vector<double>> measurements,
               const sensing::OperatorView& view, double lambda);

/// Uniform draw from the rate list.
sensing::Ratio sample_cr(std::span<const sensing::Ratio> cr_list, Rng& rng);

}  // namespace csmc::train
