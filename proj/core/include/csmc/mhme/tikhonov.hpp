#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csmc/mhme/hypotheses.hpp"
#include "csmc/sensing/operator.hpp"

namespace csmc::mhme {

struct TikhonovSolution {
  std::vector<double> weights;
  /// Ratio of largest to smallest retained singular value of A = Phi H^T.
  double condition = 0.0;
  std::size_t rank = 0;
};

/// Closed-form multi-hypothesis weights
///   argmin_w ||y - A w||^2 + lambda ||w||^2,  A = Phi H^T,
/// computed from the SVD of A. With lambda = 0 and a rank-deficient A this is
/// the minimum-norm least-squares solution.
TikhonovSolution tikhonov_solve(std::span<const double> y, const sensing::OperatorView& view,
                                const HypothesisSet& hypotheses, double lambda);

/// ||y - A w||^2 + lambda ||w||^2.
double tikhonov_objective(std::span<const double> y, const sensing::OperatorView& view,
                          const HypothesisSet& hypotheses, std::span<const double> weights, double lambda);

}  // namespace csmc::mhme
