#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csmc/diffcore/tape.hpp"
#include "csmc/mhme/hypotheses.hpp"
#include "csmc/random.hpp"

namespace csmc::mhme {

/// Fully connected coefficient predictor. Input is the measurement vector
/// zero-padded to `measurement_width` followed by the rasterized search
/// window; output is one coefficient per hypothesis.
struct MhmeParams {
  diff::Tensor weight;  // K x (measurement_width + window_pixels)
  diff::Tensor bias;    // K
  std::size_t measurement_width = 0;

  std::size_t hypotheses() const { return weight.dim(0); }
  std::size_t window_pixels() const { return weight.dim(1) - measurement_width; }
};

/// Zero weights and a uniform 1/K bias: the initial prediction is the mean
/// of the candidates.
MhmeParams make_mhme_params(std::size_t measurement_width, std::size_t window_pixels, std::size_t hypotheses);

diff::Var predict_weights(diff::Tape& tape, const diff::Binder& bind, const MhmeParams& params, diff::Var y,
                          diff::Var window);

/// Prediction = H^T omega.
diff::Var mh_predict(diff::Tape& tape, diff::Var omega, diff::Var hypotheses);

std::vector<double> predict_weights(const MhmeParams& params, std::span<const double> y,
                                    std::span<const double> window);
std::vector<double> mh_predict(std::span<const double> omega, const HypothesisSet& hypotheses);

}  // namespace csmc::mhme
