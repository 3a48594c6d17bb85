#include "csmc/mhme/predictor.hpp"

#include <array>
#include <string>

#include "csmc/diffcore/ops.hpp"
#include "csmc/error.hpp"

namespace csmc::mhme {

MhmeParams make_mhme_params(std::size_t measurement_width, std::size_t window_pixels, std::size_t hypotheses) {
  if (hypotheses == 0) throw ConfigError("MHME predictor needs at least one hypothesis");
  MhmeParams p;
  p.measurement_width = measurement_width;
  p.weight = diff::Tensor({hypotheses, measurement_width + window_pixels});
  p.bias = diff::Tensor({hypotheses}, 1.0 / static_cast<double>(hypotheses));
  return p;
}

diff::Var predict_weights(diff::Tape& tape, const diff::Binder& bind, const MhmeParams& params, diff::Var y,
                          diff::Var window) {
  if (tape.value(y).size() > params.measurement_width) {
    throw DimensionError("MHME predictor takes at most " + std::to_string(params.measurement_width) +
                         " measurements, got " + std::to_string(tape.value(y).size()));
  }
  if (tape.value(window).size() != params.window_pixels()) {
    throw DimensionError("MHME predictor expects a window of " + std::to_string(params.window_pixels()) +
                         " pixels, got " + std::to_string(tape.value(window).size()));
  }
  const diff::Var padded = tape.value(y).size() == params.measurement_width
                               ? y
                               : diff::pad_to(tape, y, params.measurement_width);
  const std::array<diff::Var, 2> parts{padded, window};
  const diff::Var input = diff::concat(tape, parts);
  return diff::linear(tape, input, bind(tape, params.weight), bind(tape, params.bias));
}

diff::Var mh_predict(diff::Tape& tape, diff::Var omega, diff::Var hypotheses) {
  return diff::combine_rows(tape, omega, hypotheses);
}

std::vector<double> predict_weights(const MhmeParams& params, std::span<const double> y,
                                    std::span<const double> window) {
  diff::Tape tape(false);
  const diff::Binder frozen;
  const auto yv = tape.constant(diff::Tensor({y.size()}, std::vector<double>(y.begin(), y.end())));
  const auto wv = tape.constant(diff::Tensor({window.size()}, std::vector<double>(window.begin(), window.end())));
  const auto out = predict_weights(tape, frozen, params, yv, wv);
  const auto d = tape.value(out).data();
  return {d.begin(), d.end()};
}

std::vector<double> mh_predict(std::span<const double> omega, const HypothesisSet& hypotheses) {
  diff::Tape tape(false);
  const auto w = tape.constant(diff::Tensor({omega.size()}, std::vector<double>(omega.begin(), omega.end())));
  const auto h = tape.constant_ref(hypotheses.rows);
  const auto out = mh_predict(tape, w, h);
  const auto d = tape.value(out).data();
  return {d.begin(), d.end()};
}

}  // namespace csmc::mhme
