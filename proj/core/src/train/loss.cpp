#include "csmc/train/loss.hpp"

#include <string>

#include "csmc/diffcore/ops.hpp"
#include "csmc/error.hpp"

namespace csmc::train {

using diff::Var;

LossVars block_loss(diff::Tape& tape, Var output, Var target, std::span<const Var> mixes, Var y, Var phi,
                    double lambda, std::size_t batch) {
  if (!(lambda >= 0.0)) throw ConfigError("motion loss weight lambda must be non-negative");
  if (batch == 0) throw ConfigError("batch size must be positive");
  if (mixes.empty()) throw ConfigError("loss needs at least one fused estimate");
  const double half_inv_n = 1.0 / (2.0 * static_cast<double>(batch));

  LossVars out;
  out.err = diff::scale(tape, diff::squared_distance(tape, output, target), half_inv_n);
  std::vector<Var> terms;
  terms.reserve(mixes.size());
  for (Var mix : mixes) terms.push_back(diff::squared_distance(tape, y, diff::linear(tape, mix, phi)));
  out.mc = diff::sum_scaled(tape, terms, half_inv_n / static_cast<double>(mixes.size()));
  out.total = diff::add(tape, out.err, diff::scale(tape, out.mc, lambda));
  return out;
}

LossValue loss(std::span<const std::vector<double>> outputs, std::span<const std::vector<double>> targets,
               std::span<const std::vector<double>> fused, std::span<const std::vector<double>> measurements,
               const sensing::OperatorView& view, double lambda) {
  const std::size_t n = outputs.size();
  if (targets.size() != n || fused.size() != n || measurements.size() != n) {
    throw DimensionError("loss: batch components have different lengths");
  }
  auto as_tensor = [](const std::vector<double>& v) { return diff::Tensor({v.size()}, v); };
  LossValue total;
  for (std::size_t i = 0; i < n; ++i) {
    diff::Tape tape(false);
    const Var phi = tape.constant_ref(view.matrix());
    const Var mix = tape.constant(as_tensor(fused[i]));
    const LossVars l = block_loss(tape, tape.constant(as_tensor(outputs[i])), tape.constant(as_tensor(targets[i])),
                                  std::span<const Var>(&mix, 1), tape.constant(as_tensor(measurements[i])), phi,
                                  lambda, n);
    total.total += tape.value(l.total)[0];
    total.err += tape.value(l.err)[0];
    total.mc += tape.value(l.mc)[0];
  }
  return total;
}

sensing::Ratio sample_cr(std::span<const sensing::Ratio> cr_list, Rng& rng) {
  if (cr_list.empty()) throw ConfigError("cannot sample from an empty compression-ratio list");
  return cr_list[rng.index(cr_list.size())];
}

}  // namespace csmc::train
