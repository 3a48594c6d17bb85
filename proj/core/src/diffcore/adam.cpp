#include "csmc/diffcore/adam.hpp"

#include <cmath>

#include "csmc/error.hpp"

namespace csmc::diff {

void adam_step(std::span<const NamedTensor> params, AdamState& state) {
  adam_step(params, state, state.config.lr);
}

void adam_step(std::span<const NamedTensor> params, AdamState& state, double lr) {
  for (const auto& p : params) {
    if (p.tensor == nullptr || !p.tensor->has_grad()) {
      throw OptimizerError("parameter '" + p.name + "' has no gradient");
    }
  }
  if (state.step_count == 0) {
    state.first_moment.clear();
    state.second_moment.clear();
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.tensor->size(), 0.0);
      state.second_moment.emplace_back(p.tensor->size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw OptimizerError("parameter list changed size between Adam steps");
  }

  const auto& cfg = state.config;
  state.step_count += 1;
  const double step = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(cfg.beta1, step);
  const double correction2 = 1.0 - std::pow(cfg.beta2, step);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& t = *params[i].tensor;
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    if (m.size() != t.size()) {
      throw OptimizerError("parameter '" + params[i].name + "' changed size between Adam steps");
    }
    const auto g = t.grad();
    auto w = t.data();
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      w[j] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

}  // namespace csmc::diff
