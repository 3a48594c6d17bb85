#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "csmc/diffcore/tape.hpp"
#include "csmc/random.hpp"

namespace csmc::testing {

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::string worst;
};

/// Norm-wise relative error max|a - n| / max|n| of one gradient.
inline double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max(scale, std::abs(numeric[i]));
  }
  return scale > 1e-12 ? diff / scale : diff;
}

using OpBuilder = std::function<diff::Var(diff::Tape&, const std::vector<diff::Var>&)>;

/// Central finite differences of <g, op(inputs)> for a random cotangent g,
/// compared with the tape's vector-Jacobian product for every input.
inline GradcheckResult gradcheck(const std::vector<diff::Tensor>& inputs, const OpBuilder& build,
                                 std::uint64_t seed = 7, double h = 1e-6) {
  Rng rng(seed);
  std::vector<double> cotangent;
  auto evaluate = [&](const std::vector<diff::Tensor>& xs) {
    diff::Tape tape(false);
    std::vector<diff::Var> vars;
    for (const auto& x : xs) vars.push_back(tape.constant(x));
    const auto& out = tape.value(build(tape, vars));
    if (cotangent.empty()) {
      for (std::size_t i = 0; i < out.size(); ++i) cotangent.push_back(rng.uniform(-1.0, 1.0));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += cotangent[i] * out[i];
    return s;
  };
  evaluate(inputs);

  diff::Tape tape;
  std::vector<diff::Var> vars;
  for (const auto& x : inputs) vars.push_back(tape.variable(x));
  const diff::Var out = build(tape, vars);
  tape.backward(out, cotangent);

  GradcheckResult result;
  auto probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const auto g = tape.grad(vars[k]);
    std::vector<double> analytic(inputs[k].size(), 0.0);
    std::copy(g.begin(), g.end(), analytic.begin());
    std::vector<double> numeric(inputs[k].size());
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double x0 = probe[k][i];
      probe[k][i] = x0 + h;
      const double fp = evaluate(probe);
      probe[k][i] = x0 - h;
      const double fm = evaluate(probe);
      probe[k][i] = x0;
      numeric[i] = (fp - fm) / (2.0 * h);
    }
    const double err = relative_error(analytic, numeric);
    if (err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst = "input " + std::to_string(k);
    }
  }
  return result;
}

inline diff::Tensor random_tensor(diff::Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  diff::Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

/// Values bounded away from zero so ReLU kinks stay out of the stencil.
inline diff::Tensor random_away_from_zero(diff::Shape shape, Rng& rng) {
  diff::Tensor t(std::move(shape));
  for (double& v : t.data()) {
    const double m = rng.uniform(0.1, 1.0);
    v = rng.uniform() < 0.5 ? -m : m;
  }
  return t;
}

}  // namespace csmc::testing
