#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "csmc/diffcore/tensor.hpp"

namespace csmc::diff {

struct NamedTensor {
  std::string name;
  Tensor* tensor = nullptr;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment estimates for one parameter list, in list order.
struct AdamState {
  AdamConfig config;
  std::uint64_t step_count = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

/// One bias-corrected Adam update. Every parameter must carry a gradient;
/// moments are created (zeroed) on the first call and the parameter list must
/// keep the same layout afterwards.
void adam_step(std::span<const NamedTensor> params, AdamState& state);

/// Same as above with the learning rate overridden for this step.
void adam_step(std::span<const NamedTensor> params, AdamState& state, double lr);

}  // namespace csmc::diff
