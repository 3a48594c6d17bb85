#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csmc/diffcore/adam.hpp"
#include "csmc/diffcore/tensor.hpp"
#include "csmc/mhme/predictor.hpp"
#include "csmc/sensing/frame.hpp"
#include "csmc/sensing/operator.hpp"

namespace csmc::unfold {

/// Channel counts of a same-size conv stack, input first. {1, 64, 32, 1}
/// is three layers; {1} is an empty stack.
struct ConvStackSpec {
  std::vector<std::size_t> channels{1, 64, 32, 1};
  std::size_t kernel = 3;

  std::size_t layers() const { return channels.empty() ? 0 : channels.size() - 1; }
  friend bool operator==(const ConvStackSpec&, const ConvStackSpec&) = default;
};

/// Selection-index convention recorded in model files. Only one exists:
/// 1-based index round-half-up(i * CR / CR_min), clamped to the channel count.
inline constexpr std::uint32_t kSelectOneBasedRoundHalfUp = 1;

struct ModelConfig {
  std::size_t block = 16;
  std::size_t stages = 1;
  /// Rates the model decodes. A model without ITP has exactly one.
  std::vector<sensing::Ratio> cr_list;
  bool itp = false;
  ConvStackSpec conv;
  std::size_t hypothesis_stride = 1;
  /// Fusion weight of the preliminary estimate; the prediction gets 1 - alpha.
  double alpha = 0.5;
  /// When false, stages after the first reuse the first stage's prediction.
  bool mhme_every_stage = true;
  std::uint64_t operator_seed = 0;
  sensing::NormStats norm;

  sensing::Ratio cr_max() const;
  sensing::Ratio cr_min() const;
  /// round(CR_max * B^2).
  std::size_t max_measurements() const;
  /// Width of the measurement vector the stages consume at rate `cr`.
  std::size_t stage_measurements(sensing::Ratio cr) const;
  std::size_t hypotheses() const;
  std::size_t window_pixels() const { return 4 * block * block; }
  bool supports(sensing::Ratio cr) const;
  /// Rate in cr_list whose measurement count equals `channels`.
  sensing::Ratio rate_for_channels(std::size_t channels) const;
  void validate() const;
};

struct LinearParams {
  diff::Tensor weight;  // out x in
  diff::Tensor bias;    // out
};

struct ConvLayer {
  diff::Tensor kernel;  // F x C x k x k
  diff::Tensor bias;    // F
};

/// Fully connected layer to a B x B block followed by a conv stack.
struct ReconBranch {
  LinearParams fc;
  std::vector<ConvLayer> convs;
};

struct StageParams {
  /// Only the first stage has its own preliminary branch; later stages start
  /// from the previous stage's output.
  std::optional<ReconBranch> preliminary;
  mhme::MhmeParams mhme;
  ReconBranch residual;
};

struct ItpParams {
  std::size_t factor = 1;  // A = floor(CR_max / CR_min)
  diff::Tensor kernel;     // A
  sensing::Ratio cr_min;
  sensing::Ratio cr_max;
  std::vector<sensing::Ratio> cr_list;
  std::size_t max_measurements = 0;
};

struct ModelParams {
  ModelConfig config;
  std::vector<StageParams> stages;
  std::optional<ItpParams> itp;
};

/// Random initialization: fully connected and conv layers draw weights and
/// biases from U(-1/sqrt(fan_in), 1/sqrt(fan_in)); the MHME predictor starts
/// at zero weights with a uniform bias; the ITP kernel starts at ones.
ModelParams init_model(const ModelConfig& config, std::uint64_t seed);

/// Every trainable tensor with a stable dotted name, in a fixed order.
std::vector<diff::NamedTensor> named_parameters(ModelParams& model);

struct ConstNamedTensor {
  std::string name;
  const diff::Tensor* tensor = nullptr;
};
std::vector<ConstNamedTensor> named_parameters(const ModelParams& model);

std::size_t parameter_count(const ModelParams& model);

void zero_grad(ModelParams& model);

}  // namespace csmc::unfold
