#include "csmc/unfold/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csmc/error.hpp"
#include "csmc/random.hpp"
#include "csmc/unfold/itp.hpp"

namespace csmc::unfold {

using sensing::Ratio;

Ratio ModelConfig::cr_max() const {
  if (cr_list.empty()) throw ConfigError("model has an empty rate list");
  return *std::max_element(cr_list.begin(), cr_list.end());
}

Ratio ModelConfig::cr_min() const {
  if (cr_list.empty()) throw ConfigError("model has an empty rate list");
  return *std::min_element(cr_list.begin(), cr_list.end());
}

std::size_t ModelConfig::max_measurements() const { return sensing::measurement_count(cr_max(), block); }

std::size_t ModelConfig::stage_measurements(Ratio cr) const {
  return itp ? max_measurements() : sensing::measurement_count(cr, block);
}

std::size_t ModelConfig::hypotheses() const { return mhme::hypothesis_count(block, hypothesis_stride); }

bool ModelConfig::supports(Ratio cr) const { return std::find(cr_list.begin(), cr_list.end(), cr) != cr_list.end(); }

Ratio ModelConfig::rate_for_channels(std::size_t channels) const {
  for (Ratio cr : cr_list) {
    if (sensing::measurement_count(cr, block) == channels) return cr;
  }
  throw UnsupportedRateError("no trained compression ratio yields " + std::to_string(channels) +
                             " measurements per block");
}

void ModelConfig::validate() const {
  if (block == 0) throw ConfigError("block size must be positive");
  if (stages == 0) throw ConfigError("a model needs at least one stage");
  if (cr_list.empty()) throw ConfigError("a model needs at least one compression ratio");
  for (Ratio cr : cr_list) {
    if (cr.milli() == 0 || cr.milli() > 1000) throw ConfigError("compression ratio " + to_string(cr) + " outside (0, 1]");
    if (sensing::measurement_count(cr, block) == 0) {
      throw ConfigError("compression ratio " + to_string(cr) + " yields no measurements at B=" + std::to_string(block));
    }
  }
  auto sorted = cr_list;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("duplicate compression ratio in rate list");
  }
  if (!itp && cr_list.size() != 1) throw ConfigError("a model without ITP decodes exactly one compression ratio");
  if (itp && amplification_factor(cr_min(), cr_max()) == 0) throw ConfigError("invalid ITP rate range");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("fusion weight alpha must lie in [0, 1]");
  if (conv.channels.empty() || conv.channels.front() != 1 || conv.channels.back() != 1) {
    throw ConfigError("conv stack must map 1 channel to 1 channel");
  }
  if (conv.kernel % 2 == 0) throw ConfigError("conv kernel size must be odd");
  if (hypothesis_stride == 0) throw ConfigError("hypothesis stride must be positive");
}

namespace {

double fan_in_bound(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

diff::Tensor uniform_tensor(diff::Shape shape, double bound, Rng& rng) {
  diff::Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

ReconBranch make_branch(std::size_t inputs, std::size_t block, const ConvStackSpec& spec, Rng& rng) {
  ReconBranch b;
  const std::size_t area = block * block;
  const double bound = fan_in_bound(inputs);
  b.fc.weight = uniform_tensor({area, inputs}, bound, rng);
  b.fc.bias = uniform_tensor({area}, bound, rng);
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const std::size_t cin = spec.channels[l], cout = spec.channels[l + 1];
    const double kb = fan_in_bound(cin * spec.kernel * spec.kernel);
    ConvLayer layer;
    layer.kernel = uniform_tensor({cout, cin, spec.kernel, spec.kernel}, kb, rng);
    layer.bias = uniform_tensor({cout}, kb, rng);
    b.convs.push_back(std::move(layer));
  }
  return b;
}

template <typename Model, typename Out>
void visit_parameters(Model& model, Out&& emit) {
  auto branch = [&](const std::string& prefix, auto& b) {
    emit(prefix + ".fc.weight", b.fc.weight);
    emit(prefix + ".fc.bias", b.fc.bias);
    for (std::size_t l = 0; l < b.convs.size(); ++l) {
      emit(prefix + ".conv" + std::to_string(l) + ".kernel", b.convs[l].kernel);
      emit(prefix + ".conv" + std::to_string(l) + ".bias", b.convs[l].bias);
    }
  };
  for (std::size_t s = 0; s < model.stages.size(); ++s) {
    auto& st = model.stages[s];
    const std::string prefix = "stage" + std::to_string(s);
    if (st.preliminary) branch(prefix + ".pre", *st.preliminary);
    emit(prefix + ".mhme.weight", st.mhme.weight);
    emit(prefix + ".mhme.bias", st.mhme.bias);
    branch(prefix + ".res", st.residual);
  }
  if (model.itp) emit(std::string("itp.kernel"), model.itp->kernel);
}

}  // namespace

ModelParams init_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  ModelParams model;
  model.config = config;
  const std::size_t width = config.stage_measurements(config.cr_list.front());
  for (std::size_t s = 0; s < config.stages; ++s) {
    StageParams st;
    if (s == 0) st.preliminary = make_branch(width, config.block, config.conv, rng);
    st.mhme = mhme::make_mhme_params(width, config.window_pixels(), config.hypotheses());
    st.residual = make_branch(width, config.block, config.conv, rng);
    model.stages.push_back(std::move(st));
  }
  if (config.itp) {
    model.itp = make_itp_params(config.cr_min(), config.cr_max(), config.cr_list, config.block);
  }
  return model;
}

std::vector<diff::NamedTensor> named_parameters(ModelParams& model) {
  std::vector<diff::NamedTensor> out;
  visit_parameters(model, [&](std::string name, diff::Tensor& t) { out.push_back({std::move(name), &t}); });
  return out;
}

std::vector<ConstNamedTensor> named_parameters(const ModelParams& model) {
  std::vector<ConstNamedTensor> out;
  visit_parameters(model, [&](std::string name, const diff::Tensor& t) { out.push_back({std::move(name), &t}); });
  return out;
}

std::size_t parameter_count(const ModelParams& model) {
  std::size_t n = 0;
  for (const auto& p : named_parameters(model)) n += p.tensor->size();
  return n;
}

void zero_grad(ModelParams& model) {
  for (auto& p : named_parameters(model)) p.tensor->zero_grad();
}

}  // namespace csmc::unfold
