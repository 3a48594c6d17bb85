#include "csmc/io/model_file.hpp"

#include <fstream>
#include <map>

#include "csmc/error.hpp"
#include "csmc/io/binary.hpp"
#include "csmc/unfold/itp.hpp"

namespace csmc::io {

using unfold::ModelConfig;
using unfold::ModelParams;

namespace {

std::uint32_t narrow(std::size_t v, const char* what) {
  if (v > UINT32_MAX) throw ConfigError(std::string(what) + " does not fit the model file");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void save_model(std::ostream& out, const ModelParams& model) {
  const ModelConfig& c = model.config;
  write_bytes(out, "CSKN");
  write_u32(out, kModelFileVersion);
  write_u32(out, narrow(c.block, "block size"));
  write_u32(out, narrow(c.stages, "stage count"));
  write_u32(out, narrow(c.cr_list.size(), "rate list"));
  for (auto cr : c.cr_list) write_u32(out, cr.milli());
  write_u32(out, narrow(c.conv.channels.size(), "conv stack"));
  for (auto ch : c.conv.channels) write_u32(out, narrow(ch, "channel count"));
  write_u32(out, narrow(c.conv.kernel, "kernel size"));
  write_u8(out, c.itp ? 1 : 0);
  write_u32(out, c.itp ? narrow(unfold::amplification_factor(c.cr_min(), c.cr_max()), "ITP factor") : 0);
  write_u32(out, unfold::kSelectOneBasedRoundHalfUp);
  write_u32(out, narrow(c.hypothesis_stride, "hypothesis stride"));
  write_f64(out, c.alpha);
  write_u8(out, c.mhme_every_stage ? 1 : 0);
  write_u64(out, c.operator_seed);
  write_f64(out, c.norm.mean);
  write_f64(out, c.norm.stddev);

  const auto params = unfold::named_parameters(model);
  write_u32(out, narrow(params.size(), "parameter count"));
  for (const auto& p : params) {
    write_u32(out, narrow(p.name.size(), "parameter name"));
    write_bytes(out, p.name);
    const auto& shape = p.tensor->shape();
    write_u32(out, narrow(shape.size(), "rank"));
    for (auto d : shape) write_u32(out, narrow(d, "dimension"));
    for (double v : p.tensor->data()) write_f32(out, static_cast<float>(v));
  }
  if (!out) throw Error("failed writing model");
}

void save_model(const std::string& path, const ModelParams& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  save_model(out, model);
}

ModelParams load_model(std::istream& in) {
  BinaryReader r(in);
  r.expect_magic("CSKN");
  const auto version_at = r.offset();
  if (const auto v = r.u32(); v != kModelFileVersion) {
    throw ParseError("unsupported model file version " + std::to_string(v), version_at);
  }
  ModelConfig c;
  c.block = r.u32();
  c.stages = r.u32();
  const auto n_cr = r.u32();
  if (n_cr > 64) throw ParseError("implausible rate list length", r.offset());
  for (std::uint32_t i = 0; i < n_cr; ++i) c.cr_list.push_back(sensing::Ratio::from_milli(r.u32()));
  const auto n_ch = r.u32();
  if (n_ch > 64) throw ParseError("implausible conv stack depth", r.offset());
  c.conv.channels.clear();
  for (std::uint32_t i = 0; i < n_ch; ++i) c.conv.channels.push_back(r.u32());
  c.conv.kernel = r.u32();
  c.itp = r.u8() != 0;
  const auto factor_at = r.offset();
  const auto factor = r.u32();
  const auto convention_at = r.offset();
  if (r.u32() != unfold::kSelectOneBasedRoundHalfUp) {
    throw ParseError("unknown channel-selection convention", convention_at);
  }
  c.hypothesis_stride = r.u32();
  c.alpha = r.f64();
  c.mhme_every_stage = r.u8() != 0;
  c.operator_seed = r.u64();
  c.norm.mean = r.f64();
  c.norm.stddev = r.f64();
  const auto header_end = r.offset();

  ModelParams model;
  try {
    c.validate();
    if (c.itp && factor != unfold::amplification_factor(c.cr_min(), c.cr_max())) {
      throw ParseError("ITP factor does not match the rate list", factor_at);
    }
    model = unfold::init_model(c, 0);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("invalid model header: ") + e.what(), header_end);
  }

  std::map<std::string, diff::Tensor*> slots;
  for (auto& p : unfold::named_parameters(model)) slots[p.name] = p.tensor;
  const auto count_at = r.offset();
  const auto count = r.u32();
  if (count != slots.size()) {
    throw ParseError("model stores " + std::to_string(count) + " parameters, header implies " +
                         std::to_string(slots.size()),
                     count_at);
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_at = r.offset();
    const auto len = r.u32();
    if (len > 256) throw ParseError("implausible parameter name length", name_at);
    const std::string name = r.bytes(len);
    auto it = slots.find(name);
    if (it == slots.end()) throw ParseError("unexpected parameter '" + name + "'", name_at);
    diff::Tensor* t = it->second;
    if (t == nullptr) throw ParseError("duplicate parameter '" + name + "'", name_at);
    const auto rank = r.u32();
    diff::Shape shape;
    if (rank > 8) throw ParseError("implausible rank for '" + name + "'", r.offset());
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(r.u32());
    if (shape != t->shape()) {
      throw ParseError("parameter '" + name + "' has shape " + diff::to_string(shape) + ", expected " +
                           diff::to_string(t->shape()),
                       r.offset());
    }
    for (double& v : t->data()) v = r.f32();
    it->second = nullptr;
  }
  return model;
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return load_model(in);
}

}  // namespace csmc::io
