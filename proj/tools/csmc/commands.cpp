#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "csmc/error.hpp"
#include "csmc/io/keyvalue.hpp"
#include "csmc/io/measurement_file.hpp"
#include "csmc/io/metrics.hpp"
#include "csmc/io/model_file.hpp"
#include "csmc/io/pgm.hpp"
#include "csmc/io/y4m.hpp"
#include "csmc/sensing/sampling.hpp"
#include "csmc/train/evaluate.hpp"
#include "csmc/train/trainer.hpp"
#include "csmc/unfold/decoder.hpp"

namespace fs = std::filesystem;

namespace csmc::cli {

using sensing::FramePlane;
using sensing::MeasurementOperator;
using sensing::Ratio;

namespace {

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.is_regular_file() && e.path().extension() == ".y4m") found.push_back(e.path().string());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(in);
    }
  }
  if (files.empty()) throw ConfigError("no Y4M inputs found");
  return files;
}

train::Clip load_clip(const std::string& path, std::size_t block) {
  train::Clip clip;
  for (const auto& f : io::read_y4m(path)) clip.push_back(sensing::center_crop(f, block));
  if (clip.empty()) throw ConfigError(path + " has no frames");
  return clip;
}

MeasurementOperator model_operator(const unfold::ModelParams& model, const std::optional<std::string>& op_path) {
  const auto& c = model.config;
  if (!op_path) return MeasurementOperator::make(c.block, c.cr_max(), c.operator_seed);
  auto op = MeasurementOperator::load(*op_path);
  if (op.block() != c.block) {
    throw GeometryError("operator block size " + std::to_string(op.block()) + " differs from model block size " +
                        std::to_string(c.block));
  }
  if (op.seed() != c.operator_seed) throw ConfigError("operator seed differs from the one the model was trained with");
  return op;
}

std::string frame_name(std::size_t t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04zu.pgm", t);
  return buf;
}

train::ReferenceMode parse_reference_mode(const std::string& v) {
  if (v == "ground_truth") return train::ReferenceMode::ground_truth;
  if (v == "self_decoded") return train::ReferenceMode::self_decoded;
  throw ConfigError("references must be ground_truth or self_decoded, got " + v);
}

std::vector<Ratio> to_ratios(const std::vector<double>& values) {
  std::vector<Ratio> out;
  for (double v : values) out.push_back(Ratio::from_double(v));
  return out;
}

}  // namespace

int make_operator(const MakeOperatorArgs& a) {
  const auto op = MeasurementOperator::make(a.block, a.cr_max, a.seed);
  op.save(a.out);
  std::cout << "operator B=" << op.block() << " rows=" << op.max_rows() << " seed=" << op.seed() << " -> " << a.out
            << '\n';
  return kOk;
}

int make_dataset(const MakeDatasetArgs& a) {
  fs::create_directories(a.out_dir);
  const train::MotionSpec motion{a.dy, a.dx, a.jitter};
  const auto clips = train::make_synthetic_clips(a.clips, a.frames, {a.height, a.width}, motion, a.seed, a.block);
  for (std::size_t i = 0; i < clips.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "clip_%04zu.y4m", i);
    io::write_y4m((fs::path(a.out_dir) / name).string(), clips[i]);
  }
  std::cout << "wrote " << clips.size() << " clips of " << a.frames << " frames to " << a.out_dir << '\n';
  return kOk;
}

int sample(const SampleArgs& a) {
  const auto op = MeasurementOperator::load(a.op_path);
  const Ratio cr = Ratio::from_double(a.cr);
  const auto view = op.rate_view(cr);
  io::MeasurementStream stream;
  stream.block = op.block();
  stream.operator_seed = op.seed();
  for (const auto& f : io::read_y4m(a.in)) stream.frames.push_back(sensing::sample_frame(view, f, cr));
  if (stream.frames.empty()) throw ConfigError(a.in + " has no frames");
  io::write_measurements(a.out, stream);
  std::cout << "sampled " << stream.frames.size() << " frames at CR " << to_string(cr) << " (" << view.rows()
            << " measurements per block) -> " << a.out << '\n';
  return kOk;
}

int reconstruct(const ReconstructArgs& a) {
  const auto model = io::load_model(a.model);
  const auto stream = io::read_measurements(a.meas);
  if (stream.block != model.config.block) {
    throw GeometryError("measurements use block size " + std::to_string(stream.block) + ", model expects " +
                        std::to_string(model.config.block));
  }
  if (stream.operator_seed != model.config.operator_seed) {
    throw ConfigError("measurements were taken with a different operator than the model was trained with");
  }
  const auto op = model_operator(model, a.op_path);
  unfold::DecodeOptions opts;
  opts.use_mhme = !a.no_mhme;
  const auto frames = unfold::decode_sequence(model, op, stream.frames, opts);

  if (a.format == "pgm") {
    fs::create_directories(a.out);
    for (std::size_t t = 0; t < frames.size(); ++t) io::write_pgm((fs::path(a.out) / frame_name(t)).string(), frames[t]);
  } else {
    io::write_y4m(a.out, frames);
  }

  if (a.gt) {
    const auto gt = io::read_y4m(*a.gt);
    if (gt.size() < frames.size()) throw GeometryError("ground truth has fewer frames than the stream");
    std::cout << "frame,psnr,ssim\n";
    for (std::size_t t = 0; t < frames.size(); ++t) {
      const auto ref = sensing::center_crop(gt[t], model.config.block);
      std::cout << t << ',' << io::format_db(io::psnr(frames[t], ref), 4) << ','
                << io::format_db(io::ssim(frames[t], ref), 6) << '\n';
    }
  }
  std::cerr << "decoded " << frames.size() << " frames\n";
  return kOk;
}

int train(const TrainArgs& a) {
  const auto kv = io::KeyValueConfig::load(a.config);

  unfold::ModelConfig mc;
  mc.block = kv.get_uint("block", 16);
  mc.stages = kv.get_uint("stages", 1);
  mc.cr_list = to_ratios(kv.get_doubles("cr", {0.1}));
  mc.itp = kv.get_bool("itp", false);
  mc.conv.channels = kv.get_sizes("conv_channels", mc.conv.channels);
  mc.conv.kernel = kv.get_uint("conv_kernel", mc.conv.kernel);
  mc.hypothesis_stride = kv.get_uint("hypothesis_stride", 1);
  mc.alpha = kv.get_double("alpha", 0.5);
  mc.mhme_every_stage = kv.get_bool("mhme_every_stage", true);
  mc.operator_seed = kv.get_uint("operator_seed", 1);
  const auto init_seed = kv.get_uint("init_seed", 1);

  train::TrainConfig tc;
  tc.lambda = kv.get_double("lambda", tc.lambda);
  tc.lr = kv.get_double("lr", tc.lr);
  tc.lr_final_fraction = kv.get_double("lr_final_fraction", tc.lr_final_fraction);
  tc.mhme_weight_lr_scale = kv.get_double("mhme_weight_lr_scale", tc.mhme_weight_lr_scale);
  tc.batch_size = kv.get_uint("batch_size", tc.batch_size);
  tc.iterations = kv.get_uint("iterations", tc.iterations);
  tc.cr_list = to_ratios(kv.get_doubles("train_cr", {}));
  tc.seed = kv.get_uint("seed", tc.seed);
  tc.references = parse_reference_mode(kv.get_string("references", "self_decoded"));
  tc.reference_warmup = kv.get_uint("reference_warmup", tc.reference_warmup);
  tc.reference_refresh = kv.get_uint("reference_refresh", tc.reference_refresh);
  tc.key_frames = kv.get_bool("key_frames", tc.key_frames);
  if (kv.has("stop_below_err")) tc.stop_below_err = kv.get_double("stop_below_err", 0.0);

  std::vector<train::Clip> clips;
  if (const auto dir = kv.get("data_dir")) {
    for (const auto& f : expand_inputs({*dir})) clips.push_back(load_clip(f, mc.block));
  } else {
    const train::MotionSpec motion{static_cast<std::ptrdiff_t>(kv.get_double("motion_dy", 1)),
                                   static_cast<std::ptrdiff_t>(kv.get_double("motion_dx", 2)),
                                   static_cast<std::size_t>(kv.get_uint("motion_jitter", 0))};
    const train::Geometry geom{kv.get_uint("height", 64), kv.get_uint("width", 64)};
    clips = train::make_synthetic_clips(kv.get_uint("clips", 16), kv.get_uint("frames", 8), geom, motion,
                                        kv.get_uint("data_seed", 1), mc.block);
  }
  if (const auto unused = kv.unused_keys(); !unused.empty()) {
    std::string list;
    for (const auto& k : unused) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config keys: " + list);
  }

  auto model = unfold::init_model(mc, init_seed);
  const auto op = MeasurementOperator::make(mc.block, mc.cr_max(), mc.operator_seed);

  std::ofstream log_file;
  std::ostream* log = &std::cout;
  if (a.log) {
    log_file.open(*a.log, std::ios::app);
    if (!log_file) throw Error("cannot open " + *a.log);
    log = &log_file;
  }
  const auto report = train::train_loop(model, clips, op, tc, log);
  io::save_model(a.out, model);
  std::cerr << "trained " << report.iterations << " iterations, " << unfold::parameter_count(model)
            << " parameters -> " << a.out << '\n';
  return kOk;
}

int eval(const EvalArgs& a) {
  const auto model = io::load_model(a.model);
  const auto op = model_operator(model, std::nullopt);
  std::vector<train::Clip> clips;
  for (const auto& f : expand_inputs(a.inputs)) clips.push_back(load_clip(f, model.config.block));
  const auto crs = a.crs.empty() ? model.config.cr_list : to_ratios(a.crs);
  unfold::DecodeOptions opts;
  opts.use_mhme = !a.no_mhme;
  std::cout << "cr,psnr,ssim,frames\n";
  for (Ratio cr : crs) {
    const auto r = train::evaluate_clips(model, op, clips, cr, opts, a.first_frame);
    std::cout << to_string(cr) << ',' << io::format_db(r.psnr, 4) << ',' << io::format_db(r.ssim, 6) << ','
              << r.frames << '\n';
  }
  return kOk;
}

}  // namespace csmc::cli
