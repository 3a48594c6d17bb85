#include "csmc/train/trainer.hpp"

#include <cmath>
#include <iomanip>
#include <locale>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "csmc/diffcore/adam.hpp"
#include "csmc/diffcore/ops.hpp"
#include "csmc/error.hpp"
#include "csmc/random.hpp"
#include "csmc/sensing/sampling.hpp"
#include "csmc/train/loss.hpp"
#include "csmc/unfold/decoder.hpp"
#include "csmc/unfold/stage.hpp"

namespace csmc::train {

using sensing::FramePlane;
using sensing::Ratio;

void write_log_line(std::ostream& out, const TrainLogEntry& entry) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << entry.iter << ',' << std::setprecision(9) << entry.loss << ',' << entry.l_err << ',' << entry.l_mc << ','
    << to_string(entry.cr) << '\n';
  out << s.str();
}

namespace {

struct SampleRef {
  std::size_t clip, t, gy, gx;
};

class BatchSampler {
 public:
  BatchSampler(std::size_t n, Rng& rng) : order_(n), rng_(rng) {
    for (std::size_t i = 0; i < n; ++i) order_[i] = i;
    shuffle();
  }

  std::vector<std::size_t> next(std::size_t count) {
    std::vector<std::size_t> out;
    out.reserve(count);
    while (out.size() < count) {
      if (cursor_ == order_.size()) shuffle();
      out.push_back(order_[cursor_++]);
    }
    return out;
  }

 private:
  void shuffle() {
    for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng_.index(i)]);
    cursor_ = 0;
  }

  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  Rng& rng_;
};

double cosine_lr(const TrainConfig& cfg, std::size_t iter) {
  if (cfg.iterations <= 1 || cfg.lr_final_fraction == 1.0) return cfg.lr;
  const double progress = static_cast<double>(iter) / static_cast<double>(cfg.iterations - 1);
  const double f = cfg.lr_final_fraction;
  return cfg.lr * (f + (1.0 - f) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

void check_config(const unfold::ModelParams& model, const std::vector<Clip>& clips,
                  const sensing::MeasurementOperator& op, const TrainConfig& cfg) {
  const auto& mc = model.config;
  if (!(cfg.lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(cfg.lr_final_fraction > 0.0 && cfg.lr_final_fraction <= 1.0)) {
    throw ConfigError("lr_final_fraction must lie in (0, 1]");
  }
  if (!(cfg.mhme_weight_lr_scale >= 0.0)) throw ConfigError("mhme_weight_lr_scale must be non-negative");
  if (!(cfg.lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (cfg.batch_size == 0) throw ConfigError("batch size must be positive");
  if (op.block() != mc.block) throw GeometryError("operator and model disagree on the block size");
  for (Ratio cr : cfg.cr_list) {
    if (!mc.supports(cr)) throw UnsupportedRateError("training rate " + to_string(cr) + " is not in the model's list");
  }
  if (clips.empty()) throw ConfigError("no training clips");
  for (const auto& clip : clips) {
    for (const auto& f : clip) sensing::check_geometry(f, mc.block);
    if (clip.size() > 1 && (clip.front().height < 2 * mc.block || clip.front().width < 2 * mc.block)) {
      throw GeometryError("motion estimation needs frames of at least twice the block size");
    }
  }
}

}  // namespace

TrainReport train_loop(unfold::ModelParams& model, const std::vector<Clip>& clips,
                       const sensing::MeasurementOperator& op, const TrainConfig& cfg, std::ostream* log) {
  check_config(model, clips, op, cfg);
  auto& mc = model.config;
  const std::size_t block = mc.block;

  if (cfg.fit_normalization) {
    std::vector<FramePlane> all;
    for (const auto& clip : clips) all.insert(all.end(), clip.begin(), clip.end());
    mc.norm = sensing::compute_norm_stats(all);
  }

  std::vector<std::vector<FramePlane>> norm_clips;
  std::vector<SampleRef> samples;
  for (std::size_t c = 0; c < clips.size(); ++c) {
    auto& nc = norm_clips.emplace_back();
    for (const auto& f : clips[c]) nc.push_back(sensing::normalize(f, mc.norm));
    const std::size_t gh = clips[c].empty() ? 0 : clips[c].front().height / block;
    const std::size_t gw = clips[c].empty() ? 0 : clips[c].front().width / block;
    for (std::size_t t = cfg.key_frames ? 0 : 1; t < clips[c].size(); ++t) {
      for (std::size_t gy = 0; gy < gh; ++gy) {
        for (std::size_t gx = 0; gx < gw; ++gx) samples.push_back({c, t, gy, gx});
      }
    }
  }
  if (samples.empty()) throw ConfigError("training data yields no blocks");

  // refs[c][t] is the normalized reference for frame t (t >= 1).
  std::vector<std::vector<FramePlane>> refs(clips.size());
  auto set_ground_truth_refs = [&] {
    for (std::size_t c = 0; c < clips.size(); ++c) {
      refs[c].assign(norm_clips[c].begin(), norm_clips[c].end());
    }
  };
  auto set_decoded_refs = [&] {
    const Ratio cr = mc.cr_max();
    const auto view = op.rate_view(cr);
    const mhme::ReferenceBuffer none;
    for (std::size_t c = 0; c < clips.size(); ++c) {
      for (std::size_t t = 0; t + 1 < clips[c].size(); ++t) {
        const auto grid = sensing::sample_frame(view, clips[c][t], cr);
        refs[c][t] = sensing::normalize(unfold::reconstruct_frame(model, op, grid, none), mc.norm);
      }
    }
  };
  set_ground_truth_refs();
  const bool self_decoded = cfg.references == ReferenceMode::self_decoded;
  if (self_decoded && cfg.reference_warmup == 0) set_decoded_refs();

  diff::Binder bind;
  std::vector<diff::NamedTensor> params, mhme_weights;
  for (auto& p : unfold::named_parameters(model)) {
    bind.track(*p.tensor);
    const bool slow = cfg.mhme_weight_lr_scale != 1.0 && p.name.ends_with(".mhme.weight");
    (slow ? mhme_weights : params).push_back(std::move(p));
  }
  diff::AdamState adam, mhme_adam;
  adam.config.lr = cfg.lr;
  mhme_adam.config.lr = cfg.lr * cfg.mhme_weight_lr_scale;

  Rng rng(cfg.seed);
  BatchSampler sampler(samples.size(), rng);
  const std::size_t batch = std::min(cfg.batch_size, samples.size());
  const std::vector<Ratio>& rates = cfg.cr_list.empty() ? mc.cr_list : cfg.cr_list;
  const auto stage_view = mc.itp ? op.row_view(mc.max_measurements()) : op.rate_view(mc.cr_list.front());

  TrainReport report;
  for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
    if (self_decoded && iter > 0) {
      const bool first = iter == cfg.reference_warmup;
      const bool refresh = cfg.reference_refresh > 0 && iter > cfg.reference_warmup &&
                           (iter - cfg.reference_warmup) % cfg.reference_refresh == 0;
      if (first || refresh) set_decoded_refs();
    }

    const Ratio cr = mc.itp ? sample_cr(rates, rng) : mc.cr_list.front();
    const auto raw_view = op.rate_view(cr);
    unfold::zero_grad(model);

    LossValue total;
    for (std::size_t idx : sampler.next(batch)) {
      const SampleRef& s = samples[idx];
      const FramePlane& frame = norm_clips[s.clip][s.t];
      diff::Tape tape;
      const auto target = tape.constant(diff::Tensor({block * block}, sensing::extract_block(frame, block, s.gy, s.gx)));
      const auto phi_raw = tape.constant_ref(raw_view.matrix());
      const auto phi = mc.itp ? tape.constant_ref(stage_view.matrix()) : phi_raw;
      const auto y = tape.constant(tape.value(diff::linear(tape, target, phi_raw)));

      unfold::BlockContext ctx;
      if (s.t > 0) {
        const FramePlane& ref = refs[s.clip][s.t - 1];
        auto hyp = mhme::extract_hypotheses(ref, {s.gy, s.gx}, block, mc.hypothesis_stride);
        auto win = mhme::search_window(ref, {s.gy, s.gx}, block);
        ctx.hypotheses = tape.constant(std::move(hyp.rows));
        const std::size_t win_size = win.pixels.size();
        ctx.window = tape.constant(diff::Tensor({win_size}, std::move(win.pixels)));
      }
      const auto fwd = unfold::forward_block(tape, bind, model, phi, y, cr, ctx);
      std::vector<diff::Var> mixes;
      for (const auto& st : fwd.stages) mixes.push_back(st.mix);
      const auto l = block_loss(tape, fwd.output(), target, mixes, y, phi_raw, cfg.lambda, batch);
      tape.backward(l.total);
      total.total += tape.value(l.total)[0];
      total.err += tape.value(l.err)[0];
      total.mc += tape.value(l.mc)[0];
    }

    if (!std::isfinite(total.total)) {
      throw DivergenceError("loss became non-finite at iteration " + std::to_string(iter));
    }
    TrainLogEntry entry{iter, total.total, total.err, total.mc, cr};
    if (log) write_log_line(*log, entry);
    report.log.push_back(entry);
    report.iterations = iter + 1;
    if (cfg.stop_below_err && total.err < *cfg.stop_below_err) break;
    const double lr = cosine_lr(cfg, iter);
    diff::adam_step(params, adam, lr);
    if (!mhme_weights.empty() && cfg.mhme_weight_lr_scale > 0.0) {
      diff::adam_step(mhme_weights, mhme_adam, lr * cfg.mhme_weight_lr_scale);
    }
  }
  return report;
}

}  // namespace csmc::train
