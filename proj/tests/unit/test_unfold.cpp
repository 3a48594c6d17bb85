#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "csmc/diffcore/ops.hpp"
#include "csmc/error.hpp"
#include "csmc/mhme/hypotheses.hpp"
#include "csmc/sensing/sampling.hpp"
#include "csmc/train/loss.hpp"
#include "csmc/unfold/decoder.hpp"
#include "csmc/unfold/itp.hpp"
#include "csmc/unfold/stage.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace csmc;
using namespace csmc::unfold;
using sensing::Ratio;

namespace {

Ratio r(double v) { return Ratio::from_double(v); }

const std::vector<Ratio> kRates{r(0.02), r(0.03), r(0.05), r(0.10), r(0.20)};

ModelConfig tiny_config(std::size_t stages, bool itp) {
  ModelConfig c;
  c.block = 4;
  c.stages = stages;
  c.cr_list = itp ? std::vector<Ratio>{r(0.25), r(0.5)} : std::vector<Ratio>{r(0.5)};
  c.itp = itp;
  c.conv.channels = {1, 2, 1};
  c.hypothesis_stride = 2;
  return c;
}

void randomize(ModelParams& m, Rng& rng) {
  for (auto& p : named_parameters(m)) {
    for (double& v : p.tensor->data()) v = rng.uniform(-0.5, 0.5);
  }
}

}  // namespace

TEST_SUITE("unfold") {
  TEST_CASE("ITP selection indices match hand enumeration") {
    const Ratio lo = r(0.02);
    const auto i20 = selection_indices(r(0.20), lo, 510, 51);
    for (std::size_t i = 0; i < 51; ++i) CHECK(i20[i] == 10 * (i + 1) - 1);
    const auto i10 = selection_indices(r(0.10), lo, 260, 51);
    for (std::size_t i = 0; i < 51; ++i) CHECK(i10[i] == 5 * (i + 1) - 1);
    const auto i05 = selection_indices(r(0.05), lo, 130, 51);
    CHECK(std::vector<std::size_t>(i05.begin(), i05.begin() + 4) == std::vector<std::size_t>{2, 4, 7, 9});
    CHECK(i05.back() == 127);
    const auto i03 = selection_indices(r(0.03), lo, 80, 51);
    CHECK(std::vector<std::size_t>(i03.begin(), i03.begin() + 3) == std::vector<std::size_t>{1, 2, 4});
    CHECK(i03.back() == 76);
    const auto i02 = selection_indices(r(0.02), lo, 50, 51);
    for (std::size_t i = 0; i < 50; ++i) CHECK(i02[i] == i);
    CHECK(i02[50] == 49);
  }

  TEST_CASE("ITP output has M_max channels at every rate") {
    const auto itp = make_itp_params(r(0.02), r(0.20), kRates, 16);
    CHECK(itp.factor == 10);
    CHECK(itp.max_measurements == 51);
    Rng rng(1);
    for (Ratio cr : kRates) {
      sensing::MeasurementGrid g;
      g.channels = sensing::measurement_count(cr, 16);
      g.grid_h = 2;
      g.grid_w = 3;
      g.cr = cr;
      g.data.resize(g.channels * 6);
      for (double& v : g.data) v = rng.uniform(-1.0, 1.0);
      CHECK(itp_expand(itp, g, 16).channels == 10 * g.channels);
      const auto out = itp_interpolate(itp, g, 16);
      CHECK(out.channels == 51);
      CHECK(out.grid_h == 2);
      CHECK(out.grid_w == 3);
    }
  }

  TEST_CASE("ITP rejects untrained rates and wrong channel counts") {
    const auto itp = make_itp_params(r(0.02), r(0.20), kRates, 16);
    sensing::MeasurementGrid g;
    g.channels = sensing::measurement_count(r(0.15), 16);
    g.grid_h = g.grid_w = 1;
    g.cr = r(0.15);
    g.data.assign(g.channels, 0.0);
    CHECK_THROWS_AS(itp_interpolate(itp, g, 16), UnsupportedRateError);
    g.cr = r(0.10);
    CHECK_THROWS_AS(itp_interpolate(itp, g, 16), DimensionError);
  }

  TEST_CASE("ITP Jacobian: each output depends on exactly one raw measurement") {
    auto itp = make_itp_params(r(0.02), r(0.20), kRates, 16);
    Rng rng(2);
    for (double& k : itp.kernel.data()) k = rng.uniform(0.5, 1.5);
    for (Ratio cr : kRates) {
      const std::size_t m = sensing::measurement_count(cr, 16);
      for (std::size_t o = 0; o < 51; ++o) {
        diff::Tape tape;
        const auto y = tape.variable(testing::random_tensor({m}, rng));
        const diff::Binder frozen;
        const auto out = itp_forward(tape, frozen, itp, y, cr, 16);
        std::vector<double> seed(51, 0.0);
        seed[o] = 1.0;
        tape.backward(out, seed);
        const auto g = tape.grad(y);
        CHECK(std::count_if(g.begin(), g.end(), [](double v) { return v != 0.0; }) == 1);
      }
    }
  }

  TEST_CASE("fuse weights must sum to one") {
    diff::Tape tape(false);
    auto a = tape.constant(diff::Tensor({2}, {1.0, 3.0}));
    auto b = tape.constant(diff::Tensor({2}, {3.0, 5.0}));
    const auto& out = tape.value(fuse(tape, a, b, 0.25, 0.75));
    CHECK(out[0] == doctest::Approx(2.5));
    CHECK(out[1] == doctest::Approx(4.5));
    CHECK_THROWS_AS(fuse(tape, a, b, 0.5, 0.6), ConfigError);
  }

  TEST_CASE("residual step is the identity for consistent measurements and a zero branch") {
    Rng rng(3);
    auto model = init_model(tiny_config(1, false), 1);
    auto& branch = model.stages[0].residual;
    for (auto& p : named_parameters(model)) {
      if (p.name.rfind("stage0.res.", 0) == 0) std::fill(p.tensor->data().begin(), p.tensor->data().end(), 0.0);
    }
    const auto op = sensing::MeasurementOperator::make(4, 0.5, 1);
    diff::Tape tape(false);
    const diff::Binder frozen;
    const auto mix = tape.constant(testing::random_tensor({16}, rng));
    const auto phi = tape.constant_ref(op.matrix());
    const auto y = diff::linear(tape, mix, phi);
    const auto out = residual_correct(tape, frozen, branch, phi, y, mix, 4);
    for (std::size_t i = 0; i < 16; ++i) CHECK(tape.value(out)[i] == doctest::Approx(tape.value(mix)[i]));
  }

  TEST_CASE("without a reference the stage bypasses fusion") {
    Rng rng(4);
    auto model = init_model(tiny_config(2, false), 2);
    const auto op = sensing::MeasurementOperator::make(4, 0.5, 2);
    diff::Tape tape(false);
    const diff::Binder frozen;
    const auto phi = tape.constant_ref(op.matrix());
    const auto y = tape.constant(testing::random_tensor({8}, rng));
    const auto fwd = forward_block(tape, frozen, model, phi, y, r(0.5), {});
    REQUIRE(fwd.stages.size() == 2);
    CHECK(fwd.stages[0].mix.id == fwd.stages[0].preliminary.id);
    CHECK_FALSE(fwd.stages[0].prediction.valid());
    CHECK(fwd.stages[1].preliminary.id == fwd.stages[0].output.id);
    CHECK_THROWS_AS(forward_block(tape, frozen, model, phi, y, r(0.25), {}), UnsupportedRateError);
  }

  TEST_CASE("model layout and parameter names") {
    const auto model = init_model(tiny_config(2, true), 3);
    std::set<std::string> names;
    for (const auto& p : named_parameters(model)) names.insert(p.name);
    CHECK(names.count("stage0.pre.fc.weight"));
    CHECK(names.count("stage0.pre.conv1.kernel"));
    CHECK_FALSE(names.count("stage1.pre.fc.weight"));
    CHECK(names.count("stage1.mhme.weight"));
    CHECK(names.count("stage1.res.conv0.bias"));
    CHECK(names.count("itp.kernel"));
    CHECK(model.stages[0].mhme.weight.dim(1) == 8 + 64);
    CHECK(model.stages[0].mhme.weight.dim(0) == 9);
    CHECK(std::all_of(model.itp->kernel.data().begin(), model.itp->kernel.data().end(),
                      [](double v) { return v == 1.0; }));
    CHECK(parameter_count(model) > 0);

    auto bad = tiny_config(1, false);
    bad.cr_list.push_back(r(0.25));
    CHECK_THROWS_AS(init_model(bad, 1), ConfigError);
    bad = tiny_config(1, false);
    bad.conv.kernel = 2;
    CHECK_THROWS_AS(init_model(bad, 1), ConfigError);
  }

  TEST_CASE("composed multi-stage graph passes finite differences") {
    for (const bool itp : {false, true}) {
      for (const bool every_stage : {true, false}) {
        CAPTURE(itp);
        CAPTURE(every_stage);
        Rng rng(5);
        auto cfg = tiny_config(2, itp);
        cfg.mhme_every_stage = every_stage;
        auto model = init_model(cfg, 4);
        randomize(model, rng);
        const Ratio cr = r(0.25);
        const auto op = sensing::MeasurementOperator::make(4, cfg.cr_max(), 5);
        const auto stage_view = itp ? op.row_view(cfg.max_measurements()) : op.rate_view(cfg.cr_list.front());
        const Ratio used = itp ? cr : cfg.cr_list.front();
        const auto used_view = op.rate_view(used);
        const auto ref = testing::random_frame(8, 8, rng, -1.0, 1.0);
        const auto target = testing::random_tensor({16}, rng);
        const auto hyp = mhme::extract_hypotheses(ref, {1, 0}, 4, 2);
        const auto win = mhme::search_window(ref, {1, 0}, 4);

        auto loss_value = [&](const diff::Binder& bind, bool backward) {
          diff::Tape tape(backward);
          const auto x = tape.constant(target);
          const auto phi_raw = tape.constant_ref(used_view.matrix());
          const auto phi = tape.constant_ref(stage_view.matrix());
          const auto y = tape.constant(tape.value(diff::linear(tape, x, phi_raw)));
          BlockContext ctx;
          ctx.hypotheses = tape.constant(hyp.rows);
          ctx.window = tape.constant(diff::Tensor({win.pixels.size()}, win.pixels));
          const auto fwd = forward_block(tape, bind, model, phi, y, used, ctx);
          std::vector<diff::Var> mixes;
          for (const auto& s : fwd.stages) mixes.push_back(s.mix);
          const auto l = train::block_loss(tape, fwd.output(), x, mixes, y, phi_raw, 0.5, 3);
          if (backward) tape.backward(l.total);
          return tape.value(l.total)[0];
        };

        diff::Binder bind;
        auto params = named_parameters(model);
        for (auto& p : params) bind.track(*p.tensor);
        zero_grad(model);
        loss_value(bind, true);

        const diff::Binder frozen;
        double worst = 0.0;
        std::string worst_name;
        for (auto& p : params) {
          std::vector<double> analytic(p.tensor->grad().begin(), p.tensor->grad().end());
          std::vector<double> numeric(p.tensor->size());
          for (std::size_t i = 0; i < p.tensor->size(); ++i) {
            const double x0 = (*p.tensor)[i];
            (*p.tensor)[i] = x0 + 1e-6;
            const double fp = loss_value(frozen, false);
            (*p.tensor)[i] = x0 - 1e-6;
            const double fm = loss_value(frozen, false);
            (*p.tensor)[i] = x0;
            numeric[i] = (fp - fm) / 2e-6;
          }
          const double err = testing::relative_error(analytic, numeric);
          if (err > worst) {
            worst = err;
            worst_name = p.name;
          }
        }
        CAPTURE(worst_name);
        CHECK(worst < 1e-4);
      }
    }
  }

  TEST_CASE("decoder checks geometry and rate") {
    auto cfg = tiny_config(1, false);
    const auto model = init_model(cfg, 6);
    const auto op = sensing::MeasurementOperator::make(4, 0.5, cfg.operator_seed);
    Rng rng(6);
    const auto frame = testing::random_frame(8, 8, rng);
    const auto grid = sensing::sample_frame(op.rate_view(r(0.5)), frame, r(0.5));
    mhme::ReferenceBuffer ref;
    const auto out = reconstruct_frame(model, op, grid, ref);
    CHECK(out.height == 8);
    CHECK(out.width == 8);
    CHECK(std::all_of(out.values.begin(), out.values.end(), [](double v) { return v >= 0.0 && v <= 255.0; }));

    ref.store(sensing::FramePlane(16, 8));
    CHECK_THROWS_AS(reconstruct_frame(model, op, grid, ref), GeometryError);
    const auto other = sensing::MeasurementOperator::make(8, 0.5, 1);
    CHECK_THROWS_AS(reconstruct_frame(model, other, grid, {}), GeometryError);
    auto wrong = grid;
    wrong.cr = r(0.25);
    wrong.channels = 4;
    wrong.data.resize(4 * 4);
    CHECK_THROWS_AS(reconstruct_frame(model, op, wrong, {}), UnsupportedRateError);
  }

  TEST_CASE("decode_sequence uses each decoded frame as the next reference") {
    auto cfg = tiny_config(1, false);
    auto model = init_model(cfg, 7);
    Rng rng(7);
    randomize(model, rng);
    const auto op = sensing::MeasurementOperator::make(4, 0.5, cfg.operator_seed);
    std::vector<sensing::MeasurementGrid> grids;
    for (int t = 0; t < 3; ++t) grids.push_back(sensing::sample_frame(op.rate_view(r(0.5)), testing::random_frame(8, 8, rng)));
    const auto frames = decode_sequence(model, op, grids);
    REQUIRE(frames.size() == 3);
    mhme::ReferenceBuffer ref;
    CHECK(reconstruct_frame(model, op, grids[0], ref) == frames[0]);
    ref.store(frames[0]);
    auto second = reconstruct_frame(model, op, grids[1], ref);
    second.index = 1;
    CHECK(second == frames[1]);
    DecodeOptions bypass;
    bypass.use_mhme = false;
    CHECK_FALSE(reconstruct_frame(model, op, grids[1], ref, bypass) == second);
  }
}
