#include <benchmark/benchmark.h>

#include "csmc/diffcore/ops.hpp"
#include "csmc/mhme/hypotheses.hpp"
#include "csmc/random.hpp"
#include "csmc/sensing/sampling.hpp"
#include "csmc/unfold/decoder.hpp"
#include "csmc/unfold/stage.hpp"

using namespace csmc;

namespace {

sensing::FramePlane random_frame(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  sensing::FramePlane f;
  f.height = h;
  f.width = w;
  f.values.resize(h * w);
  for (double& v : f.values) v = rng.uniform(0.0, 255.0);
  return f;
}

unfold::ModelParams toy_model(std::size_t stages) {
  unfold::ModelConfig c;
  c.block = 16;
  c.stages = stages;
  c.cr_list = {sensing::Ratio::from_double(0.10)};
  c.conv.channels = {1, 8, 8, 1};
  return unfold::init_model(c, 1);
}

void BM_SampleFrame(benchmark::State& state) {
  const auto op = sensing::MeasurementOperator::make(16, 0.20, 1);
  const auto cr = sensing::Ratio::from_double(0.20);
  const auto view = op.rate_view(cr);
  const auto frame = random_frame(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(sensing::sample_frame(view, frame, cr));
}
BENCHMARK(BM_SampleFrame)->Arg(64)->Arg(256);

void BM_Conv2dSame(benchmark::State& state) {
  Rng rng(3);
  const std::size_t c = static_cast<std::size_t>(state.range(0));
  diff::Tensor x({c, 16, 16}), w({c, c, 3, 3}), b({c});
  for (double& v : x.data()) v = rng.normal();
  for (double& v : w.data()) v = rng.normal();
  for (auto _ : state) {
    diff::Tape tape(false);
    benchmark::DoNotOptimize(
        tape.value(diff::conv2d_same(tape, tape.constant_ref(x), tape.constant_ref(w), tape.constant_ref(b))));
  }
}
BENCHMARK(BM_Conv2dSame)->Arg(1)->Arg(8)->Arg(32);

void BM_ForwardBackwardBlock(benchmark::State& state) {
  auto model = toy_model(static_cast<std::size_t>(state.range(0)));
  const auto op = sensing::MeasurementOperator::make(16, 0.10, model.config.operator_seed);
  const auto view = op.rate_view(model.config.cr_list.front());
  const auto ref = sensing::normalize(random_frame(64, 64, 4), model.config.norm);
  const auto frame = sensing::normalize(random_frame(64, 64, 5), model.config.norm);
  const auto hyp = mhme::extract_hypotheses(ref, {1, 1}, 16, 1);
  const auto win = mhme::search_window(ref, {1, 1}, 16);
  diff::Binder bind;
  auto params = unfold::named_parameters(model);
  for (auto& p : params) bind.track(*p.tensor);
  for (auto _ : state) {
    diff::Tape tape;
    const auto x = tape.constant(diff::Tensor({256}, sensing::extract_block(frame, 16, 1, 1)));
    const auto phi = tape.constant_ref(view.matrix());
    const auto y = tape.constant(tape.value(diff::linear(tape, x, phi)));
    unfold::BlockContext ctx;
    ctx.hypotheses = tape.constant(hyp.rows);
    ctx.window = tape.constant(diff::Tensor({win.pixels.size()}, win.pixels));
    const auto fwd = unfold::forward_block(tape, bind, model, phi, y, model.config.cr_list.front(), ctx);
    tape.backward(diff::squared_distance(tape, fwd.output(), x));
  }
}
BENCHMARK(BM_ForwardBackwardBlock)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_ReconstructFrame(benchmark::State& state) {
  const auto model = toy_model(1);
  const auto op = sensing::MeasurementOperator::make(16, 0.10, model.config.operator_seed);
  const auto cr = model.config.cr_list.front();
  const auto grid = sensing::sample_frame(op.rate_view(cr), random_frame(64, 64, 6), cr);
  mhme::ReferenceBuffer ref;
  if (state.range(0) != 0) ref.store(random_frame(64, 64, 7));
  for (auto _ : state) benchmark::DoNotOptimize(unfold::reconstruct_frame(model, op, grid, ref, {}));
}
BENCHMARK(BM_ReconstructFrame)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
