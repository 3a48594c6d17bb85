#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "csmc/error.hpp"
#include "csmc/sensing/sampling.hpp"
#include "csmc/train/dataset.hpp"
#include "csmc/train/evaluate.hpp"
#include "csmc/train/loss.hpp"
#include "csmc/train/trainer.hpp"

using namespace csmc;
using namespace csmc::train;
using sensing::Ratio;

namespace {

unfold::ModelConfig small_config() {
  unfold::ModelConfig c;
  c.block = 4;
  c.cr_list = {Ratio::from_double(0.5)};
  c.conv.channels = {1, 2, 1};
  c.hypothesis_stride = 2;
  return c;
}

}  // namespace

TEST_SUITE("train") {
  TEST_CASE("loss matches hand computation") {
    const sensing::OperatorView view(1, diff::Tensor({1, 2}, {1.0, 2.0}));
    const std::vector<std::vector<double>> out{{1.0, 1.0}, {0.0, 0.0}};
    const std::vector<std::vector<double>> tgt{{0.0, 1.0}, {0.0, 2.0}};
    const std::vector<std::vector<double>> mix{{1.0, 0.0}, {0.0, 1.0}};
    const std::vector<std::vector<double>> y{{3.0}, {2.0}};
    // err: (1 + 4) / 4; mc: ((3-1)^2 + (2-2)^2) / 4
    const auto l = loss(out, tgt, mix, y, view, 0.5);
    CHECK(l.err == doctest::Approx(1.25));
    CHECK(l.mc == doctest::Approx(1.0));
    CHECK(l.total == doctest::Approx(1.75));
    CHECK_THROWS_AS(loss(out, tgt, mix, y, view, -1.0), ConfigError);
  }

  TEST_CASE("sample_cr draws only listed rates and covers them") {
    const std::vector<Ratio> rates{Ratio::from_double(0.02), Ratio::from_double(0.1), Ratio::from_double(0.2)};
    Rng rng(1);
    std::vector<int> hits(3, 0);
    for (int i = 0; i < 3000; ++i) {
      const Ratio cr = sample_cr(rates, rng);
      const auto it = std::find(rates.begin(), rates.end(), cr);
      REQUIRE(it != rates.end());
      ++hits[static_cast<std::size_t>(it - rates.begin())];
    }
    for (int h : hits) CHECK(h > 850);
    CHECK_THROWS_AS(sample_cr({}, rng), ConfigError);
  }

  TEST_CASE("synthetic clips translate by the motion vector") {
    const MotionSpec motion{1, -2, 0};
    const auto clip = make_synthetic_sequence(5, {32, 48}, motion, 3, 16);
    REQUIRE(clip.size() == 5);
    for (std::size_t t = 0; t + 1 < clip.size(); ++t) {
      for (std::size_t r = 0; r + 1 < 32; ++r) {
        for (std::size_t c = 2; c < 48; ++c) CHECK(clip[t + 1].at(r + 1, c - 2) == clip[t].at(r, c));
      }
    }
    for (const auto& f : clip) {
      for (double v : f.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 255.0);
      }
    }
    CHECK(make_synthetic_sequence(5, {32, 48}, motion, 3, 16) == clip);
    CHECK_FALSE(make_synthetic_sequence(5, {32, 48}, motion, 4, 16) == clip);
    CHECK_THROWS_AS(make_synthetic_sequence(2, {30, 32}, motion, 3, 16), GeometryError);
    const auto samples = make_synthetic_dataset(3, {16, 16}, {}, 1, 16);
    CHECK_FALSE(samples[0].x_ref.has_value());
    CHECK(samples[2].x_ref.value() == samples[1].x);
  }

  TEST_CASE("log lines are plain comma-separated values") {
    std::ostringstream s;
    write_log_line(s, {12, 1.5, 0.25, 2.5, Ratio::from_double(0.1)});
    CHECK(s.str() == "12,1.5,0.25,2.5,0.100\n");
  }

  TEST_CASE("training reduces the loss and logs every iteration") {
    auto model = unfold::init_model(small_config(), 1);
    const auto op = sensing::MeasurementOperator::make(4, 0.5, model.config.operator_seed);
    const auto clips = make_synthetic_clips(2, 3, {8, 8}, {1, 1, 0}, 5, 4);
    TrainConfig cfg;
    cfg.iterations = 150;
    cfg.batch_size = 8;
    cfg.references = ReferenceMode::self_decoded;
    cfg.reference_warmup = 50;
    cfg.reference_refresh = 50;
    std::ostringstream log;
    const auto report = train_loop(model, clips, op, cfg, &log);
    CHECK(report.iterations == 150);
    const std::string text = log.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 150);
    double first = 0, last = 0;
    for (int i = 0; i < 10; ++i) {
      first += report.log[static_cast<std::size_t>(i)].l_err;
      last += report.log[report.log.size() - 1 - static_cast<std::size_t>(i)].l_err;
    }
    CHECK(last < first);
    CHECK(model.config.norm.stddev > 1.0);
  }

  TEST_CASE("early stop and divergence") {
    auto model = unfold::init_model(small_config(), 2);
    const auto op = sensing::MeasurementOperator::make(4, 0.5, model.config.operator_seed);
    auto clips = make_synthetic_clips(1, 2, {8, 8}, {}, 5, 4);
    TrainConfig cfg;
    cfg.iterations = 50;
    cfg.batch_size = 4;
    cfg.stop_below_err = std::numeric_limits<double>::infinity();
    CHECK(train_loop(model, clips, op, cfg).iterations == 1);

    cfg.stop_below_err.reset();
    cfg.fit_normalization = false;
    clips[0][1].values[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(train_loop(model, clips, op, cfg), DivergenceError);
  }

  TEST_CASE("trainer validates its inputs") {
    auto model = unfold::init_model(small_config(), 3);
    const auto op = sensing::MeasurementOperator::make(4, 0.5, 0);
    const auto clips = make_synthetic_clips(1, 2, {8, 8}, {}, 5, 4);
    TrainConfig cfg;
    cfg.iterations = 1;
    cfg.lr = 0.0;
    CHECK_THROWS_AS(train_loop(model, clips, op, cfg), ConfigError);
    cfg.lr = 1e-3;
    cfg.cr_list = {Ratio::from_double(0.25)};
    CHECK_THROWS_AS(train_loop(model, clips, op, cfg), UnsupportedRateError);
    cfg.cr_list.clear();
    const auto wrong_block = sensing::MeasurementOperator::make(8, 0.5, 0);
    CHECK_THROWS_AS(train_loop(model, clips, wrong_block, cfg), GeometryError);
    const auto tiny = make_synthetic_clips(1, 2, {4, 4}, {}, 5, 4);
    CHECK_THROWS_AS(train_loop(model, tiny, op, cfg), GeometryError);
  }

  TEST_CASE("evaluation averages the selected frames") {
    const auto model = unfold::init_model(small_config(), 4);
    const auto op = sensing::MeasurementOperator::make(4, 0.5, model.config.operator_seed);
    const auto clips = make_synthetic_clips(2, 3, {8, 8}, {}, 6, 4);
    const auto r = evaluate_clips(model, op, clips, Ratio::from_double(0.5), {}, 1);
    CHECK(r.frames == 4);
    CHECK(std::isfinite(r.psnr));
    CHECK(r.ssim <= 1.0);
    CHECK_THROWS_AS(evaluate_clips(model, op, clips, Ratio::from_double(0.5), {}, 3), ConfigError);
  }
}
