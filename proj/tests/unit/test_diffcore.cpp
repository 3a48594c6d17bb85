#include <cmath>
#include <vector>

#include "doctest.h"
#include "csmc/diffcore/adam.hpp"
#include "csmc/diffcore/ops.hpp"
#include "csmc/error.hpp"
#include "gradcheck.hpp"

using namespace csmc;
using diff::Tape;
using diff::Tensor;
using diff::Var;
using testing::gradcheck;
using testing::random_tensor;

namespace {
constexpr double kTol = 1e-4;
}

TEST_SUITE("diffcore") {
  TEST_CASE("tensor shape bookkeeping") {
    Tensor t({2, 3}, 1.5);
    CHECK(t.size() == 6);
    CHECK(t.rank() == 2);
    CHECK(t.dim(1) == 3);
    CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
    CHECK_FALSE(t.has_grad());
    t.set_requires_grad(true);
    CHECK(t.grad().size() == 6);
    CHECK(std::all_of(t.grad().begin(), t.grad().end(), [](double g) { return g == 0.0; }));
  }

  TEST_CASE("linear forward matches hand computation") {
    Tape tape(false);
    auto x = tape.constant(Tensor({2}, {1.0, 2.0}));
    auto w = tape.constant(Tensor({2, 2}, {1.0, 2.0, 3.0, 4.0}));
    auto b = tape.constant(Tensor({2}, {0.5, -0.5}));
    const auto& out = tape.value(diff::linear(tape, x, w, b));
    CHECK(out[0] == doctest::Approx(5.5));
    CHECK(out[1] == doctest::Approx(10.5));
    CHECK_THROWS_AS(diff::linear(tape, tape.constant(Tensor({3})), w), DimensionError);
  }

  TEST_CASE("backward of a shared subexpression accumulates") {
    Tape tape;
    auto x = tape.variable(Tensor({1}, {3.0}));
    auto y = diff::add(tape, x, x);
    auto z = diff::squared_distance(tape, y, tape.constant(Tensor({1}, {0.0})));
    tape.backward(z);
    // z = (2x)^2, dz/dx = 8x
    CHECK(tape.grad(x)[0] == doctest::Approx(24.0));
  }

  TEST_CASE("gradient checks of every op") {
    Rng rng(11);
    SUBCASE("linear") {
      auto r = gradcheck({random_tensor({5}, rng), random_tensor({4, 5}, rng), random_tensor({4}, rng)},
                         [](Tape& t, const std::vector<Var>& v) { return diff::linear(t, v[0], v[1], v[2]); });
      CHECK(r.max_rel_error < kTol);
    }
    SUBCASE("combine_rows") {
      auto r = gradcheck({random_tensor({3}, rng), random_tensor({3, 6}, rng)},
                         [](Tape& t, const std::vector<Var>& v) { return diff::combine_rows(t, v[0], v[1]); });
      CHECK(r.max_rel_error < kTol);
    }
    SUBCASE("conv2d_same") {
      auto r = gradcheck({random_tensor({2, 5, 4}, rng), random_tensor({3, 2, 3, 3}, rng), random_tensor({3}, rng)},
                         [](Tape& t, const std::vector<Var>& v) { return diff::conv2d_same(t, v[0], v[1], v[2]); });
      CHECK(r.max_rel_error < kTol);
    }
    SUBCASE("conv2d_same with a 5x5 kernel") {
      auto r = gradcheck({random_tensor({1, 6, 6}, rng), random_tensor({2, 1, 5, 5}, rng)},
                         [](Tape& t, const std::vector<Var>& v) { return diff::conv2d_same(t, v[0], v[1]); });
      CHECK(r.max_rel_error < kTol);
    }
    SUBCASE("conv2d_valid_strided") {
      auto r = gradcheck({random_tensor({1, 4, 6}, rng), random_tensor({3, 1, 2, 2}, rng)},
                         [](Tape& t, const std::vector<Var>& v) {
                           return diff::conv2d_valid_strided(t, v[0], v[1], 2);
                         });
      CHECK(r.max_rel_error < kTol);
    }
    SUBCASE("relu") {
      auto r = gradcheck({testing::random_away_from_zero({8}, rng)},
                         [](Tape& t, const std::vector<Var>& v) { return diff::relu(t, v[0]); });
      CHECK(r.max_rel_error < kTol);
    }
    SUBCASE("add, sub, scale") {
      auto r = gradcheck({random_tensor({4}, rng), random_tensor({4}, rng)}, [](Tape& t, const std::vector<Var>& v) {
        return diff::scale(t, diff::sub(t, diff::add(t, v[0], v[1]), v[1]), -2.5);
      });
      CHECK(r.max_rel_error < kTol);
    }
    SUBCASE("squared_distance and mse") {
      auto r = gradcheck({random_tensor({6}, rng), random_tensor({6}, rng)}, [](Tape& t, const std::vector<Var>& v) {
        return diff::add(t, diff::squared_distance(t, v[0], v[1]), diff::mse(t, v[0], v[1]));
      });
      CHECK(r.max_rel_error < kTol);
    }
    SUBCASE("sum_scaled") {
      auto r = gradcheck({random_tensor({1}, rng), random_tensor({1}, rng), random_tensor({1}, rng)},
                         [](Tape& t, const std::vector<Var>& v) { return diff::sum_scaled(t, v, 0.3); });
      CHECK(r.max_rel_error < kTol);
    }
    SUBCASE("reshape, concat, pad_to") {
      auto r = gradcheck({random_tensor({2, 3}, rng), random_tensor({4}, rng)}, [](Tape& t, const std::vector<Var>& v) {
        const Var flat = diff::reshape(t, v[0], {6});
        const std::vector<Var> parts{flat, v[1]};
        return diff::pad_to(t, diff::concat(t, parts), 13);
      });
      CHECK(r.max_rel_error < kTol);
    }
    SUBCASE("channel_deconv and gather_channels") {
      auto r = gradcheck({random_tensor({3, 2, 2}, rng), random_tensor({4}, rng)},
                         [](Tape& t, const std::vector<Var>& v) {
                           const Var e = diff::channel_deconv(t, v[0], v[1]);
                           const std::vector<std::size_t> idx{0, 3, 3, 5, 11, 7};
                           return diff::gather_channels(t, e, idx);
                         });
      CHECK(r.max_rel_error < kTol);
    }
  }

  TEST_CASE("op shape errors") {
    Tape tape(false);
    auto x = tape.constant(Tensor({1, 4, 4}));
    CHECK_THROWS_AS(diff::conv2d_same(tape, x, tape.constant(Tensor({1, 1, 2, 2}))), UnsupportedKernelError);
    CHECK_THROWS_AS(diff::conv2d_valid_strided(tape, tape.constant(Tensor({1, 5, 4})), tape.constant(Tensor({1, 1, 2, 2})), 2),
                    GeometryError);
    CHECK_THROWS_AS(diff::add(tape, tape.constant(Tensor({2})), tape.constant(Tensor({3}))), DimensionError);
    CHECK_THROWS_AS(diff::pad_to(tape, tape.constant(Tensor({3})), 2), DimensionError);
  }

  TEST_CASE("parameters accumulate into their own gradient buffers") {
    Tensor w({1, 2}, {2.0, -1.0});
    diff::Binder bind;
    bind.track(w);
    for (int rep = 0; rep < 2; ++rep) {
      Tape tape;
      auto out = diff::linear(tape, tape.constant(Tensor({2}, {1.0, 3.0})), bind(tape, w));
      tape.backward(out);
    }
    CHECK(w.grad()[0] == doctest::Approx(2.0));
    CHECK(w.grad()[1] == doctest::Approx(6.0));
    w.zero_grad();
    CHECK(w.grad()[1] == 0.0);
  }

  TEST_CASE("adam first step moves by lr against the gradient sign") {
    Tensor p({1}, {0.5});
    p.set_requires_grad(true);
    p.grad()[0] = 1.0;
    std::vector<diff::NamedTensor> params{{"p", &p}};
    diff::AdamState state;
    diff::adam_step(params, state);
    CHECK(state.step_count == 1);
    CHECK(p[0] == doctest::Approx(0.5 - 1e-3).epsilon(1e-6));
    CHECK(state.first_moment[0][0] == doctest::Approx(0.1));
  }

  TEST_CASE("adam matches a hand-evaluated recurrence over several steps") {
    Tensor p({1}, {0.0});
    p.set_requires_grad(true);
    std::vector<diff::NamedTensor> params{{"p", &p}};
    diff::AdamState state;
    double m = 0, v = 0, x = 0;
    const double grads[] = {0.3, -1.2, 2.0, 0.01};
    for (int t = 1; t <= 4; ++t) {
      const double g = grads[t - 1];
      p.grad()[0] = g;
      diff::adam_step(params, state, 0.01);
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      const double mh = m / (1 - std::pow(0.9, t));
      const double vh = v / (1 - std::pow(0.999, t));
      x -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      CHECK(p[0] == doctest::Approx(x).epsilon(1e-12));
    }
  }

  TEST_CASE("adam rejects a parameter without gradient") {
    Tensor p({2}, 1.0);
    std::vector<diff::NamedTensor> params{{"orphan", &p}};
    diff::AdamState state;
    CHECK_THROWS_AS(diff::adam_step(params, state), OptimizerError);
  }
}
