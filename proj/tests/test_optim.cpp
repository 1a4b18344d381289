// Copyright 2026 The AdaGraft Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "adagraft/optim.hpp"
#include "adagraft/rng.hpp"
#include "oracles.hpp"

namespace adagraft {
namespace {

AdaptiveConfig bare(double b1, double b2, double eps, bool pre, double lr) {
  AdaptiveConfig c;
  c.beta1 = b1;
  c.beta2 = b2;
  c.epsilon = eps;
  c.precondition = pre;
  c.lr = Schedule::constant(lr);
  return c;
}

TEST(InitState, ZeroAccumulators) {
  const ModelParams w({{"a", {1.0, 2.0}}, {"b", {3.0}}});
  const auto st = init_state(w);
  EXPECT_EQ(st.t, 0);
  EXPECT_TRUE(congruent(st.m1, w));
  EXPECT_EQ(global_norm(st.m1) + global_norm(st.m2), 0.0);
  EXPECT_EQ(init_state(w), st);
}

TEST(AdaptiveStep, PlainSgd) {
  const auto cfg = bare(0.0, 1.0, 0.0, false, 0.1);
  auto st = init_state(ModelParams::single({0.0, 0.0}));
  const auto d = adaptive_step(cfg, st, Gradient::single({2.0, -1.0}));
  EXPECT_DOUBLE_EQ(d.values(0)[0], -0.2);
  EXPECT_DOUBLE_EQ(d.values(0)[1], 0.1);
  EXPECT_EQ(st.t, 1);
}

TEST(AdaptiveStep, AdagradFirstStepIsMinusSign) {
  const auto cfg = bare(0.0, 1.0, 0.0, true, 1.0);
  auto st = init_state(ModelParams::single({0.0, 0.0}));
  const auto d = adaptive_step(cfg, st, Gradient::single({3.0, 4.0}));
  EXPECT_EQ(st.m2.values(0)[0], 9.0);
  EXPECT_EQ(st.m2.values(0)[1], 16.0);
  EXPECT_EQ(d.values(0)[0], -1.0);
  EXPECT_EQ(d.values(0)[1], -1.0);
}

TEST(AdaptiveStep, PseudoinverseZeroCoordinate) {
  const auto cfg = bare(0.0, 1.0, 0.0, true, 1.0);
  auto st = init_state(ModelParams::single({0.0, 0.0}));
  const auto d = adaptive_step(cfg, st, Gradient::single({0.0, 5.0}));
  EXPECT_EQ(d.values(0)[0], 0.0);
  EXPECT_FALSE(std::signbit(d.values(0)[0]));
  EXPECT_EQ(d.values(0)[1], -1.0);
}

TEST(AdaptiveStep, HeavyBallSecondStep) {
  const auto cfg = bare(0.9, 1.0, 0.0, false, 1.0);
  auto st = init_state(ModelParams::single({0.0}));
  adaptive_step(cfg, st, Gradient::single({1.0}));
  const auto d = adaptive_step(cfg, st, Gradient::single({1.0}));
  EXPECT_DOUBLE_EQ(d.values(0)[0], -1.9);
}

TEST(AdaptiveStep, Errors) {
  const auto cfg = bare(0.0, 1.0, 0.0, true, 1.0);
  auto st = init_state(ModelParams::single({0.0, 0.0}));
  EXPECT_THROW(adaptive_step(cfg, st, Gradient::single({1.0})), CongruenceError);
  EXPECT_THROW(adaptive_step(cfg, st, Gradient::single({1.0, NAN})), InputError);
  EXPECT_EQ(st.t, 0);
}

// Every preset against a line-by-line reimplementation on random sequences.
TEST(AdaptiveStep, MatchesReferenceForAllPresets) {
  for (const char* name : {"sgd", "momentum_sgd", "adagrad", "rmsprop", "adam"}) {
    const auto cfg = preset(name, Schedule::inverse_sqrt(0.3));
    oracle::Adaptive ref{cfg.beta1, cfg.beta2, cfg.epsilon, cfg.precondition, cfg.bias_correct,
                         [](long t) { return 0.3 / std::sqrt(static_cast<double>(t)); }, {}, {}};
    auto st = init_state(ModelParams::single(ParamVector(10, 0.0)));
    Rng rng(11);
    for (int t = 0; t < 100; ++t) {
      ParamVector g(10);
      for (double& x : g) x = rng.normal();
      if (t % 7 == 0) g[3] = 0.0;
      const auto got = adaptive_step(cfg, st, Gradient::single(g));
      const auto want = ref.step(g);
      for (std::size_t i = 0; i < g.size(); ++i) {
        ASSERT_LE(std::abs(got.values(0)[i] - want[i]), 1e-10 * std::max(1.0, std::abs(want[i])))
            << name << " t=" << t << " i=" << i;
      }
    }
  }
}

// AdaGrad's closed form -eta g_t / sqrt(sum_s g_s^2).
TEST(AdaptiveStep, AdagradClosedForm) {
  const auto cfg = bare(0.0, 1.0, 0.0, true, 0.5);
  auto st = init_state(ModelParams::single(ParamVector(10, 0.0)));
  Rng rng(5);
  std::vector<long double> sum(10, 0.0L);
  for (int t = 0; t < 100; ++t) {
    ParamVector g(10);
    for (double& x : g) x = rng.normal();
    const auto d = adaptive_step(cfg, st, Gradient::single(g));
    for (std::size_t i = 0; i < 10; ++i) {
      sum[i] += static_cast<long double>(g[i]) * g[i];
      const double want = static_cast<double>(-0.5L * g[i] / std::sqrt(sum[i]));
      ASSERT_LE(oracle::rel_err(d.values(0)[i], want), 1e-10);
    }
  }
}

TEST(AdaptiveStep, SgdRecoveryIsExact) {
  const auto cfg = bare(0.0, 1.0, 0.0, false, 0.01);
  ModelParams w = ModelParams::single({1.0, -2.0, 0.5});
  AdaptiveOptimizer opt(cfg, w);
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    ParamVector g(3);
    for (double& x : g) x = rng.normal();
    ParamVector want = w.flatten();
    for (std::size_t i = 0; i < 3; ++i) want[i] = want[i] + -0.01 * g[i];
    opt.update(w, Gradient::single(g));
    EXPECT_EQ(w.flatten(), want);
  }
}

TEST(AdaptiveStep, FrozenCoordinateStaysBitwiseZero) {
  for (const char* name : {"adagrad", "rmsprop", "adam"}) {
    const auto cfg = preset(name, Schedule::constant(1.0));
    auto st = init_state(ModelParams::single(ParamVector(4, 0.0)));
    Rng rng(9);
    for (int t = 0; t < 500; ++t) {
      ParamVector g{rng.normal(), 0.0, rng.normal(), 0.0};
      const auto d = adaptive_step(cfg, st, Gradient::single(g));
      ASSERT_EQ(d.values(0)[1], 0.0);
      ASSERT_EQ(st.m1.values(0)[3], 0.0);
      ASSERT_EQ(st.m2.values(0)[3], 0.0);
      for (double m : st.m2.values(0)) ASSERT_GE(m, 0.0);
    }
  }
}

TEST(BiasCorrection, Values) {
  EXPECT_NEAR(bias_correction(0.9, 0.999, 1), 0.316228, 1e-6);
  EXPECT_NEAR(bias_correction(0.9, 0.999, 1000000), 1.0, 1e-9);
  EXPECT_NEAR(bias_correction(0.0, 0.999, 1), std::sqrt(0.001), 1e-15);
  EXPECT_THROW(bias_correction(0.9, 1.0, 3), DomainError);
  EXPECT_THROW(bias_correction(1.0, 0.5, 3), DomainError);
  EXPECT_THROW(bias_correction(0.9, 0.999, 0), DomainError);
}

TEST(BiasCorrection, DipsThenRisesToOne) {
  // With beta1 = 0.9, beta2 = 0.999 the factor falls from t = 1 to a minimum
  // near t = 12 and rises monotonically toward 1 afterwards.
  const auto closed = [](Step t) {
    return std::sqrt(1.0 - std::pow(0.999, static_cast<double>(t))) / (1.0 - std::pow(0.9, static_cast<double>(t)));
  };
  EXPECT_LT(bias_correction(0.9, 0.999, 2), bias_correction(0.9, 0.999, 1));
  double prev = bias_correction(0.9, 0.999, 12);
  for (Step t = 1; t <= 100000; ++t) {
    const double v = bias_correction(0.9, 0.999, t);
    ASSERT_NEAR(v, closed(t), 1e-12 * closed(t)) << t;
    ASSERT_LE(v, 1.0) << t;
    if (t > 12) {
      ASSERT_GE(v, prev) << t;
      prev = v;
    }
  }
  EXPECT_LT(bias_correction(0.9, 0.999, 12), bias_correction(0.9, 0.999, 11));
  EXPECT_LT(bias_correction(0.9, 0.999, 12), bias_correction(0.9, 0.999, 13));
}

TEST(Preset, Fields) {
  const auto s = Schedule::constant(1.0);
  EXPECT_EQ(preset("adagrad", s).beta2, 1.0);
  EXPECT_EQ(preset("adagrad", s).beta1, 0.9);
  EXPECT_TRUE(preset("adam", s).bias_correct);
  EXPECT_FALSE(preset("sgd", s).precondition);
  EXPECT_EQ(preset("momentum_sgd", s).beta1, 0.9);
  EXPECT_EQ(preset("rmsprop", s).beta2, 0.999);
  EXPECT_THROW(preset("lamb", s), ConfigError);
}

TEST(Config, Validation) {
  auto c = preset("adam", Schedule::constant(1.0));
  c.beta2 = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = preset("sgd", Schedule::constant(1.0));
  c.beta1 = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.beta1 = 0.0;
  c.epsilon = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(OptimizerJson, PresetWithOverridesRoundTrips) {
  const auto c = optimizer_from_json(Json::parse(
      R"({"preset":"adam","beta2":0.99,"epsilon":1e-8,"lr":{"kind":"inverse_sqrt","c":0.1},"label":"a2"})"));
  EXPECT_EQ(c.beta1, 0.9);
  EXPECT_EQ(c.beta2, 0.99);
  EXPECT_EQ(c.epsilon, 1e-8);
  EXPECT_TRUE(c.bias_correct);
  EXPECT_EQ(c.label, "a2");
  const auto back = optimizer_from_json(Json::parse(optimizer_to_json(c).dump()));
  EXPECT_EQ(optimizer_to_json(back), optimizer_to_json(c));
  EXPECT_THROW(optimizer_from_json(Json::parse(R"({"preset":"adam","beta3":1})")), ConfigError);
  EXPECT_THROW(optimizer_from_json(Json::parse(R"({"preset":"sgd","bias_correct":true})")), ConfigError);
}

}  // namespace
}  // namespace adagraft
