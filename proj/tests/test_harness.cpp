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
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "adagraft/harness.hpp"

namespace adagraft {
namespace {

QuadraticProblem unit_quadratic(std::vector<std::size_t> sizes, double init) {
  QuadraticSpec s;
  s.group_sizes = std::move(sizes);
  s.init_value = init;
  return QuadraticProblem(s);
}

QuadraticProblem noisy_quadratic() {
  QuadraticSpec s;
  s.group_sizes = {10, 15};
  s.condition = 20.0;
  s.noise = 0.3;
  return QuadraticProblem(s);
}

std::string csv(const TrainingCurve& c) {
  std::ostringstream os;
  write_curve_csv(c, os);
  return os.str();
}

TEST(Train, OneSgdStepByHand) {
  const auto q = unit_quadratic({1}, 1.0);
  ExperimentConfig cfg;
  cfg.steps = 1;
  const auto c = train(q, preset("sgd", Schedule::constant(0.1)), cfg);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[0].step, 0);
  EXPECT_EQ(c.points[0].train_loss, 0.5);
  EXPECT_DOUBLE_EQ(c.final_params.values(0)[0], 0.9);
  EXPECT_DOUBLE_EQ(c.points[1].train_loss, 0.405);
  EXPECT_EQ(c.points[1].lr_effective, 0.1);
  EXPECT_TRUE(c.ok());
}

TEST(Train, CadenceIncludesFinalStep) {
  const auto q = noisy_quadratic();
  ExperimentConfig cfg;
  cfg.steps = 25;
  cfg.eval_every = 10;
  const auto c = train(q, preset("sgd", Schedule::constant(0.01)), cfg);
  std::vector<Step> steps;
  for (const auto& p : c.points) steps.push_back(p.step);
  EXPECT_EQ(steps, (std::vector<Step>{0, 10, 20, 25}));
}

TEST(Train, InvalidConfig) {
  ExperimentConfig cfg;
  cfg.steps = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.steps = 1;
  cfg.eval_every = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.eval_every = 1;
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.batch_size = 1;
  cfg.sampling = Sampling::Epoch;
  EXPECT_THROW(train(noisy_quadratic(), preset("sgd", Schedule::constant(0.1)), cfg), ConfigError);
}

TEST(Train, Deterministic) {
  const auto q = noisy_quadratic();
  ExperimentConfig cfg;
  cfg.steps = 200;
  cfg.seed = 9;
  cfg.batch_size = 3;
  const auto a = train(q, preset("adam", Schedule::constant(0.01)), cfg);
  const auto b = train(q, preset("adam", Schedule::constant(0.01)), cfg);
  EXPECT_EQ(csv(a), csv(b));
  cfg.seed = 10;
  EXPECT_NE(csv(train(q, preset("adam", Schedule::constant(0.01)), cfg)), csv(a));
}

TEST(Train, MinibatchIsMeanOfExamples) {
  // With zero noise every example has the same gradient, so any batch size
  // gives the same trajectory.
  const auto q = unit_quadratic({4}, 0.5);
  ExperimentConfig cfg;
  cfg.steps = 20;
  const auto a = train(q, preset("sgd", Schedule::constant(0.1)), cfg);
  cfg.batch_size = 7;
  const auto b = train(q, preset("sgd", Schedule::constant(0.1)), cfg);
  EXPECT_LE(max_abs_diff(a.final_params, b.final_params), 1e-15);
}

TEST(Train, DivergenceTruncatesAndFlags) {
  const auto q = unit_quadratic({3}, 1.0);
  ExperimentConfig cfg;
  cfg.steps = 100;
  cfg.eval_every = 50;
  const auto c = train(q, preset("sgd", Schedule::constant(1e6)), cfg);
  EXPECT_TRUE(c.diverged);
  EXPECT_FALSE(c.ok());
  EXPECT_LT(c.points.back().step, 100);
  EXPECT_TRUE(!std::isfinite(c.points.back().train_loss) || c.points.back().train_loss > kDivergenceThreshold);
  for (std::size_t i = 1; i < c.points.size(); ++i) EXPECT_GT(c.points[i].step, c.points[i - 1].step);
}

TEST(Train, EpochSamplingVisitsEveryExampleOnce) {
  const SparseHingeInstance inst({30, 1.0, 0});
  ExperimentConfig cfg;
  cfg.steps = 30;
  cfg.sampling = Sampling::Epoch;
  const auto c = train(inst, plain_adagrad(Schedule::constant(1.0)), cfg);
  EXPECT_EQ(c.final_params.flatten(), ParamVector(30, 1.0));
  EXPECT_EQ(inst.population_loss(c.final_params), 0.0);
}

TEST(TrainGrafted, LrEffectiveIsScaledDirectionLr) {
  const auto q = noisy_quadratic();
  ExperimentConfig cfg;
  cfg.steps = 30;
  const GraftSpec spec{preset("sgd", Schedule::constant(0.05)), preset("sgd", Schedule::constant(0.5)),
                       GraftScope::Global, std::nullopt};
  StepNormSeries s;
  const auto c = train_grafted(q, spec, cfg, nullptr, &s);
  EXPECT_EQ(s.size(), 30u);
  for (std::size_t i = 1; i < c.points.size(); ++i) EXPECT_NEAR(c.points[i].lr_effective, 0.05, 1e-15);
}

TEST(CurveCsv, RoundTrip) {
  const auto q = noisy_quadratic();
  ExperimentConfig cfg;
  cfg.steps = 40;
  cfg.eval_every = 3;
  const auto c = train(q, preset("rmsprop", Schedule::inverse_sqrt(0.02)), cfg);
  std::stringstream ss(csv(c));
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "step,train_loss,test_metric,lr_effective");
  ss.seekg(0);
  EXPECT_EQ(read_curve_csv(ss), c.points);
}

TEST(Grid, DiagonalEqualsPlainRunsBitForBit) {
  const auto q = noisy_quadratic();
  ExperimentConfig cfg;
  cfg.steps = 100;
  cfg.seed = 4;
  cfg.eval_every = 7;
  const std::vector<AdaptiveConfig> opts{preset("sgd", Schedule::constant(0.02)),
                                         preset("adam", Schedule::constant(0.01)),
                                         preset("adagrad", Schedule::constant(0.1))};
  const auto g = grid(q, opts, cfg);
  ASSERT_EQ(g.cells.size(), 9u);
  for (std::size_t i = 0; i < opts.size(); ++i) EXPECT_EQ(csv(g.at(i, i)), csv(train(q, opts[i], cfg)));
  const auto parallel = grid(q, opts, cfg, GraftScope::LayerWise, std::nullopt, 4);
  for (std::size_t k = 0; k < 9; ++k) EXPECT_EQ(csv(parallel.cells[k]), csv(g.cells[k]));
}

TEST(Grid, SingleOptimizerAndDuplicateLabels) {
  const auto q = noisy_quadratic();
  ExperimentConfig cfg;
  cfg.steps = 10;
  const auto g = grid(q, {preset("sgd", Schedule::constant(0.02))}, cfg);
  EXPECT_EQ(g.cells.size(), 1u);
  EXPECT_THROW(grid(q, {preset("sgd", Schedule::constant(0.02)), preset("sgd", Schedule::constant(0.1))}, cfg),
               ConfigError);
  EXPECT_THROW(grid(q, {}, cfg), ConfigError);
}

TEST(Grid, CellFailureIsRecordedInCell) {
  const auto q = noisy_quadratic();
  ExperimentConfig cfg;
  cfg.steps = 50;
  auto bad = preset("sgd", Schedule::linear(1e-3, -1e-4));
  bad.label = "bad";
  const auto g = grid(q, {preset("sgd", Schedule::constant(0.01)), bad}, cfg);
  EXPECT_TRUE(g.at(0, 0).ok());
  EXPECT_FALSE(g.at(1, 1).failure.empty());
  EXPECT_FALSE(g.at(0, 1).failure.empty());
}

TEST(Grid, ExportWritesCellsAndSummary) {
  const auto q = noisy_quadratic();
  ExperimentConfig cfg;
  cfg.steps = 5;
  const auto g = grid(q, {preset("sgd", Schedule::constant(0.01)), preset("adam", Schedule::constant(0.01))}, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "adagraft_grid_export";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto files = export_grid(g, dir);
  EXPECT_EQ(files.size(), 5u);
  EXPECT_TRUE(std::filesystem::exists(dir / "sgd__adam.csv"));
  std::ifstream is(dir / "summary.csv");
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "m,d,final_train_loss,final_test_metric,steps");
  EXPECT_EQ(row.substr(0, 8), "sgd,sgd,");
  EXPECT_EQ(row.substr(row.rfind(',') + 1), "5");
}

TEST(Correction, SyntheticLinearLoop) {
  QuadraticSpec s;
  s.group_sizes = {20};
  s.condition = 10.0;
  s.noise = 0.1;
  const QuadraticProblem q(s);
  ExperimentConfig cfg;
  cfg.steps = 1000;
  CorrectionSpec spec;
  spec.d = preset("adagrad", Schedule::constant(0.01));
  spec.m = spec.d;
  spec.m.lr = Schedule::product({Schedule::constant(0.01), Schedule::linear(0.2, 1e-4)});
  const auto r = correction_pipeline(q, spec, cfg);
  ASSERT_TRUE(r.error.empty()) << r.error;
  ASSERT_TRUE(r.fit.has_value());
  EXPECT_NEAR(r.fit->params[0], 0.2, 0.002);
  EXPECT_NEAR(r.fit->params[1], 1e-4, 1e-6);
  EXPECT_LE(r.max_deviation, 1e-6);
}

TEST(Correction, SameOptimizerGivesUnitCorrection) {
  const auto q = noisy_quadratic();
  ExperimentConfig cfg;
  cfg.steps = 200;
  CorrectionSpec spec;
  spec.m = spec.d = preset("sgd", Schedule::constant(0.02));
  const auto r = correction_pipeline(q, spec, cfg);
  ASSERT_TRUE(r.fit.has_value());
  EXPECT_NEAR(r.fit->params[0], 1.0, 1e-12);
  EXPECT_NEAR(r.fit->params[1], 0.0, 1e-14);
  EXPECT_EQ(csv(r.d_corrected).size(), csv(r.d_plain).size());
  EXPECT_LE(max_abs_diff(r.d_corrected.final_params, r.d_plain.final_params), 1e-12);
}

TEST(Correction, SgdMagnitudeHelpsAdagrad) {
  const auto q = noisy_quadratic();
  ExperimentConfig cfg;
  cfg.steps = 2000;
  cfg.seed = 1;
  CorrectionSpec spec;
  // A decaying SGD schedule suits the gradient noise; the fitted correction
  // carries that decay over to AdaGrad. The ratio shrinks over time, so a
  // linear fit would turn negative before the last step.
  spec.m = preset("sgd", Schedule::inverse_time(0.05));
  spec.d = preset("adagrad", Schedule::constant(0.01));
  spec.kind = FitKind::Power;
  const auto r = correction_pipeline(q, spec, cfg);
  ASSERT_TRUE(r.error.empty()) << r.error;
  EXPECT_LE(r.d_corrected.points.back().train_loss, r.d_plain.points.back().train_loss);
}

TEST(Correction, FitFailureGivesPartialReport) {
  const auto q = unit_quadratic({2}, 0.0);  // zero gradients: every record guarded
  ExperimentConfig cfg;
  cfg.steps = 5;
  CorrectionSpec spec;
  spec.m = preset("sgd", Schedule::constant(0.1));
  spec.d = preset("adagrad", Schedule::constant(0.1));
  const auto r = correction_pipeline(q, spec, cfg);
  EXPECT_FALSE(r.error.empty());
  EXPECT_FALSE(r.fit.has_value());
  EXPECT_EQ(r.grafted.points.size(), 6u);
}

TEST(EpsilonSweep, ZeroIsBaseRun) {
  const auto q = noisy_quadratic();
  ExperimentConfig cfg;
  cfg.steps = 100;
  const auto base = preset("adam", Schedule::constant(0.01));
  const auto curves = epsilon_sweep(q, base, {0.0}, cfg);
  ASSERT_EQ(curves.size(), 1u);
  EXPECT_EQ(csv(curves[0]), csv(train(q, base, cfg)));
  EXPECT_THROW(epsilon_sweep(q, preset("sgd", Schedule::constant(0.1)), {0.0}, cfg), ConfigError);
}

TEST(EpsilonSweep, HugeEpsilonApproachesMomentumSgd) {
  const auto q = noisy_quadratic();
  ExperimentConfig cfg;
  cfg.steps = 300;
  const double eps = 1e12;
  auto base = preset("rmsprop", Schedule::constant(0.05 * std::sqrt(eps)));
  base.beta1 = 0.9;
  const auto sweep = epsilon_sweep(q, base, {eps}, cfg);
  const auto sgd = train(q, preset("momentum_sgd", Schedule::constant(0.05)), cfg);
  const auto a = sweep[0].final_params.flatten();
  const auto b = sgd.final_params.flatten();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 0.01 * std::max(1e-3, std::abs(b[i])));
}

TEST(EpsilonSweep, TinyEpsilonMatchesZero) {
  QuadraticSpec s;
  s.group_sizes = {10};
  s.noise = 0.2;
  const QuadraticProblem q(s);
  ExperimentConfig cfg;
  cfg.steps = 200;
  const auto curves = epsilon_sweep(q, preset("adam", Schedule::constant(0.01)), {0.0, 1e-12}, cfg);
  EXPECT_LE(max_abs_diff(curves[0].final_params, curves[1].final_params), 1e-6);
}

TEST(Pathological, SmallSuiteShapes) {
  PathologicalSpec spec;
  spec.seeds = {0};
  spec.hinge_d = 40;
  spec.hinge_c = 1.0;
  spec.wilson_n = 10;
  spec.wilson_steps = 500;
  const auto rep = pathological_suite(spec);
  ASSERT_EQ(rep.hinge.size(), 1u);
  EXPECT_EQ(rep.hinge[0].adagrad_test_loss, 0.0);
  EXPECT_EQ(rep.hinge[0].sgd.size(), spec.sgd_eta0.size());
  EXPECT_TRUE(rep.wilson[0].sign_span);
}

TEST(Regret, RowsAndZeroHistory) {
  RegretSpec spec;
  spec.rounds = 300;
  spec.tail = 100;
  spec.random_per_kind = 1;
  spec.adversarial = 2;
  const auto rows = regret_suite(spec);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[3].sequence, "late_0");
  for (const auto& r : rows) {
    EXPECT_TRUE(r.zero_history_fixed) << r.sequence;
    EXPECT_LE(r.ratio, 2.0) << r.sequence;
  }
  std::ostringstream os;
  write_regret_csv(rows, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), kRegretCsvHeader);
}

TEST(ConfigJson, ExperimentRoundTrip) {
  ExperimentConfig c;
  c.name = "x";
  c.steps = 12;
  c.seed = 18446744073709551615ULL;
  c.sampling = Sampling::FullBatch;
  const auto back = experiment_from_json(Json::parse(experiment_to_json(c).dump()));
  EXPECT_EQ(experiment_to_json(back), experiment_to_json(c));
  EXPECT_THROW(experiment_from_json(Json::parse(R"({"steps":0})")), ConfigError);
  EXPECT_THROW(experiment_from_json(Json::parse(R"({"steps":5,"lr":1})")), ConfigError);
}

}  // namespace
}  // namespace adagraft
