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

#include "adagraft/adagraft.hpp"
#include "cli_support.hpp"

namespace {

using namespace clitest;
using adagraft::Json;

const char* kQuadratic = R"({"kind": "quadratic", "group_sizes": [3, 4], "condition": 5, "noise": 0.1})";

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto p = dir / "config.json";
  spit(p, text);
  return p;
}

TEST(Cli, RunWritesCurveAndManifest) {
  const auto dir = scratch("cli_run");
  const auto cfg = write_config(dir, std::string(R"({"problem": )") + kQuadratic + R"(,
    "optimizer": {"preset": "adam", "lr": {"kind": "constant", "value": 0.01}},
    "run": {"steps": 20, "eval_every": 5},
    "output": {"directory": "ignored"}})");
  ASSERT_EQ(run_cli("run", cfg, dir / "out"), 0);
  const auto files = snapshot(dir / "out");
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files.at("curve.csv").substr(0, 40), "step,train_loss,test_metric,lr_effective");
  const auto m = Json::parse(files.at("manifest.json"));
  EXPECT_EQ(m.at("command"), "run");
  EXPECT_EQ(m.at("diverged"), false);
  EXPECT_EQ(m.at("config").at("run").at("steps"), 20);
  EXPECT_EQ(m.at("config").at("output").at("directory"), (dir / "out").generic_string());
  EXPECT_EQ(m.at("outputs"), Json::parse(R"(["curve.csv", "manifest.json"])"));
}

TEST(Cli, GraftedRunWritesStepNorms) {
  const auto dir = scratch("cli_graft");
  const auto cfg = write_config(dir, std::string(R"({"problem": )") + kQuadratic + R"(,
    "graft": {"m": {"preset": "sgd", "lr": {"kind": "constant", "value": 0.05}},
              "d": {"preset": "adagrad", "lr": {"kind": "constant", "value": 1}},
              "scope": "global"},
    "run": {"steps": 10},
    "output": {"directory": "x"}})");
  ASSERT_EQ(run_cli("run", cfg, dir / "out"), 0);
  const auto norms = slurp(dir / "out" / "step_norms.csv");
  EXPECT_EQ(norms.substr(0, norms.find('\n')), "t,group,norm_m,norm_d,ratio,guarded");
  EXPECT_NE(norms.find("__global__"), std::string::npos);
}

TEST(Cli, MalformedJsonIsConfigErrorWithoutOutputs) {
  const auto dir = scratch("cli_bad_json");
  const auto cfg = write_config(dir, R"({"problem": {"kind": "quadratic",})");
  EXPECT_EQ(run_cli("run", cfg, dir / "out"), 2);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, SemanticErrorsAreConfigErrors) {
  const auto dir = scratch("cli_semantic");
  const std::string base = std::string(R"({"problem": )") + kQuadratic;
  const std::string opt = R"("optimizer": {"preset": "sgd", "lr": {"kind": "constant", "value": 0.1}})";
  const std::string rest = R"("run": {"steps": 5}, "output": {"directory": "x"}})";
  for (const std::string& bad : {
           base + ", " + opt + R"(, "extra": 1, )" + rest,
           base + R"(, "optimizer": {"preset": "nadam", "lr": {"kind": "constant", "value": 0.1}}, )" + rest,
           base + ", " + R"("run": {"steps": 0}, "output": {"directory": "x"}, )" + opt + "}",
           base + R"(, "optimizer": {"preset": "sgd", "lr": {"kind": "constant", "value": -1}}, )" + rest,
           std::string(R"({"problem": {"kind": "mnist"}, )") + opt + ", " + rest,
       }) {
    const auto cfg = write_config(dir, bad);
    EXPECT_EQ(run_cli("run", cfg, dir / "out"), 2) << bad;
    EXPECT_FALSE(fs::exists(dir / "out")) << bad;
  }
  EXPECT_EQ(run_cli("run", dir / "missing.json", dir / "out"), 2);
  EXPECT_EQ(run_cli("frobnicate", config_path("quadratic_sgd.json"), dir / "out"), 2);
}

TEST(Cli, DivergenceExitsThreeWithOutputs) {
  const auto dir = scratch("cli_diverge");
  const auto cfg = write_config(dir, std::string(R"({"problem": )") + kQuadratic + R"(,
    "optimizer": {"preset": "sgd", "lr": {"kind": "constant", "value": 1e6}},
    "run": {"steps": 100},
    "output": {"directory": "x"}})");
  EXPECT_EQ(run_cli("run", cfg, dir / "out"), 3);
  const auto m = Json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(m.at("diverged"), true);
}

TEST(Cli, GridWritesAllCellsAndSummary) {
  const auto out = scratch("cli_grid") / "out";
  ASSERT_EQ(run_cli("grid", config_path("grid.json"), out, "--jobs 3"), 0);
  const auto files = snapshot(out);
  EXPECT_EQ(files.size(), 11u);
  for (const char* m : {"sgd", "adam", "adagrad"}) {
    for (const char* d : {"sgd", "adam", "adagrad"}) {
      EXPECT_EQ(files.count(std::string(m) + "__" + d + ".csv"), 1u) << m << " " << d;
    }
  }
  const auto& summary = files.at("summary.csv");
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 10);
}

TEST(Cli, SeedOverrideChangesOutputsAndIsRecorded) {
  const auto dir = scratch("cli_seed");
  ASSERT_EQ(run_cli("run", config_path("quadratic_sgd.json"), dir / "a", "--seed 11"), 0);
  ASSERT_EQ(run_cli("run", config_path("quadratic_sgd.json"), dir / "b", "--seed 12"), 0);
  EXPECT_NE(slurp(dir / "a" / "curve.csv"), slurp(dir / "b" / "curve.csv"));
  EXPECT_EQ(Json::parse(slurp(dir / "a" / "manifest.json")).at("seed"), 11);
}

TEST(Cli, RerunsAreByteIdentical) {
  const auto dir = scratch("cli_rerun");
  for (const char* name : {"quadratic_sgd.json", "quadratic_graft.json", "correct.json"}) {
    const std::string command = std::string(name) == "correct.json" ? "correct" : "run";
    ASSERT_EQ(run_cli(command, config_path(name), dir / "a"), 0) << name;
    ASSERT_EQ(run_cli(command, config_path(name), dir / "b"), 0) << name;
    auto a = snapshot(dir / "a");
    auto b = snapshot(dir / "b");
    // The manifests differ only in the echoed output directory.
    a.erase("manifest.json");
    b.erase("manifest.json");
    EXPECT_EQ(a, b) << name;
    fs::remove_all(dir / "a");
    fs::remove_all(dir / "b");
  }
}

TEST(Cli, CorrectWritesFit) {
  const auto out = scratch("cli_correct") / "out";
  ASSERT_EQ(run_cli("correct", config_path("correct.json"), out), 0);
  const auto j = Json::parse(slurp(out / "correction.json"));
  const auto fit = adagraft::correction_from_json(j.at("fit"));
  EXPECT_NEAR(fit.params[0], 0.2, 0.002);
  EXPECT_NEAR(fit.params[1], 1e-4, 1e-6);
}

TEST(Cli, RegretAndPathologicalSmall) {
  const auto dir = scratch("cli_small_suites");
  auto cfg = write_config(dir, R"({"regret": {"d": 5, "rounds": 200, "tail": 50, "random_per_kind": 1,
                                   "adversarial": 1}, "output": {"directory": "x"}})");
  EXPECT_EQ(run_cli("regret", cfg, dir / "regret"), 0);
  const auto csv = slurp(dir / "regret" / "regret.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);

  cfg = write_config(dir, R"({"pathological": {"seeds": [0], "hinge_d": 40, "hinge_c": 1.0, "wilson_n": 6,
                              "wilson_steps": 300}, "output": {"directory": "x"}})");
  const int code = run_cli("pathological", cfg, dir / "path");
  EXPECT_TRUE(code == 0 || code == 3) << code;
  const auto report = Json::parse(slurp(dir / "path" / "report.json"));
  EXPECT_EQ(report.at("hinge").size(), 1u);
}

}  // namespace
