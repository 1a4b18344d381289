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

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "adagraft/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Learning-rate grafting experiments driven by a JSON config."};
  app.set_version_flag("--version", std::string(adagraft::kVersion));
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  const char* help[] = {
      "Train one plain or grafted optimizer",
      "Train every (M, D) pair of a list of optimizers",
      "Fit a schedule correction from a global graft and re-run D with it",
      "Run AdaGrad and SGD on the hinge and regression constructions",
      "Measure the regret of pseudoinverse AdaGrad on online linear losses",
  };
  std::size_t k = 0;
  for (auto name : adagraft::cli::commands()) {
    auto* sub = app.add_subcommand(std::string(name), help[k++]);
    sub->add_option("--config", config, "Path to the JSON config")->required();
    sub->add_option("--out", out, "Output directory (overrides output.directory)");
    sub->add_option("--seed", seed, "Seed (overrides the config)");
    sub->add_option("--jobs", jobs, "Worker threads for grid and multi-run commands")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : adagraft::cli::kConfigError;
  }

  const auto* chosen = app.get_subcommands().front();
  adagraft::cli::Overrides ov;
  if (chosen->count("--out") > 0) ov.out = out;
  if (chosen->count("--seed") > 0) ov.seed = seed;
  ov.jobs = jobs;
  return adagraft::cli::execute(chosen->get_name(), config, ov, std::cout, std::cerr);
}
