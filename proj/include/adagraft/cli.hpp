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

// Config parsing and command execution behind the adagraft executable.
// Every command validates its whole config before touching the output
// directory, so a config error never leaves files behind.

#ifndef ADAGRAFT_CLI_HPP
#define ADAGRAFT_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "adagraft/adagraft.hpp"

namespace adagraft::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,      ///< I/O or other runtime failure
  kConfigError = 2,  ///< nothing was written
  kDiverged = 3,     ///< outputs written, some run diverged or failed
};

struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
};

inline Json load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object at top level");
  return j;
}

namespace detail {

using adagraft::detail::check_keys;
using adagraft::detail::get_integer;
using adagraft::detail::get_number;
using adagraft::detail::get_string;
using adagraft::detail::require;

inline std::filesystem::path output_dir(const Json& cfg, const Overrides& ov) {
  if (ov.out) return *ov.out;
  const Json& o = require(cfg, "output", "config");
  check_keys(o, {"directory"}, "output");
  const std::string dir = get_string(o, "directory", "output");
  if (dir.empty()) throw ConfigError("output.directory must be non-empty");
  return dir;
}

inline ExperimentConfig run_section(const Json& cfg, const Overrides& ov) {
  ExperimentConfig run = experiment_from_json(require(cfg, "run", "config"));
  if (ov.seed) run.seed = *ov.seed;
  return run;
}

inline GraftSpec graft_pair(const Json& g) {
  check_keys(g, {"m", "d", "scope", "eps_graft"}, "graft");
  GraftSpec s;
  s.m = optimizer_from_json(require(g, "m", "graft"));
  s.d = optimizer_from_json(require(g, "d", "graft"));
  s.scope = graft_scope_from_string(get_string(g, "scope", "graft", "layerwise"));
  if (g.contains("eps_graft")) s.eps_graft = get_number(g, "eps_graft", "graft");
  s.resolved();
  return s;
}

inline Json graft_to_json(const GraftSpec& s) {
  return {{"m", optimizer_to_json(s.m)},
          {"d", optimizer_to_json(s.d)},
          {"scope", to_string(s.scope)},
          {"eps_graft", s.resolved().eps_graft}};
}

inline Json output_json(const std::filesystem::path& dir) { return {{"directory", dir.generic_string()}}; }

inline void write_json(const std::filesystem::path& path, const Json& j) {
  adagraft::detail::write_text(path, j.dump(2) + "\n");
}

inline void write_manifest(const std::filesystem::path& dir, std::string_view command, std::uint64_t seed,
                           const Json& normalized, std::vector<std::string> outputs, bool diverged) {
  outputs.emplace_back("manifest.json");
  Json m{{"command", command},
         {"version", kVersion},
         {"seed", seed},
         {"config", normalized},
         {"outputs", outputs},
         {"diverged", diverged}};
  write_json(dir / "manifest.json", m);
}

inline void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

inline std::string curve_status(const TrainingCurve& c) {
  if (!c.failure.empty()) return "failed: " + c.failure;
  return c.diverged ? "diverged" : "ok";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// run

inline int cmd_run(const Json& cfg, const Overrides& ov, std::ostream& log) {
  detail::check_keys(cfg, {"problem", "optimizer", "graft", "run", "output"}, "config");
  const auto problem = make_problem(detail::require(cfg, "problem", "config"));
  const ExperimentConfig run = detail::run_section(cfg, ov);
  const auto dir = detail::output_dir(cfg, ov);
  const bool has_opt = cfg.contains("optimizer");
  if (has_opt == cfg.contains("graft")) throw ConfigError("config: give exactly one of 'optimizer' and 'graft'");
  std::optional<AdaptiveConfig> plain;
  std::optional<GraftSpec> graft;
  if (has_opt) {
    plain = optimizer_from_json(cfg.at("optimizer"));
  } else {
    graft = detail::graft_pair(cfg.at("graft"));
  }
  // Fail on a sampling mode the problem cannot serve before writing anything.
  (void)make_sampler(*problem, run);

  Json normalized{{"problem", problem->spec()}};
  if (plain) {
    normalized["optimizer"] = optimizer_to_json(*plain);
  } else {
    normalized["graft"] = detail::graft_to_json(*graft);
  }
  normalized["run"] = experiment_to_json(run);
  normalized["output"] = detail::output_json(dir);

  detail::make_dir(dir);
  std::vector<std::string> outputs{"curve.csv"};
  TrainingCurve curve;
  if (plain) {
    curve = train(*problem, *plain, run);
  } else {
    StepNormSeries series;
    curve = train_grafted(*problem, *graft, run, nullptr, &series);
    export_csv(series, dir / "step_norms.csv");
    outputs.emplace_back("step_norms.csv");
  }
  export_curve_csv(curve, dir / "curve.csv");
  detail::write_manifest(dir, "run", run.seed, normalized, outputs, curve.diverged);
  log << "run: " << curve.points.size() << " points, " << detail::curve_status(curve) << '\n';
  return curve.diverged ? kDiverged : kOk;
}

// ---------------------------------------------------------------------------
// grid

inline int cmd_grid(const Json& cfg, const Overrides& ov, std::ostream& log) {
  detail::check_keys(cfg, {"problem", "optimizers", "graft", "run", "output"}, "config");
  const auto problem = make_problem(detail::require(cfg, "problem", "config"));
  const ExperimentConfig run = detail::run_section(cfg, ov);
  const auto dir = detail::output_dir(cfg, ov);
  const Json& list = detail::require(cfg, "optimizers", "config");
  if (!list.is_array() || list.empty()) throw ConfigError("optimizers: expected a non-empty array");
  std::vector<AdaptiveConfig> opts;
  for (const auto& o : list) opts.push_back(optimizer_from_json(o));
  for (std::size_t i = 0; i < opts.size(); ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      if (opts[i].label == opts[k].label) throw ConfigError("optimizers: duplicate label '" + opts[i].label + "'");
    }
    if (opts[i].label.find_first_of("/\\,") != std::string::npos) {
      throw ConfigError("optimizers: label '" + opts[i].label + "' must not contain '/', '\\' or ','");
    }
  }
  GraftScope scope = GraftScope::LayerWise;
  std::optional<double> eps;
  if (cfg.contains("graft")) {
    const Json& g = cfg.at("graft");
    detail::check_keys(g, {"scope", "eps_graft"}, "graft");
    scope = graft_scope_from_string(detail::get_string(g, "scope", "graft", "layerwise"));
    if (g.contains("eps_graft")) {
      eps = detail::get_number(g, "eps_graft", "graft");
      GraftConfig{scope, *eps}.validate();
    }
  }
  (void)make_sampler(*problem, run);

  Json normalized{{"problem", problem->spec()}};
  Json ol = Json::array();
  for (const auto& o : opts) ol.push_back(optimizer_to_json(o));
  normalized["optimizers"] = ol;
  normalized["graft"] = Json{{"scope", to_string(scope)}};
  if (eps) normalized["graft"]["eps_graft"] = *eps;
  normalized["run"] = experiment_to_json(run);
  normalized["output"] = detail::output_json(dir);

  detail::make_dir(dir);
  const GridResult g = grid(*problem, opts, run, scope, eps, ov.jobs);
  const auto files = export_grid(g, dir);
  bool bad = false;
  for (const auto& c : g.cells) bad = bad || !c.ok();
  detail::write_manifest(dir, "grid", run.seed, normalized, files, bad);
  log << "grid: " << g.cells.size() << " cells" << (bad ? ", some diverged or failed" : "") << '\n';
  return bad ? kDiverged : kOk;
}

// ---------------------------------------------------------------------------
// correct

inline int cmd_correct(const Json& cfg, const Overrides& ov, std::ostream& log) {
  detail::check_keys(cfg, {"problem", "correction", "run", "output"}, "config");
  const auto problem = make_problem(detail::require(cfg, "problem", "config"));
  const ExperimentConfig run = detail::run_section(cfg, ov);
  const auto dir = detail::output_dir(cfg, ov);
  const Json& c = detail::require(cfg, "correction", "config");
  detail::check_keys(c, {"m", "d", "kind", "eps_graft", "window"}, "correction");
  CorrectionSpec spec;
  spec.m = optimizer_from_json(detail::require(c, "m", "correction"));
  spec.d = optimizer_from_json(detail::require(c, "d", "correction"));
  spec.kind = fit_kind_from_string(detail::get_string(c, "kind", "correction", "linear"));
  if (c.contains("eps_graft")) spec.eps_graft = detail::get_number(c, "eps_graft", "correction");
  if (c.contains("window")) {
    const Json& w = c.at("window");
    detail::check_keys(w, {"first", "last"}, "correction.window");
    spec.window.first = detail::get_integer(w, "first", "correction.window", spec.window.first);
    spec.window.last = detail::get_integer(w, "last", "correction.window", spec.window.last);
    if (spec.window.first < 1 || spec.window.last < spec.window.first) {
      throw ConfigError("correction.window: need 1 <= first <= last");
    }
  }
  const double eps = spec.eps_graft.value_or(default_eps_graft(spec.d));
  GraftConfig{GraftScope::Global, eps}.validate();
  (void)make_sampler(*problem, run);

  Json normalized{{"problem", problem->spec()}};
  normalized["correction"] = Json{{"m", optimizer_to_json(spec.m)},
                                  {"d", optimizer_to_json(spec.d)},
                                  {"kind", to_string(spec.kind)},
                                  {"eps_graft", eps},
                                  {"window", {{"first", spec.window.first}, {"last", spec.window.last}}}};
  normalized["run"] = experiment_to_json(run);
  normalized["output"] = detail::output_json(dir);

  detail::make_dir(dir);
  const CorrectionReport r = correction_pipeline(*problem, spec, run);
  export_curve_csv(r.grafted, dir / "grafted.csv");
  export_curve_csv(r.d_plain, dir / "d_plain.csv");
  std::vector<std::string> outputs{"grafted.csv", "d_plain.csv"};
  if (r.fit && r.error.empty()) {
    export_curve_csv(r.d_corrected, dir / "d_corrected.csv");
    outputs.emplace_back("d_corrected.csv");
  }
  export_csv(r.telemetry, dir / "step_norms.csv");
  outputs.emplace_back("step_norms.csv");
  Json report{{"fit", r.fit ? correction_to_json(*r.fit) : Json(nullptr)},
              {"max_deviation", r.max_deviation},
              {"grafted", detail::curve_status(r.grafted)},
              {"d_plain", detail::curve_status(r.d_plain)},
              {"d_corrected", r.fit && r.error.empty() ? detail::curve_status(r.d_corrected) : "not run"},
              {"error", r.error}};
  detail::write_json(dir / "correction.json", report);
  outputs.emplace_back("correction.json");
  const bool bad = !r.error.empty() || !r.grafted.ok() || !r.d_plain.ok() || !r.d_corrected.ok();
  detail::write_manifest(dir, "correct", run.seed, normalized, outputs, bad);
  if (r.fit) {
    log << "correct: " << to_string(r.fit->kind) << " fit (" << adagraft::detail::format_double(r.fit->params[0])
        << ", " << adagraft::detail::format_double(r.fit->params[1]) << ")\n";
  }
  if (!r.error.empty()) log << "correct: " << r.error << '\n';
  return bad ? kDiverged : kOk;
}

// ---------------------------------------------------------------------------
// pathological

inline Json hinge_json(const HingeSeedResult& h, const PathologicalSpec& s) {
  Json sgd = Json::array();
  for (std::size_t k = 0; k < h.sgd.size(); ++k) {
    sgd.push_back({{"eta0", s.sgd_eta0[k]}, {"status", detail::curve_status(h.sgd[k])}});
  }
  return {{"seed", h.seed},
          {"steps", h.steps},
          {"adagrad_train_loss", h.adagrad_train_loss},
          {"adagrad_test_loss", h.adagrad_test_loss},
          {"adagrad_test_error", h.adagrad_test_error},
          {"best_sgd_eta0", s.sgd_eta0.at(h.best_sgd)},
          {"sgd_test_loss", h.sgd_test_loss},
          {"sgd_test_error", h.sgd_test_error},
          {"sgd_runs", sgd},
          {"adagrad_zero_train", h.adagrad_zero_train},
          {"adagrad_error_ok", h.adagrad_error_ok},
          {"sgd_error_ok", h.sgd_error_ok},
          {"passed", h.passed()}};
}

inline Json wilson_json(const WilsonSeedResult& w) {
  return {{"seed", w.seed},
          {"sign_span", w.sign_span},
          {"adagrad_accuracy", w.adagrad_accuracy},
          {"sgd_accuracy", w.sgd_accuracy},
          {"adagrad_status", detail::curve_status(w.adagrad)},
          {"sgd_status", detail::curve_status(w.sgd)},
          {"passed", w.passed()}};
}

inline int cmd_pathological(const Json& cfg, const Overrides& ov, std::ostream& log) {
  detail::check_keys(cfg, {"pathological", "output"}, "config");
  PathologicalSpec spec = cfg.contains("pathological") ? pathological_spec_from_json(cfg.at("pathological"))
                                                       : PathologicalSpec{};
  if (ov.seed) {
    for (std::size_t k = 0; k < spec.seeds.size(); ++k) spec.seeds[k] = *ov.seed + k;
  }
  const auto dir = detail::output_dir(cfg, ov);
  // Construct one instance of each kind so bad sizes surface as config errors.
  (void)SparseHingeInstance({spec.hinge_d, spec.hinge_c, spec.seeds.front()});
  WilsonSpec ws;
  ws.n = spec.wilson_n;
  ws.p = spec.wilson_p;
  (void)WilsonRegressionInstance(ws);

  Json normalized{{"pathological", pathological_spec_to_json(spec)}, {"output", detail::output_json(dir)}};

  detail::make_dir(dir);
  const PathologicalReport rep = pathological_suite(spec, ov.jobs);
  std::vector<std::string> outputs;
  bool bad = false;
  auto emit = [&](const TrainingCurve& c, const std::string& name) {
    export_curve_csv(c, dir / name);
    outputs.push_back(name);
    bad = bad || !c.ok();
  };
  Json hinge = Json::array();
  for (const auto& h : rep.hinge) {
    const std::string base = "hinge_seed" + std::to_string(h.seed);
    emit(h.adagrad, base + "_adagrad.csv");
    for (std::size_t k = 0; k < h.sgd.size(); ++k) emit(h.sgd[k], base + "_sgd" + std::to_string(k) + ".csv");
    hinge.push_back(hinge_json(h, spec));
  }
  Json wilson = Json::array();
  for (const auto& w : rep.wilson) {
    const std::string base = "wilson_seed" + std::to_string(w.seed);
    emit(w.adagrad, base + "_adagrad.csv");
    emit(w.sgd, base + "_sgd.csv");
    wilson.push_back(wilson_json(w));
  }
  Json report{{"hinge", hinge}, {"wilson", wilson}, {"passed", rep.passed()}, {"curves", outputs}};
  detail::write_json(dir / "report.json", report);
  outputs.emplace_back("report.json");
  detail::write_manifest(dir, "pathological", spec.seeds.front(), normalized, outputs, bad);
  log << "pathological: " << (rep.passed() ? "all checks passed" : "some checks failed") << '\n';
  return bad ? kDiverged : kOk;
}

// ---------------------------------------------------------------------------
// regret

inline int cmd_regret(const Json& cfg, const Overrides& ov, std::ostream& log) {
  detail::check_keys(cfg, {"regret", "output"}, "config");
  RegretSpec spec = cfg.contains("regret") ? regret_spec_from_json(cfg.at("regret")) : RegretSpec{};
  if (ov.seed) spec.seed = *ov.seed;
  const auto dir = detail::output_dir(cfg, ov);
  Json normalized{{"regret", regret_spec_to_json(spec)}, {"output", detail::output_json(dir)}};

  detail::make_dir(dir);
  const auto rows = regret_suite(spec, ov.jobs);
  std::ostringstream os;
  write_regret_csv(rows, os);
  adagraft::detail::write_text(dir / "regret.csv", os.str());
  bool bad = false;
  std::size_t passed = 0;
  for (const auto& r : rows) {
    bad = bad || !std::isfinite(r.regret) || !std::isfinite(r.rhs);
    passed += r.passed() ? 1 : 0;
  }
  detail::write_manifest(dir, "regret", spec.seed, normalized, {"regret.csv"}, bad);
  log << "regret: " << passed << "/" << rows.size() << " sequences within the bound and sublinear\n";
  return bad ? kDiverged : kOk;
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string_view>& commands() {
  static const std::vector<std::string_view> names{"run", "grid", "correct", "pathological", "regret"};
  return names;
}

/// Loads `config_path` and runs `command`; maps failures onto exit codes.
inline int execute(std::string_view command, const std::filesystem::path& config_path, const Overrides& ov,
                   std::ostream& log, std::ostream& err) {
  Json cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    if (command == "run") return cmd_run(cfg, ov, log);
    if (command == "grid") return cmd_grid(cfg, ov, log);
    if (command == "correct") return cmd_correct(cfg, ov, log);
    if (command == "pathological") return cmd_pathological(cfg, ov, log);
    if (command == "regret") return cmd_regret(cfg, ov, log);
    err << "unknown command '" << command << "'\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kFailure;
  } catch (const Error& e) {
    err << "run failed: " << e.what() << '\n';
    return kDiverged;
  }
}

}  // namespace adagraft::cli

#endif  // ADAGRAFT_CLI_HPP
