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

#ifndef ADAGRAFT_HARNESS_HPP
#define ADAGRAFT_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "adagraft/core.hpp"
#include "adagraft/graft.hpp"
#include "adagraft/optim.hpp"
#include "adagraft/problems.hpp"
#include "adagraft/rng.hpp"
#include "adagraft/schedules.hpp"
#include "adagraft/telemetry.hpp"

namespace adagraft {

/// |loss| above this (or non-finite) stops a run as diverged.
inline constexpr double kDivergenceThreshold = 1e12;

struct ExperimentConfig {
  std::string name = "run";  ///< hashed into the RNG streams
  Step steps = 100;
  std::uint64_t seed = 0;
  Step eval_every = 1;
  std::size_t batch_size = 1;
  std::optional<Sampling> sampling;  ///< unset: the problem's default

  void validate() const {
    if (name.empty()) throw ConfigError("run.name must be non-empty");
    if (steps < 1) throw ConfigError("run.steps must be >= 1");
    if (eval_every < 1) throw ConfigError("run.eval_every must be >= 1");
    if (batch_size < 1) throw ConfigError("run.batch_size must be >= 1");
  }
};

inline Json experiment_to_json(const ExperimentConfig& c) {
  Json j{{"name", c.name},
         {"steps", c.steps},
         {"seed", c.seed},
         {"eval_every", c.eval_every},
         {"batch_size", c.batch_size}};
  if (c.sampling) j["sampling"] = std::string(to_string(*c.sampling));
  return j;
}

inline ExperimentConfig experiment_from_json(const Json& j) {
  constexpr std::string_view where = "run";
  if (!j.is_object()) throw ConfigError("run: expected an object");
  detail::check_keys(j, {"name", "steps", "seed", "eval_every", "batch_size", "sampling"}, where);
  ExperimentConfig c;
  c.name = detail::get_string(j, "name", where, c.name);
  c.steps = detail::get_integer(j, "steps", where, c.steps);
  c.seed = detail::get_seed(j, "seed", where, c.seed);
  c.eval_every = detail::get_integer(j, "eval_every", where, c.eval_every);
  const auto b = detail::get_integer(j, "batch_size", where, 1);
  if (b < 1) throw ConfigError("run.batch_size must be >= 1");
  c.batch_size = static_cast<std::size_t>(b);
  if (j.contains("sampling")) c.sampling = sampling_from_string(detail::get_string(j, "sampling", where));
  c.validate();
  return c;
}

struct CurvePoint {
  Step step = 0;
  double train_loss = 0.0;
  double test_metric = 0.0;
  double lr_effective = 0.0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/**
 * Evaluations at step 0, every eval_every steps, and the final step. A
 * diverged run ends with the offending step's point.
 */
struct TrainingCurve {
  std::vector<CurvePoint> points;
  bool diverged = false;
  std::string failure;  ///< non-empty when the run could not be carried out
  ModelParams final_params;

  bool ok() const noexcept { return !diverged && failure.empty(); }
};

// ---------------------------------------------------------------------------
// Effective learning rate of the most recent step

inline double current_lr(const AdaptiveOptimizer& o) { return o.last_lr(); }

template <class M, class D>
double current_lr(const Grafted<M, D>& o) {
  return current_lr(o.direction()) * o.last_scale();
}

// ---------------------------------------------------------------------------
// Mini-batch gradients

/// Draws examples per the sampling mode and returns the mean gradient.
class BatchSampler {
 public:
  BatchSampler(const Problem& problem, Sampling mode, std::size_t batch, Rng rng)
      : problem_(&problem), mode_(mode), batch_(batch), rng_(std::move(rng)) {
    if (batch_ < 1) throw ConfigError("batch_size must be >= 1");
    if (mode_ != Sampling::Iid && problem.train_size() == 0) {
      throw ConfigError(problem.kind() + ": " + std::string(to_string(mode_)) +
                        " sampling needs a finite training set");
    }
  }

  Gradient gradient(const ModelParams& w) {
    Gradient sum = Gradient::zeros_like(w);
    std::size_t count = 0;
    auto add = [&](const Example& e) {
      const Gradient g = problem_->grad(w, e);
      for (std::size_t i = 0; i < sum.num_groups(); ++i) {
        auto dst = sum.values(i);
        auto src = g.values(i);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
      }
      ++count;
    };
    switch (mode_) {
      case Sampling::Iid:
        for (std::size_t b = 0; b < batch_; ++b) add(problem_->sample(rng_));
        break;
      case Sampling::Epoch:
        for (std::size_t b = 0; b < batch_; ++b) add(problem_->train_example(next_in_epoch()));
        break;
      case Sampling::FullBatch:
        for (std::size_t k = 0; k < problem_->train_size(); ++k) add(problem_->train_example(k));
        break;
    }
    if (count > 1) {
      const auto n = static_cast<double>(count);
      for (std::size_t i = 0; i < sum.num_groups(); ++i) {
        for (double& v : sum.values(i)) v /= n;
      }
    }
    return sum;
  }

 private:
  std::size_t next_in_epoch() {
    if (cursor_ == order_.size()) {
      order_.resize(problem_->train_size());
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      rng_.shuffle(std::span<std::size_t>(order_));
      cursor_ = 0;
    }
    return order_[cursor_++];
  }

  const Problem* problem_;
  Sampling mode_;
  std::size_t batch_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

/// w_1 for a run. Every optimizer of an experiment starts from the same point.
inline ModelParams initial_params(const Problem& problem, const ExperimentConfig& cfg) {
  auto rng = Rng::derive(cfg.seed, {cfg.name, "init"});
  return problem.initial_params(rng);
}

/// Sampler for a run. Streams depend on (seed, experiment name) only, so all
/// optimizers of an experiment see the same draws while iterates agree.
inline BatchSampler make_sampler(const Problem& problem, const ExperimentConfig& cfg) {
  return BatchSampler(problem, cfg.sampling.value_or(problem.default_sampling()), cfg.batch_size,
                      Rng::derive(cfg.seed, {cfg.name, "data"}));
}

namespace detail {
inline bool diverging(double loss) { return !std::isfinite(loss) || std::abs(loss) > kDivergenceThreshold; }
}  // namespace detail

/**
 * Runs `opt` from `w` for cfg.steps steps. `trajectory`, when given,
 * receives w_1 and every later iterate.
 */
template <StepOptimizer O>
TrainingCurve train_with(const Problem& problem, O& opt, ModelParams w, const ExperimentConfig& cfg,
                         std::vector<ModelParams>* trajectory = nullptr) {
  cfg.validate();
  BatchSampler sampler = make_sampler(problem, cfg);
  TrainingCurve curve;
  if (trajectory) trajectory->push_back(w);

  const double loss0 = problem.train_loss(w);
  curve.points.push_back({0, loss0, problem.test_metric(w), 0.0});
  if (detail::diverging(loss0)) {
    curve.diverged = true;
    curve.final_params = std::move(w);
    return curve;
  }

  for (Step t = 1; t <= cfg.steps; ++t) {
    try {
      const Gradient g = sampler.gradient(w);
      w = axpy(w, opt.step(w, g), 1.0);
    } catch (const OverflowError&) {
      curve.diverged = true;
    } catch (const NumericError&) {
      curve.diverged = true;
    } catch (const InputError&) {
      curve.diverged = true;
    }
    if (curve.diverged) {
      curve.points.push_back({t, std::numeric_limits<double>::infinity(),
                              std::numeric_limits<double>::quiet_NaN(), current_lr(opt)});
      break;
    }
    if (trajectory) trajectory->push_back(w);
    const double loss = problem.train_loss(w);
    if (detail::diverging(loss)) {
      curve.diverged = true;
      curve.points.push_back({t, loss, problem.test_metric(w), current_lr(opt)});
      break;
    }
    if (t % cfg.eval_every == 0 || t == cfg.steps) {
      curve.points.push_back({t, loss, problem.test_metric(w), current_lr(opt)});
    }
  }
  curve.final_params = std::move(w);
  return curve;
}

/// Plain run of one optimizer config.
inline TrainingCurve train(const Problem& problem, const AdaptiveConfig& opt_cfg,
                           const ExperimentConfig& cfg, std::vector<ModelParams>* trajectory = nullptr) {
  ModelParams w = initial_params(problem, cfg);
  AdaptiveOptimizer opt(opt_cfg, w);
  return train_with(problem, opt, std::move(w), cfg, trajectory);
}

/// A grafted pair: M's magnitude, D's direction. eps_graft unset selects
/// default_eps_graft(d).
struct GraftSpec {
  AdaptiveConfig m;
  AdaptiveConfig d;
  GraftScope scope = GraftScope::LayerWise;
  std::optional<double> eps_graft;

  GraftConfig resolved() const {
    GraftConfig g{scope, eps_graft.value_or(default_eps_graft(d))};
    g.validate();
    return g;
  }
};

/// Grafted run; `telemetry`, when given, receives the step-norm series.
inline TrainingCurve train_grafted(const Problem& problem, const GraftSpec& spec,
                                   const ExperimentConfig& cfg,
                                   std::vector<ModelParams>* trajectory = nullptr,
                                   StepNormSeries* telemetry = nullptr) {
  ModelParams w = initial_params(problem, cfg);
  Grafted opt(AdaptiveOptimizer(spec.m, w), AdaptiveOptimizer(spec.d, w), spec.resolved());
  if (telemetry) opt.enable_telemetry();
  TrainingCurve curve = train_with(problem, opt, std::move(w), cfg, trajectory);
  if (telemetry) *telemetry = *opt.telemetry();
  return curve;
}

// ---------------------------------------------------------------------------
// Curve output

inline constexpr std::string_view kCurveCsvHeader = "step,train_loss,test_metric,lr_effective";

inline void write_curve_csv(const TrainingCurve& curve, std::ostream& os) {
  os << kCurveCsvHeader << '\n';
  for (const auto& p : curve.points) {
    os << p.step << ',' << detail::format_double(p.train_loss) << ','
       << detail::format_double(p.test_metric) << ',' << detail::format_double(p.lr_effective) << '\n';
  }
}

inline std::vector<CurvePoint> read_curve_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCurveCsvHeader) throw IoError("curve CSV: missing or wrong header");
  std::vector<CurvePoint> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    if (cols.size() != 4) throw IoError("curve CSV: expected 4 columns in '" + line + "'");
    out.push_back({static_cast<Step>(std::stoll(cols[0])), detail::parse_double(cols[1]),
                   detail::parse_double(cols[2]), detail::parse_double(cols[3])});
  }
  return out;
}

namespace detail {
inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}
}  // namespace detail

inline void export_curve_csv(const TrainingCurve& curve, const std::filesystem::path& path) {
  std::ostringstream os;
  write_curve_csv(curve, os);
  detail::write_text(path, os.str());
}

/// Largest |a_t - b_t| over all coordinates of two equally long trajectories.
inline double max_trajectory_deviation(const std::vector<ModelParams>& a, const std::vector<ModelParams>& b) {
  if (a.size() != b.size()) throw CongruenceError("trajectories differ in length");
  double dev = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) dev = std::max(dev, max_abs_diff(a[t], b[t]));
  return dev;
}

// ---------------------------------------------------------------------------
// All-pairs grid

struct GridResult {
  std::vector<std::string> names;
  std::vector<TrainingCurve> cells;  ///< row-major, rows = M, columns = D

  const TrainingCurve& at(std::size_t m, std::size_t d) const { return cells.at(m * names.size() + d); }
};

namespace detail {
template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& body) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(jobs, n);
  for (std::size_t k = 0; k < workers; ++k) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}
}  // namespace detail

/**
 * Trains every (M, D) pair. Diagonal cells run the optimizer ungrafted.
 * Per-cell failures are recorded in the cell. Labels must be distinct since
 * they name the output files.
 */
inline GridResult grid(const Problem& problem, const std::vector<AdaptiveConfig>& optimizers,
                       const ExperimentConfig& cfg, GraftScope scope = GraftScope::LayerWise,
                       std::optional<double> eps_graft = std::nullopt, unsigned jobs = 1) {
  if (optimizers.empty()) throw ConfigError("grid: needs at least one optimizer");
  cfg.validate();
  GridResult out;
  for (const auto& o : optimizers) {
    o.validate();
    if (std::find(out.names.begin(), out.names.end(), o.label) != out.names.end()) {
      throw ConfigError("grid: duplicate optimizer label '" + o.label + "'");
    }
    out.names.push_back(o.label);
  }
  const std::size_t n = optimizers.size();
  out.cells.resize(n * n);
  detail::parallel_for(n * n, jobs, [&](std::size_t k) {
    const std::size_t m = k / n;
    const std::size_t d = k % n;
    TrainingCurve& cell = out.cells[k];
    try {
      if (m == d) {
        cell = train(problem, optimizers[m], cfg);
      } else {
        cell = train_grafted(problem, GraftSpec{optimizers[m], optimizers[d], scope, eps_graft}, cfg);
      }
    } catch (const Error& e) {
      cell = TrainingCurve{};
      cell.failure = e.what();
    }
  });
  return out;
}

inline std::string grid_cell_filename(const std::string& m, const std::string& d) {
  return m + "__" + d + ".csv";
}

inline constexpr std::string_view kGridSummaryHeader = "m,d,final_train_loss,final_test_metric,steps";

inline void write_grid_summary(const GridResult& g, std::ostream& os) {
  os << kGridSummaryHeader << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t m = 0; m < g.names.size(); ++m) {
    for (std::size_t d = 0; d < g.names.size(); ++d) {
      const auto& c = g.at(m, d);
      const CurvePoint last = c.points.empty() ? CurvePoint{0, nan, nan, nan} : c.points.back();
      os << g.names[m] << ',' << g.names[d] << ',' << detail::format_double(last.train_loss) << ','
         << detail::format_double(last.test_metric) << ',' << last.step << '\n';
    }
  }
}

/// Writes one CSV per cell plus summary.csv; returns the file names written.
inline std::vector<std::string> export_grid(const GridResult& g, const std::filesystem::path& dir) {
  std::vector<std::string> files;
  for (std::size_t m = 0; m < g.names.size(); ++m) {
    for (std::size_t d = 0; d < g.names.size(); ++d) {
      const auto name = grid_cell_filename(g.names[m], g.names[d]);
      export_curve_csv(g.at(m, d), dir / name);
      files.push_back(name);
    }
  }
  std::ostringstream os;
  write_grid_summary(g, os);
  detail::write_text(dir / "summary.csv", os.str());
  files.emplace_back("summary.csv");
  return files;
}

// ---------------------------------------------------------------------------
// Schedule correction discovery

struct CorrectionSpec {
  AdaptiveConfig m;
  AdaptiveConfig d;
  FitKind kind = FitKind::Linear;
  std::optional<double> eps_graft;
  FitWindow window;
};

/// The fitted ratio series as a schedule to multiply into D's lr.
inline Schedule correction_schedule(const CorrectionFit& f) {
  if (f.kind == FitKind::Linear) return Schedule::linear(f.params.at(0), f.params.at(1));
  return Schedule::power(f.params.at(0), f.params.at(1));
}

struct CorrectionReport {
  TrainingCurve grafted;
  TrainingCurve d_plain;
  TrainingCurve d_corrected;
  StepNormSeries telemetry;
  std::optional<CorrectionFit> fit;
  std::string error;  ///< fit or corrected-run failure; the report is partial
  /// max over steps and coordinates of |w_grafted - w_corrected|; NaN when
  /// the corrected run did not complete.
  double max_deviation = std::numeric_limits<double>::quiet_NaN();
};

/**
 * Global graft (M, D) with telemetry, fit of the global ratio series, then D
 * alone with its lr multiplied by the fitted correction.
 */
inline CorrectionReport correction_pipeline(const Problem& problem, const CorrectionSpec& spec,
                                            const ExperimentConfig& cfg) {
  CorrectionReport r;
  std::vector<ModelParams> traj_graft;
  r.grafted = train_grafted(problem, GraftSpec{spec.m, spec.d, GraftScope::Global, spec.eps_graft}, cfg,
                            &traj_graft, &r.telemetry);
  r.d_plain = train(problem, spec.d, cfg);
  try {
    r.fit = fit_correction(r.telemetry, kGlobalGroup, spec.kind, spec.window);
    AdaptiveConfig corrected = spec.d;
    corrected.lr = Schedule::product({spec.d.lr, correction_schedule(*r.fit)});
    corrected.label = spec.d.label + "_corrected";
    std::vector<ModelParams> traj_corr;
    r.d_corrected = train(problem, corrected, cfg, &traj_corr);
    if (traj_corr.size() == traj_graft.size()) r.max_deviation = max_trajectory_deviation(traj_graft, traj_corr);
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

// ---------------------------------------------------------------------------
// Epsilon sweep

/// One run per epsilon, everything else (seed included) held fixed.
inline std::vector<TrainingCurve> epsilon_sweep(const Problem& problem, const AdaptiveConfig& base,
                                                const std::vector<double>& eps_values,
                                                const ExperimentConfig& cfg) {
  if (!base.precondition) throw ConfigError("epsilon_sweep: base optimizer must precondition");
  std::vector<TrainingCurve> out;
  for (double eps : eps_values) {
    AdaptiveConfig c = base;
    c.epsilon = eps;
    c.validate();
    out.push_back(train(problem, c, cfg));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pathological constructions

struct PathologicalSpec {
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t hinge_d = 400;
  double hinge_c = 0.5;
  std::vector<double> sgd_eta0{0.25, 0.5, 1.0, 2.0, 4.0};
  std::size_t wilson_n = 40;
  double wilson_p = 0.5;
  Step wilson_steps = 3000;
  double wilson_adagrad_lr = 0.05;
  double wilson_sgd_lr = 0.1;
};

/// AdaGrad with beta1 = 0 and epsilon = 0 (pseudoinverse rule).
inline AdaptiveConfig plain_adagrad(Schedule lr) {
  AdaptiveConfig c;
  c.beta1 = 0.0;
  c.beta2 = 1.0;
  c.epsilon = 0.0;
  c.precondition = true;
  c.lr = std::move(lr);
  c.label = "adagrad";
  return c;
}

struct HingeSeedResult {
  std::uint64_t seed = 0;
  Step steps = 0;
  TrainingCurve adagrad;
  double adagrad_train_loss = 0.0;
  double adagrad_test_loss = 0.0;   ///< population hinge loss
  double adagrad_test_error = 0.0;  ///< population 0/1 error
  std::vector<TrainingCurve> sgd;   ///< one per eta0
  std::size_t best_sgd = 0;         ///< index of the lowest final test loss
  double sgd_test_loss = 0.0;
  double sgd_test_error = 0.0;
  bool adagrad_zero_train = false;
  bool adagrad_error_ok = false;  ///< |test loss - (1 - m/d)| <= 0.01
  bool sgd_error_ok = false;      ///< best SGD test loss >= 0.70

  bool passed() const noexcept { return adagrad_zero_train && adagrad_error_ok && sgd_error_ok; }
};

struct WilsonSeedResult {
  std::uint64_t seed = 0;
  TrainingCurve adagrad;
  TrainingCurve sgd;
  bool sign_span = false;
  double adagrad_accuracy = 0.0;
  double sgd_accuracy = 0.0;

  bool passed() const noexcept { return sign_span && adagrad_accuracy <= 0.55 && sgd_accuracy >= 0.9; }
};

struct PathologicalReport {
  PathologicalSpec spec;
  std::vector<HingeSeedResult> hinge;
  std::vector<WilsonSeedResult> wilson;

  bool passed() const noexcept {
    return std::all_of(hinge.begin(), hinge.end(), [](const auto& h) { return h.passed(); }) &&
           std::all_of(wilson.begin(), wilson.end(), [](const auto& w) { return w.passed(); });
  }
};

inline HingeSeedResult run_hinge_seed(const PathologicalSpec& spec, std::uint64_t seed) {
  const SparseHingeInstance inst({spec.hinge_d, spec.hinge_c, seed});
  HingeSeedResult r;
  r.seed = seed;
  r.steps = static_cast<Step>(inst.train_size());
  ExperimentConfig cfg;
  cfg.name = "hinge";
  cfg.seed = seed;
  cfg.steps = r.steps;
  cfg.eval_every = r.steps;
  cfg.sampling = Sampling::Epoch;

  r.adagrad = train(inst, plain_adagrad(Schedule::constant(1.0)), cfg);
  r.adagrad_train_loss = inst.train_loss(r.adagrad.final_params);
  r.adagrad_test_loss = inst.population_loss(r.adagrad.final_params);
  r.adagrad_test_error = inst.zero_one_error(r.adagrad.final_params);
  const double unseen = 1.0 - static_cast<double>(inst.train_size()) / static_cast<double>(inst.d());
  r.adagrad_zero_train = r.adagrad.ok() && r.adagrad_train_loss == 0.0;
  r.adagrad_error_ok = std::abs(r.adagrad_test_loss - unseen) <= 0.01;

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < spec.sgd_eta0.size(); ++k) {
    auto c = preset("sgd", Schedule::inverse_sqrt(spec.sgd_eta0[k]));
    r.sgd.push_back(train(inst, c, cfg));
    const double loss = inst.population_loss(r.sgd.back().final_params);
    if (r.sgd.back().ok() && loss < best) {
      best = loss;
      r.best_sgd = k;
    }
  }
  if (!r.sgd.empty()) {
    const auto& w = r.sgd[r.best_sgd].final_params;
    r.sgd_test_loss = inst.population_loss(w);
    r.sgd_test_error = inst.zero_one_error(w);
  }
  r.sgd_error_ok = std::isfinite(best) && r.sgd_test_loss >= 0.70;
  return r;
}

inline WilsonSeedResult run_wilson_seed(const PathologicalSpec& spec, std::uint64_t seed) {
  WilsonSpec ws;
  ws.n = spec.wilson_n;
  ws.p = spec.wilson_p;
  ws.seed = seed;
  const WilsonRegressionInstance inst(ws);
  WilsonSeedResult r;
  r.seed = seed;
  ExperimentConfig cfg;
  cfg.name = "wilson";
  cfg.seed = seed;
  cfg.steps = spec.wilson_steps;
  cfg.eval_every = std::max<Step>(1, spec.wilson_steps / 100);
  cfg.sampling = Sampling::FullBatch;

  std::vector<ModelParams> traj;
  r.adagrad = train(inst, plain_adagrad(Schedule::constant(spec.wilson_adagrad_lr)), cfg, &traj);
  r.sign_span = r.adagrad.ok() && sign_span_check(inst, traj);
  r.adagrad_accuracy = inst.fresh_accuracy(r.adagrad.final_params);

  r.sgd = train(inst, preset("sgd", Schedule::constant(spec.wilson_sgd_lr)), cfg);
  r.sgd_accuracy = inst.fresh_accuracy(r.sgd.final_params);
  return r;
}

/// Both constructions for every seed, AdaGrad against SGD.
inline PathologicalReport pathological_suite(const PathologicalSpec& spec, unsigned jobs = 1) {
  PathologicalReport rep;
  rep.spec = spec;
  const std::size_t n = spec.seeds.size();
  rep.hinge.resize(n);
  rep.wilson.resize(n);
  detail::parallel_for(2 * n, jobs, [&](std::size_t k) {
    if (k < n) {
      rep.hinge[k] = run_hinge_seed(spec, spec.seeds[k]);
    } else {
      rep.wilson[k - n] = run_wilson_seed(spec, spec.seeds[k - n]);
    }
  });
  return rep;
}

inline Json pathological_spec_to_json(const PathologicalSpec& s) {
  return {{"seeds", s.seeds},
          {"hinge_d", s.hinge_d},
          {"hinge_c", s.hinge_c},
          {"sgd_eta0", s.sgd_eta0},
          {"wilson_n", s.wilson_n},
          {"wilson_p", s.wilson_p},
          {"wilson_steps", s.wilson_steps},
          {"wilson_adagrad_lr", s.wilson_adagrad_lr},
          {"wilson_sgd_lr", s.wilson_sgd_lr}};
}

inline PathologicalSpec pathological_spec_from_json(const Json& j) {
  constexpr std::string_view where = "pathological";
  if (!j.is_object()) throw ConfigError("pathological: expected an object");
  detail::check_keys(j, {"seeds", "hinge_d", "hinge_c", "sgd_eta0", "wilson_n", "wilson_p", "wilson_steps",
                         "wilson_adagrad_lr", "wilson_sgd_lr"},
                     where);
  PathologicalSpec s;
  if (j.contains("seeds")) {
    const Json& a = j.at("seeds");
    if (!a.is_array() || a.empty()) throw ConfigError("pathological.seeds: expected a non-empty array");
    s.seeds.clear();
    for (const auto& x : a) {
      if (!x.is_number_unsigned()) throw ConfigError("pathological.seeds: expected non-negative integers");
      s.seeds.push_back(x.get<std::uint64_t>());
    }
  }
  const auto hd = detail::get_integer(j, "hinge_d", where, static_cast<std::int64_t>(s.hinge_d));
  if (hd < 1) throw ConfigError("pathological.hinge_d must be >= 1");
  s.hinge_d = static_cast<std::size_t>(hd);
  s.hinge_c = detail::get_number(j, "hinge_c", where, s.hinge_c);
  if (j.contains("sgd_eta0")) {
    const Json& a = j.at("sgd_eta0");
    if (!a.is_array() || a.empty()) throw ConfigError("pathological.sgd_eta0: expected a non-empty array");
    s.sgd_eta0.clear();
    for (const auto& x : a) {
      if (!x.is_number() || !(x.get<double>() > 0.0)) throw ConfigError("pathological.sgd_eta0: expected positive numbers");
      s.sgd_eta0.push_back(x.get<double>());
    }
  }
  const auto wn = detail::get_integer(j, "wilson_n", where, static_cast<std::int64_t>(s.wilson_n));
  if (wn < 1) throw ConfigError("pathological.wilson_n must be >= 1");
  s.wilson_n = static_cast<std::size_t>(wn);
  s.wilson_p = detail::get_number(j, "wilson_p", where, s.wilson_p);
  s.wilson_steps = detail::get_integer(j, "wilson_steps", where, s.wilson_steps);
  if (s.wilson_steps < 1) throw ConfigError("pathological.wilson_steps must be >= 1");
  s.wilson_adagrad_lr = detail::get_number(j, "wilson_adagrad_lr", where, s.wilson_adagrad_lr);
  s.wilson_sgd_lr = detail::get_number(j, "wilson_sgd_lr", where, s.wilson_sgd_lr);
  if (!(s.wilson_adagrad_lr > 0.0) || !(s.wilson_sgd_lr > 0.0)) {
    throw ConfigError("pathological: learning rates must be > 0");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Regret of pseudoinverse AdaGrad on online linear losses

struct RegretSpec {
  std::uint64_t seed = 0;
  std::size_t d = 20;
  std::size_t rounds = 2000;
  std::size_t random_per_kind = 5;  ///< for each of the four random kinds
  std::size_t adversarial = 5;
  double radius = 4.0;
  double lr = 1.0;
  std::size_t tail = 1000;  ///< window of the sublinearity check
};

struct RegretRow {
  std::string sequence;
  double regret = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  ///< regret / rhs (0 when rhs is 0)
  double avg_regret_tail_start = 0.0;  ///< prefix regret / t at t = T - tail
  double avg_regret_end = 0.0;         ///< prefix regret / t at t = T
  bool sublinear = false;              ///< avg_regret_end < avg_regret_tail_start
  bool zero_history_fixed = true;      ///< never-touched coordinates stayed exactly 0

  bool passed() const noexcept { return ratio <= 2.0 && sublinear && zero_history_fixed; }
};

/// w_1 = 0 followed by T diagonal AdaGrad (beta1 = 0, epsilon = 0) iterates.
inline std::vector<ParamVector> online_adagrad(const OnlineLinearSequence& seq, double lr,
                                               bool* zero_history_fixed = nullptr) {
  const AdaptiveConfig cfg = plain_adagrad(Schedule::constant(lr));
  ModelParams w = ModelParams::single(ParamVector(seq.dim(), 0.0));
  OptimizerState st = init_state(w);
  std::vector<ParamVector> traj{w.flatten()};
  std::vector<bool> touched(seq.dim(), false);
  bool fixed = true;
  for (const auto& gt : seq.gradients) {
    const Gradient g = Gradient::single(gt);
    w = axpy(w, adaptive_step(cfg, st, g), 1.0);
    auto v = w.values(0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      touched[i] = touched[i] || gt[i] != 0.0;
      if (!touched[i] && v[i] != 0.0) fixed = false;
    }
    traj.push_back(w.flatten());
  }
  if (zero_history_fixed) *zero_history_fixed = fixed;
  return traj;
}

inline RegretRow evaluate_regret(const OnlineLinearSequence& seq, double lr, std::size_t tail) {
  RegretRow row;
  row.sequence = seq.name;
  const auto traj = online_adagrad(seq, lr, &row.zero_history_fixed);
  row.regret = regret(seq, traj);
  row.rhs = regret_rhs_diag(seq, traj);
  row.ratio = row.rhs > 0.0 ? row.regret / row.rhs : 0.0;
  const auto prefix = prefix_regret(seq, traj);
  const std::size_t T = prefix.size();
  const std::size_t t0 = tail < T ? T - tail : 1;
  row.avg_regret_tail_start = prefix[t0 - 1] / static_cast<double>(t0);
  row.avg_regret_end = prefix[T - 1] / static_cast<double>(T);
  row.sublinear = row.avg_regret_end < row.avg_regret_tail_start;
  return row;
}

/// The frozen sequences of a regret run: random kinds first, then cycling.
inline std::vector<OnlineLinearSequence> regret_sequences(const RegretSpec& spec) {
  if (spec.d == 0 || spec.rounds == 0) throw ConfigError("regret: d and rounds must be >= 1");
  std::vector<OnlineLinearSequence> out;
  for (auto kind : {SequenceKind::Gaussian, SequenceKind::Scaled, SequenceKind::Sparse, SequenceKind::Late}) {
    for (std::size_t k = 0; k < spec.random_per_kind; ++k) {
      const std::string name = std::string(to_string(kind)) + "_" + std::to_string(k);
      auto rng = Rng::derive(spec.seed, {"regret", name});
      out.push_back(random_linear_sequence(name, spec.d, spec.rounds, kind, rng, spec.radius));
    }
  }
  for (std::size_t k = 0; k < spec.adversarial; ++k) {
    out.push_back(cycling_sequence("cycling_" + std::to_string(k), spec.d, spec.rounds, k, spec.radius));
  }
  return out;
}

inline std::vector<RegretRow> regret_suite(const RegretSpec& spec, unsigned jobs = 1) {
  if (!(spec.lr > 0.0)) throw ConfigError("regret: lr must be > 0");
  if (spec.tail == 0 || spec.tail >= spec.rounds) throw ConfigError("regret: tail must lie in [1, rounds)");
  const auto seqs = regret_sequences(spec);
  std::vector<RegretRow> rows(seqs.size());
  detail::parallel_for(seqs.size(), jobs, [&](std::size_t k) { rows[k] = evaluate_regret(seqs[k], spec.lr, spec.tail); });
  return rows;
}

inline constexpr std::string_view kRegretCsvHeader = "sequence,regret,rhs,ratio,avg_regret_tail_start,avg_regret_end,sublinear";

inline void write_regret_csv(const std::vector<RegretRow>& rows, std::ostream& os) {
  os << kRegretCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.sequence << ',' << detail::format_double(r.regret) << ',' << detail::format_double(r.rhs) << ','
       << detail::format_double(r.ratio) << ',' << detail::format_double(r.avg_regret_tail_start) << ','
       << detail::format_double(r.avg_regret_end) << ',' << (r.sublinear ? 1 : 0) << '\n';
  }
}

inline Json regret_spec_to_json(const RegretSpec& s) {
  return {{"seed", s.seed},     {"d", s.d},         {"rounds", s.rounds},
          {"random_per_kind", s.random_per_kind}, {"adversarial", s.adversarial},
          {"radius", s.radius}, {"lr", s.lr},       {"tail", s.tail}};
}

inline RegretSpec regret_spec_from_json(const Json& j) {
  constexpr std::string_view where = "regret";
  if (!j.is_object()) throw ConfigError("regret: expected an object");
  detail::check_keys(j, {"seed", "d", "rounds", "random_per_kind", "adversarial", "radius", "lr", "tail"}, where);
  RegretSpec s;
  auto count = [&](std::string_view key, std::size_t fallback, std::int64_t min) {
    const auto v = detail::get_integer(j, key, where, static_cast<std::int64_t>(fallback));
    if (v < min) throw ConfigError("regret." + std::string(key) + " must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
  };
  s.seed = detail::get_seed(j, "seed", where, s.seed);
  s.d = count("d", s.d, 1);
  s.rounds = count("rounds", s.rounds, 2);
  s.random_per_kind = count("random_per_kind", s.random_per_kind, 0);
  s.adversarial = count("adversarial", s.adversarial, 0);
  s.radius = detail::get_number(j, "radius", where, s.radius);
  s.lr = detail::get_number(j, "lr", where, s.lr);
  s.tail = count("tail", s.tail, 1);
  if (!(s.radius >= 0.0)) throw ConfigError("regret.radius must be >= 0");
  if (!(s.lr > 0.0)) throw ConfigError("regret.lr must be > 0");
  if (s.tail >= s.rounds) throw ConfigError("regret.tail must be < regret.rounds");
  return s;
}

}  // namespace adagraft

#endif  // ADAGRAFT_HARNESS_HPP
