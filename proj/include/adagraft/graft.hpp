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

#ifndef ADAGRAFT_GRAFT_HPP
#define ADAGRAFT_GRAFT_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adagraft/core.hpp"
#include "adagraft/optim.hpp"
#include "adagraft/telemetry.hpp"

namespace adagraft {

enum class GraftScope { LayerWise, Global };

inline std::string_view to_string(GraftScope s) {
  return s == GraftScope::LayerWise ? "layerwise" : "global";
}

inline GraftScope graft_scope_from_string(std::string_view s) {
  if (s == "layerwise" || s == "layer_wise") return GraftScope::LayerWise;
  if (s == "global") return GraftScope::Global;
  throw ConfigError("unknown graft scope '" + std::string(s) + "'");
}

struct GraftConfig {
  GraftScope scope = GraftScope::LayerWise;
  double eps_graft = 0.0;  ///< denominator guard, >= 0

  void validate() const {
    if (!(eps_graft >= 0.0) || !std::isfinite(eps_graft)) throw ConfigError("eps_graft must be >= 0");
  }
};

/// Guard used when the caller does not choose one: 0 when D never
/// preconditions (its steps are nonzero whenever the gradient is), a tiny
/// positive value otherwise.
inline double default_eps_graft(const AdaptiveConfig& direction) {
  return direction.precondition ? 1e-16 : 0.0;
}

namespace detail {

struct ScopeRatio {
  double applied;  // multiplier for the direction step
  StepNormRecord rec;
};

inline ScopeRatio scope_ratio(double norm_m, double norm_d, double eps, Step t, std::string group) {
  ScopeRatio out{0.0, {t, std::move(group), norm_m, norm_d, 0.0, false}};
  if (norm_d == 0.0) {
    out.rec.guarded = true;
    return out;
  }
  out.rec.ratio = norm_m / norm_d;
  out.applied = norm_m / (norm_d + eps);
  out.rec.guarded = eps > 1e-12 * norm_d;
  if (!std::isfinite(out.applied) || !std::isfinite(out.rec.ratio)) {
    throw NumericError("graft: non-finite norm ratio at step " + std::to_string(t));
  }
  return out;
}

// Per scope unit multipliers for two displacement containers of equal layout.
template <class A, class B>
std::vector<double> scope_multipliers(const Grouped<A>& dm, const Grouped<B>& dd,
                                      const GraftConfig& cfg, Step t, StepNormSeries* sink) {
  std::vector<double> mult(dd.num_groups(), 0.0);
  if (cfg.scope == GraftScope::Global) {
    auto r = scope_ratio(global_norm(dm), global_norm(dd), cfg.eps_graft, t, std::string(kGlobalGroup));
    std::fill(mult.begin(), mult.end(), r.applied);
    if (sink) sink->record(std::move(r.rec));
  } else {
    for (std::size_t i = 0; i < dd.num_groups(); ++i) {
      auto r = scope_ratio(group_norm(dm, i), group_norm(dd, i), cfg.eps_graft, t, dd.name(i));
      mult[i] = r.applied;
      if (sink) sink->record(std::move(r.rec));
    }
  }
  return mult;
}

}  // namespace detail

/**
 * Rescales the direction step `dd` to the magnitude of `dm`, per group
 * (layer-wise) or with one global ratio. A scope unit whose direction step is
 * exactly zero yields a zero step. Records one StepNormRecord per scope unit
 * into `sink` when given.
 */
inline StepProposal graft_combine(const StepProposal& dm, const StepProposal& dd,
                                  const GraftConfig& cfg, Step t = 0,
                                  StepNormSeries* sink = nullptr) {
  require_congruent(dm, dd, "graft_combine");
  const auto mult = detail::scope_multipliers(dm, dd, cfg, t, sink);
  StepProposal out = dd;
  for (std::size_t i = 0; i < out.num_groups(); ++i) {
    for (double& v : out.values(i)) v = mult[i] * v;
  }
  return out;
}

/**
 * The grafted meta-optimizer: every call feeds the same gradient to the
 * magnitude child M and the direction child D, then takes D's direction with
 * M's step norm. Itself a StepOptimizer, so grafts nest.
 */
template <StepOptimizer M, StepOptimizer D>
class Grafted {
 public:
  Grafted(M magnitude, D direction, GraftConfig cfg)
      : m_(std::move(magnitude)), d_(std::move(direction)), cfg_(cfg) {
    cfg_.validate();
  }

  StepProposal step(const ModelParams& w, const Gradient& g) {
    StepProposal dm = m_.step(w, g);
    StepProposal dd = d_.step(w, g);
    ++t_;
    StepProposal out = graft_combine(dm, dd, cfg_, t_, telemetry_ ? &*telemetry_ : nullptr);
    const double nd = global_norm(dd);
    last_scale_ = nd == 0.0 ? 0.0 : global_norm(out) / nd;
    return out;
  }

  void update(ModelParams& w, const Gradient& g) { w = axpy(w, step(w, g), 1.0); }

  Step steps_taken() const noexcept { return t_; }

  /// ||grafted step|| / ||D's step|| for the most recent step.
  double last_scale() const noexcept { return last_scale_; }

  void enable_telemetry() {
    if (!telemetry_) telemetry_.emplace();
  }
  const StepNormSeries* telemetry() const noexcept { return telemetry_ ? &*telemetry_ : nullptr; }

  const M& magnitude() const noexcept { return m_; }
  const D& direction() const noexcept { return d_; }
  M& magnitude() noexcept { return m_; }
  D& direction() noexcept { return d_; }
  const GraftConfig& config() const noexcept { return cfg_; }

 private:
  M m_;
  D d_;
  GraftConfig cfg_;
  Step t_ = 0;
  double last_scale_ = 0.0;
  std::optional<StepNormSeries> telemetry_;
};

/**
 * Grafting through in-place optimizers only, using one scratch copy of the
 * weights: save w, run M in place and measure its displacement, restore, run
 * D in place and measure, then rescale D's displacement about the saved
 * point. The lr given to D cancels out of the result.
 */
template <InPlaceOptimizer M, InPlaceOptimizer D>
ModelParams blackbox_graft_step(M& magnitude, D& direction, const GraftConfig& cfg,
                                const ModelParams& w, const Gradient& g, Step t = 0,
                                StepNormSeries* sink = nullptr) {
  const ModelParams scratch = w;

  ModelParams work = w;
  magnitude.update(work, g);
  StepProposal moved_m = StepProposal::zeros_like(w);
  for (std::size_t i = 0; i < w.num_groups(); ++i) {
    auto a = work.values(i);
    auto s = scratch.values(i);
    auto out = moved_m.values(i);
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] - s[j];
  }

  work = scratch;
  direction.update(work, g);
  StepProposal moved_d = StepProposal::zeros_like(w);
  for (std::size_t i = 0; i < w.num_groups(); ++i) {
    auto a = work.values(i);
    auto s = scratch.values(i);
    auto out = moved_d.values(i);
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] - s[j];
  }

  const auto mult = detail::scope_multipliers(moved_m, moved_d, cfg, t, sink);
  ModelParams next = scratch;
  for (std::size_t i = 0; i < next.num_groups(); ++i) {
    auto dst = next.values(i);
    auto dir = moved_d.values(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += mult[i] * dir[j];
  }
  if (!next.all_finite()) throw OverflowError("blackbox_graft_step: non-finite weights");
  return next;
}

}  // namespace adagraft

#endif  // ADAGRAFT_GRAFT_HPP
