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

#ifndef ADAGRAFT_OPTIM_HPP
#define ADAGRAFT_OPTIM_HPP

#include <cmath>
#include <concepts>
#include <string>
#include <string_view>
#include <utility>

#include "adagraft/core.hpp"
#include "adagraft/detail/json_util.hpp"
#include "adagraft/schedules.hpp"

namespace adagraft {

/**
 * Hyperparameters of the generic second-moment optimizer.
 *
 * Accumulators follow m1 <- beta1*m1 + g, m2 <- beta2*m2 + g^2 with no
 * (1 - beta) factors; those are absorbed into `lr`. beta2 = 1 is AdaGrad's
 * non-decaying accumulator. With `precondition` off the step is -eta*m1
 * (heavy-ball SGD) and beta2/epsilon are unused.
 */
struct AdaptiveConfig {
  double beta1 = 0.0;
  double beta2 = 1.0;
  double epsilon = 0.0;
  bool precondition = false;
  bool bias_correct = false;
  Schedule lr = Schedule::constant(1.0);
  std::string label = "custom";

  void validate() const {
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 <= 1.0)) throw ConfigError("beta2 must lie in [0, 1]");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be >= 0");
    if (bias_correct && beta2 >= 1.0) throw ConfigError("bias correction requires beta2 < 1");
    if (label.empty()) throw ConfigError("optimizer label must be non-empty");
  }
};

struct OptimizerState {
  Moments m1;
  Moments m2;
  Step t = 0;

  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

inline OptimizerState init_state(const ModelParams& model) {
  return {Moments::zeros_like(model), Moments::zeros_like(model), 0};
}

/// Adam's learning-rate factor sqrt(1 - beta2^t) / (1 - beta1^t).
inline double bias_correction(double beta1, double beta2, Step t) {
  if (t < 1) throw DomainError("bias_correction: t must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw DomainError("bias_correction: beta1 and beta2 must lie in [0, 1)");
  }
  const double tf = static_cast<double>(t);
  return std::sqrt(1.0 - std::pow(beta2, tf)) / (1.0 - std::pow(beta1, tf));
}

/// eta_t actually applied at step t, bias correction included.
inline double effective_lr(const AdaptiveConfig& cfg, Step t) {
  double eta = cfg.lr.evaluate(t);
  if (cfg.bias_correct) eta *= bias_correction(cfg.beta1, cfg.beta2, t);
  return eta;
}

/**
 * One step of the generic optimizer. Advances `st` in place and returns the
 * proposed displacement. A coordinate whose m2 + epsilon is exactly zero
 * proposes exactly zero (pseudoinverse rule).
 */
inline StepProposal adaptive_step(const AdaptiveConfig& cfg, OptimizerState& st, const Gradient& g) {
  require_congruent(st.m1, g, "adaptive_step");
  if (!g.all_finite()) throw InputError("adaptive_step: gradient has non-finite entries");

  const Step t = st.t + 1;
  const double eta = effective_lr(cfg, t);
  StepProposal delta = StepProposal::zeros_like(g);

  for (std::size_t i = 0; i < g.num_groups(); ++i) {
    auto gi = g.values(i);
    auto m1 = st.m1.values(i);
    auto m2 = st.m2.values(i);
    auto out = delta.values(i);
    for (std::size_t j = 0; j < gi.size(); ++j) {
      m1[j] = cfg.beta1 * m1[j] + gi[j];
      m2[j] = cfg.beta2 * m2[j] + gi[j] * gi[j];
      if (cfg.precondition) {
        const double denom = m2[j] + cfg.epsilon;
        out[j] = denom == 0.0 ? 0.0 : -eta * m1[j] / std::sqrt(denom);
      } else {
        out[j] = m1[j] == 0.0 ? 0.0 : -eta * m1[j];
      }
    }
  }
  st.t = t;
  return delta;
}

/// Named configurations: sgd, momentum_sgd, adagrad, rmsprop, adam.
inline AdaptiveConfig preset(std::string_view name, Schedule lr) {
  AdaptiveConfig c;
  c.lr = std::move(lr);
  c.label = std::string(name);
  if (name == "sgd") {
    c.beta1 = 0.0;
  } else if (name == "momentum_sgd") {
    c.beta1 = 0.9;
  } else if (name == "adagrad") {
    c.beta1 = 0.9;
    c.beta2 = 1.0;
    c.precondition = true;
  } else if (name == "rmsprop") {
    c.beta1 = 0.0;
    c.beta2 = 0.999;
    c.precondition = true;
  } else if (name == "adam") {
    c.beta1 = 0.9;
    c.beta2 = 0.999;
    c.precondition = true;
    c.bias_correct = true;
  } else {
    throw ConfigError("unknown optimizer preset '" + std::string(name) + "'");
  }
  return c;
}

/// Anything that proposes a step from (w, g) and counts its steps.
template <class O>
concept StepOptimizer = requires(O& o, const ModelParams& w, const Gradient& g) {
  { o.step(w, g) } -> std::same_as<StepProposal>;
  { o.steps_taken() } -> std::convertible_to<Step>;
};

/// Anything that can only update weights in place (black-box interface).
template <class O>
concept InPlaceOptimizer = requires(O& o, ModelParams& w, const Gradient& g) {
  o.update(w, g);
};

/// Owning wrapper: one config plus its state.
class AdaptiveOptimizer {
 public:
  AdaptiveOptimizer(AdaptiveConfig cfg, const ModelParams& w1)
      : cfg_(std::move(cfg)), state_(init_state(w1)) {
    cfg_.validate();
  }

  StepProposal step(const ModelParams& w, const Gradient& g) {
    require_congruent(w, g, "AdaptiveOptimizer::step");
    return adaptive_step(cfg_, state_, g);
  }

  void update(ModelParams& w, const Gradient& g) { w = axpy(w, step(w, g), 1.0); }

  Step steps_taken() const noexcept { return state_.t; }

  /// Learning rate used by the most recent step (0 before the first).
  double last_lr() const { return state_.t == 0 ? 0.0 : effective_lr(cfg_, state_.t); }

  const AdaptiveConfig& config() const noexcept { return cfg_; }
  const OptimizerState& state() const noexcept { return state_; }

 private:
  AdaptiveConfig cfg_;
  OptimizerState state_;
};

// JSON form: {"preset": "adam", "lr": {...}, "beta1": ..., "label": ...};
// every field other than the preset name is an optional override.

inline Json optimizer_to_json(const AdaptiveConfig& c) {
  return {{"label", c.label},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"epsilon", c.epsilon},
          {"precondition", c.precondition},
          {"bias_correct", c.bias_correct},
          {"lr", schedule_to_json(c.lr)}};
}

inline AdaptiveConfig optimizer_from_json(const Json& j) {
  constexpr std::string_view where = "optimizer";
  detail::check_keys(j, {"preset", "label", "beta1", "beta2", "epsilon", "precondition",
                         "bias_correct", "lr"},
                     where);
  AdaptiveConfig c;
  if (j.contains("preset")) {
    c = preset(detail::get_string(j, "preset", where), Schedule::constant(1.0));
  }
  if (j.contains("lr")) c.lr = schedule_from_json(j.at("lr"));
  c.beta1 = detail::get_number(j, "beta1", where, c.beta1);
  c.beta2 = detail::get_number(j, "beta2", where, c.beta2);
  c.epsilon = detail::get_number(j, "epsilon", where, c.epsilon);
  c.precondition = detail::get_bool(j, "precondition", where, c.precondition);
  c.bias_correct = detail::get_bool(j, "bias_correct", where, c.bias_correct);
  c.label = detail::get_string(j, "label", where, c.label);
  c.validate();
  return c;
}

}  // namespace adagraft

#endif  // ADAGRAFT_OPTIM_HPP
