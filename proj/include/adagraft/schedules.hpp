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

#ifndef ADAGRAFT_SCHEDULES_HPP
#define ADAGRAFT_SCHEDULES_HPP

#include <cmath>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "adagraft/core.hpp"
#include "adagraft/detail/json_util.hpp"

namespace adagraft {

class Schedule;

namespace sched {

struct Constant {
  double value;
};
/// c / t
struct InverseTime {
  double c;
};
/// c / sqrt(t)
struct InverseSqrt {
  double c;
};
/// c * gamma^t, 0 < gamma < 1
struct ExpDecay {
  double c;
  double gamma;
};
/// c * gamma^t, gamma > 1
struct ExpGrow {
  double c;
  double gamma;
};
/// cos(c0 + c1 t)
struct Cosine {
  double c0;
  double c1;
};
/// Linear ramp 0 -> peak over `warmup_steps`, then peak * drop_factor^k
/// where k counts the drop steps already reached.
struct WarmupStaircase {
  double peak;
  Step warmup_steps;
  std::vector<Step> drop_steps;
  double drop_factor;
};
/// c0 + c1 t
struct Linear {
  double c0;
  double c1;
};
/// c * t^alpha
struct Power {
  double c;
  double alpha;
};
struct Product {
  std::vector<Schedule> factors;
};

}  // namespace sched

/**
 * A learning-rate schedule eta_t over step indices t >= 1. Immutable value
 * type; build through the named factories, which validate their arguments.
 */
class Schedule {
 public:
  using Variant = std::variant<sched::Constant, sched::InverseTime, sched::InverseSqrt,
                               sched::ExpDecay, sched::ExpGrow, sched::Cosine,
                               sched::WarmupStaircase, sched::Linear, sched::Power,
                               sched::Product>;

  Schedule() : v_(sched::Constant{1.0}) {}

  static Schedule constant(double value) {
    require_positive(value, "constant");
    return Schedule(sched::Constant{value});
  }
  static Schedule inverse_time(double c) {
    require_positive(c, "inverse_time");
    return Schedule(sched::InverseTime{c});
  }
  static Schedule inverse_sqrt(double c) {
    require_positive(c, "inverse_sqrt");
    return Schedule(sched::InverseSqrt{c});
  }
  static Schedule exp_decay(double c, double gamma) {
    require_positive(c, "exp_decay");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("exp_decay: gamma must lie in (0, 1)");
    return Schedule(sched::ExpDecay{c, gamma});
  }
  static Schedule exp_grow(double c, double gamma) {
    require_positive(c, "exp_grow");
    if (!(gamma > 1.0) || !std::isfinite(gamma)) throw ConfigError("exp_grow: gamma must be > 1");
    return Schedule(sched::ExpGrow{c, gamma});
  }
  static Schedule cosine(double c0, double c1) {
    if (!std::isfinite(c0) || !std::isfinite(c1)) throw ConfigError("cosine: non-finite constant");
    return Schedule(sched::Cosine{c0, c1});
  }
  static Schedule warmup_staircase(double peak, Step warmup_steps, std::vector<Step> drop_steps,
                                   double drop_factor) {
    require_positive(peak, "warmup_staircase");
    if (warmup_steps < 0) throw ConfigError("warmup_staircase: warmup_steps must be >= 0");
    for (std::size_t i = 1; i < drop_steps.size(); ++i) {
      if (drop_steps[i] <= drop_steps[i - 1]) {
        throw ConfigError("warmup_staircase: drop_steps must be strictly increasing");
      }
    }
    if (!(drop_factor > 0.0 && drop_factor <= 1.0)) {
      throw ConfigError("warmup_staircase: drop_factor must lie in (0, 1]");
    }
    return Schedule(sched::WarmupStaircase{peak, warmup_steps, std::move(drop_steps), drop_factor});
  }
  /// Any finite (c0, c1) is accepted; evaluating where c0 + c1 t <= 0 is a
  /// domain error.
  static Schedule linear(double c0, double c1) {
    if (!std::isfinite(c0) || !std::isfinite(c1)) throw ConfigError("linear: non-finite constant");
    return Schedule(sched::Linear{c0, c1});
  }
  static Schedule power(double c, double alpha) {
    require_positive(c, "power");
    if (!std::isfinite(alpha)) throw ConfigError("power: non-finite exponent");
    return Schedule(sched::Power{c, alpha});
  }
  static Schedule product(std::vector<Schedule> factors) {
    if (factors.empty()) throw ConfigError("product: needs at least one factor");
    return Schedule(sched::Product{std::move(factors)});
  }

  /// `base` multiplied by a constant factor.
  static Schedule scaled(Schedule base, double factor) {
    return product({constant(factor), std::move(base)});
  }

  double evaluate(Step t) const {
    if (t < 1) throw DomainError("schedule evaluated at t < 1");
    const double tf = static_cast<double>(t);
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, sched::Constant>) {
            return s.value;
          } else if constexpr (std::is_same_v<S, sched::InverseTime>) {
            return s.c / tf;
          } else if constexpr (std::is_same_v<S, sched::InverseSqrt>) {
            return s.c / std::sqrt(tf);
          } else if constexpr (std::is_same_v<S, sched::ExpDecay> ||
                               std::is_same_v<S, sched::ExpGrow>) {
            const double v = s.c * std::pow(s.gamma, tf);
            if (!std::isfinite(v) || v <= 0.0) throw DomainError("exponential schedule out of range");
            return v;
          } else if constexpr (std::is_same_v<S, sched::Cosine>) {
            return std::cos(s.c0 + s.c1 * tf);
          } else if constexpr (std::is_same_v<S, sched::WarmupStaircase>) {
            if (t <= s.warmup_steps) return s.peak * tf / static_cast<double>(s.warmup_steps);
            double v = s.peak;
            for (Step d : s.drop_steps) {
              if (t >= d) v *= s.drop_factor;
            }
            return v;
          } else if constexpr (std::is_same_v<S, sched::Linear>) {
            const double v = s.c0 + s.c1 * tf;
            if (!(v > 0.0)) throw DomainError("linear schedule is non-positive at t=" + std::to_string(t));
            return v;
          } else if constexpr (std::is_same_v<S, sched::Power>) {
            return s.c * std::pow(tf, s.alpha);
          } else {
            double v = 1.0;
            for (const auto& f : s.factors) v *= f.evaluate(t);
            return v;
          }
        },
        v_);
  }

  double operator()(Step t) const { return evaluate(t); }

  const Variant& variant() const noexcept { return v_; }

 private:
  explicit Schedule(Variant v) : v_(std::move(v)) {}

  static void require_positive(double c, const char* what) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw ConfigError(std::string(what) + ": scale constant must be finite and > 0");
    }
  }

  Variant v_;
};

inline double evaluate(const Schedule& s, Step t) { return s.evaluate(t); }

// JSON form: tagged objects, e.g. {"kind":"linear","c0":0.2,"c1":1e-4}.

inline Json schedule_to_json(const Schedule& s) {
  return std::visit(
      [](const auto& v) -> Json {
        using S = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<S, sched::Constant>) {
          return {{"kind", "constant"}, {"value", v.value}};
        } else if constexpr (std::is_same_v<S, sched::InverseTime>) {
          return {{"kind", "inverse_time"}, {"c", v.c}};
        } else if constexpr (std::is_same_v<S, sched::InverseSqrt>) {
          return {{"kind", "inverse_sqrt"}, {"c", v.c}};
        } else if constexpr (std::is_same_v<S, sched::ExpDecay>) {
          return {{"kind", "exp_decay"}, {"c", v.c}, {"gamma", v.gamma}};
        } else if constexpr (std::is_same_v<S, sched::ExpGrow>) {
          return {{"kind", "exp_grow"}, {"c", v.c}, {"gamma", v.gamma}};
        } else if constexpr (std::is_same_v<S, sched::Cosine>) {
          return {{"kind", "cosine"}, {"c0", v.c0}, {"c1", v.c1}};
        } else if constexpr (std::is_same_v<S, sched::WarmupStaircase>) {
          return {{"kind", "warmup_staircase"},
                  {"peak", v.peak},
                  {"warmup_steps", v.warmup_steps},
                  {"drop_steps", v.drop_steps},
                  {"drop_factor", v.drop_factor}};
        } else if constexpr (std::is_same_v<S, sched::Linear>) {
          return {{"kind", "linear"}, {"c0", v.c0}, {"c1", v.c1}};
        } else if constexpr (std::is_same_v<S, sched::Power>) {
          return {{"kind", "power"}, {"c", v.c}, {"alpha", v.alpha}};
        } else {
          Json factors = Json::array();
          for (const auto& f : v.factors) factors.push_back(schedule_to_json(f));
          return {{"kind", "product"}, {"factors", factors}};
        }
      },
      s.variant());
}

inline Schedule schedule_from_json(const Json& j) {
  constexpr std::string_view where = "schedule";
  if (!j.is_object()) throw ConfigError("schedule: expected an object");
  const std::string kind = detail::get_string(j, "kind", where);
  using detail::check_keys;
  using detail::get_number;
  if (kind == "constant") {
    check_keys(j, {"kind", "value"}, where);
    return Schedule::constant(get_number(j, "value", where));
  }
  if (kind == "inverse_time") {
    check_keys(j, {"kind", "c"}, where);
    return Schedule::inverse_time(get_number(j, "c", where));
  }
  if (kind == "inverse_sqrt") {
    check_keys(j, {"kind", "c"}, where);
    return Schedule::inverse_sqrt(get_number(j, "c", where));
  }
  if (kind == "exp_decay" || kind == "exp_grow") {
    check_keys(j, {"kind", "c", "gamma"}, where);
    const double c = get_number(j, "c", where);
    const double gamma = get_number(j, "gamma", where);
    return kind == "exp_decay" ? Schedule::exp_decay(c, gamma) : Schedule::exp_grow(c, gamma);
  }
  if (kind == "cosine") {
    check_keys(j, {"kind", "c0", "c1"}, where);
    return Schedule::cosine(get_number(j, "c0", where), get_number(j, "c1", where));
  }
  if (kind == "warmup_staircase") {
    check_keys(j, {"kind", "peak", "warmup_steps", "drop_steps", "drop_factor"}, where);
    std::vector<Step> drops;
    if (j.contains("drop_steps")) {
      const Json& d = j.at("drop_steps");
      if (!d.is_array()) throw ConfigError("schedule.drop_steps: expected an array");
      for (const auto& x : d) {
        if (!x.is_number_integer()) throw ConfigError("schedule.drop_steps: expected integers");
        drops.push_back(x.get<Step>());
      }
    }
    return Schedule::warmup_staircase(get_number(j, "peak", where),
                                      detail::get_integer(j, "warmup_steps", where, 0),
                                      std::move(drops), get_number(j, "drop_factor", where, 1.0));
  }
  if (kind == "linear") {
    check_keys(j, {"kind", "c0", "c1"}, where);
    return Schedule::linear(get_number(j, "c0", where), get_number(j, "c1", where));
  }
  if (kind == "power") {
    check_keys(j, {"kind", "c", "alpha"}, where);
    return Schedule::power(get_number(j, "c", where), get_number(j, "alpha", where));
  }
  if (kind == "product") {
    check_keys(j, {"kind", "factors"}, where);
    const Json& f = detail::require(j, "factors", where);
    if (!f.is_array()) throw ConfigError("schedule.factors: expected an array");
    std::vector<Schedule> factors;
    for (const auto& x : f) factors.push_back(schedule_from_json(x));
    return Schedule::product(std::move(factors));
  }
  throw ConfigError("schedule: unknown kind '" + kind + "'");
}

}  // namespace adagraft

#endif  // ADAGRAFT_SCHEDULES_HPP
