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

#ifndef ADAGRAFT_PROBLEMS_HPP
#define ADAGRAFT_PROBLEMS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adagraft/core.hpp"
#include "adagraft/detail/json_util.hpp"
#include "adagraft/rng.hpp"

namespace adagraft {

/// One labelled example. Features are dense over the flattened model.
struct Example {
  ParamVector x;
  double y = 0.0;
};

/// How the training loop draws the examples of one step.
enum class Sampling {
  Iid,        ///< batch_size draws with replacement via Problem::sample
  Epoch,      ///< walk a fresh shuffle of the training set, batch_size per step
  FullBatch,  ///< mean over the whole training set every step
};

inline std::string_view to_string(Sampling s) {
  switch (s) {
    case Sampling::Iid: return "iid";
    case Sampling::Epoch: return "epoch";
    case Sampling::FullBatch: return "full_batch";
  }
  return "iid";
}

inline Sampling sampling_from_string(std::string_view s) {
  if (s == "iid") return Sampling::Iid;
  if (s == "epoch") return Sampling::Epoch;
  if (s == "full_batch") return Sampling::FullBatch;
  throw ConfigError("unknown sampling mode '" + std::string(s) + "'");
}

/**
 * A stochastic objective F(w) = E f(w; z) over a linear model. Instances are
 * immutable; all randomness comes from the caller's Rng.
 */
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string kind() const = 0;
  /// Starting point w_1.
  virtual ModelParams initial_params(Rng& rng) const = 0;
  /// One training draw.
  virtual Example sample(Rng& rng) const = 0;
  virtual double loss(const ModelParams& w, const Example& e) const = 0;
  virtual Gradient grad(const ModelParams& w, const Example& e) const = 0;
  /// Deterministic objective reported on training curves.
  virtual double train_loss(const ModelParams& w) const = 0;
  /// Held-out metric reported on training curves.
  virtual double test_metric(const ModelParams& w) const = 0;
  /// Size of the finite training set; 0 for pure streams.
  virtual std::size_t train_size() const { return 0; }
  virtual const Example& train_example(std::size_t) const {
    throw LookupError(kind() + ": no finite training set");
  }
  virtual Sampling default_sampling() const { return Sampling::Iid; }
  /// Parameters that rebuild this instance.
  virtual Json spec() const = 0;
  /// spec() plus the generated data, for inspection.
  virtual Json dump() const { return spec(); }
};

// ---------------------------------------------------------------------------
// Quadratic sanity problem

/**
 * f(w; z) = 1/2 sum_k h_k (w_k - z_k)^2 with z ~ N(0, noise^2) per
 * coordinate. Curvatures h_k are log-spaced over [1, condition]. The
 * reported train loss is the excess population loss 1/2 sum h_k w_k^2 and
 * the test metric is ||w - w*||.
 */
struct QuadraticSpec {
  std::vector<std::size_t> group_sizes{10};
  double condition = 1.0;
  double noise = 0.0;
  std::optional<double> init_value;  ///< constant start; otherwise init_scale * N(0, 1)
  double init_scale = 0.1;
};

class QuadraticProblem final : public Problem {
 public:
  explicit QuadraticProblem(QuadraticSpec spec) : spec_(std::move(spec)) {
    if (spec_.group_sizes.empty()) throw ConfigError("quadratic: needs at least one group");
    std::size_t d = 0;
    for (auto s : spec_.group_sizes) {
      if (s == 0) throw ConfigError("quadratic: group sizes must be >= 1");
      d += s;
    }
    if (!(spec_.condition >= 1.0)) throw ConfigError("quadratic: condition must be >= 1");
    if (!(spec_.noise >= 0.0)) throw ConfigError("quadratic: noise must be >= 0");
    if (!(spec_.init_scale >= 0.0)) throw ConfigError("quadratic: init_scale must be >= 0");
    curvature_.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
      const double frac = d == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(d - 1);
      curvature_[k] = std::pow(spec_.condition, frac);
    }
  }

  std::string kind() const override { return "quadratic"; }

  ModelParams initial_params(Rng& rng) const override {
    std::vector<ParamGroup> groups;
    for (std::size_t i = 0; i < spec_.group_sizes.size(); ++i) {
      ParamVector v(spec_.group_sizes[i]);
      for (double& x : v) x = spec_.init_value ? *spec_.init_value : spec_.init_scale * rng.normal();
      groups.push_back({"layer" + std::to_string(i), std::move(v)});
    }
    return ModelParams(std::move(groups));
  }

  Example sample(Rng& rng) const override {
    Example e;
    e.x.resize(curvature_.size());
    for (double& z : e.x) z = spec_.noise == 0.0 ? 0.0 : spec_.noise * rng.normal();
    return e;
  }

  double loss(const ModelParams& w, const Example& e) const override {
    double s = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < w.num_groups(); ++i) {
      for (double v : w.values(i)) {
        const double r = v - e.x[k];
        s += 0.5 * curvature_[k] * r * r;
        ++k;
      }
    }
    return s;
  }

  Gradient grad(const ModelParams& w, const Example& e) const override {
    Gradient g = Gradient::zeros_like(w);
    std::size_t k = 0;
    for (std::size_t i = 0; i < w.num_groups(); ++i) {
      auto wi = w.values(i);
      auto gi = g.values(i);
      for (std::size_t j = 0; j < wi.size(); ++j, ++k) gi[j] = curvature_[k] * (wi[j] - e.x[k]);
    }
    return g;
  }

  double train_loss(const ModelParams& w) const override {
    double s = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < w.num_groups(); ++i) {
      for (double v : w.values(i)) s += 0.5 * curvature_[k++] * v * v;
    }
    return s;
  }

  double test_metric(const ModelParams& w) const override { return global_norm(w); }

  Json spec() const override {
    Json j{{"kind", "quadratic"},
           {"group_sizes", spec_.group_sizes},
           {"condition", spec_.condition},
           {"noise", spec_.noise}};
    if (spec_.init_value) {
      j["init_value"] = *spec_.init_value;
    } else {
      j["init_scale"] = spec_.init_scale;
    }
    return j;
  }

  const std::vector<double>& curvature() const noexcept { return curvature_; }

 private:
  QuadraticSpec spec_;
  std::vector<double> curvature_;
};

// ---------------------------------------------------------------------------
// Sparse hinge-loss construction (AdaGrad generalizes better than SGD)

inline double hinge_loss(std::span<const double> w, const Example& e) {
  return std::max(0.0, 1.0 - e.y * dot(w, e.x));
}

/// Subgradient of max(0, 1 - y<z, w>): -y z while the margin is below 1,
/// zero from margin 1 on.
inline ParamVector hinge_grad(std::span<const double> w, const Example& e) {
  ParamVector g(e.x.size(), 0.0);
  if (e.y * dot(w, e.x) < 1.0) {
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = e.x[i] == 0.0 ? 0.0 : -e.y * e.x[i];
  }
  return g;
}

struct SparseHingeSpec {
  std::size_t d = 400;
  double c = 0.5;
  std::uint64_t seed = 0;
};

/**
 * Population: the d standard basis vectors with equal mass, label always +1.
 * Training set: floor(c d) of them, chosen by a seeded permutation. The
 * all-ones vector has zero loss everywhere.
 */
class SparseHingeInstance final : public Problem {
 public:
  explicit SparseHingeInstance(SparseHingeSpec spec) : spec_(spec) {
    if (spec_.d == 0) throw ConfigError("sparse_hinge: d must be >= 1");
    if (!(spec_.c > 0.0 && spec_.c <= 1.0)) throw ConfigError("sparse_hinge: c must lie in (0, 1]");
    const auto m = static_cast<std::size_t>(std::floor(spec_.c * static_cast<double>(spec_.d)));
    if (m == 0) throw ConfigError("sparse_hinge: c * d must be >= 1");
    std::vector<std::size_t> perm(spec_.d);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto rng = Rng::derive(spec_.seed, {"sparse_hinge", "support"});
    rng.shuffle(std::span<std::size_t>(perm));
    support_.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
    for (auto i : support_) train_.push_back(basis(i));
  }

  std::string kind() const override { return "sparse_hinge"; }
  std::size_t d() const noexcept { return spec_.d; }
  double c() const noexcept { return spec_.c; }
  /// Basis indices present in the training set, in training-set order.
  const std::vector<std::size_t>& support() const noexcept { return support_; }

  Example basis(std::size_t i) const {
    Example e;
    e.x.assign(spec_.d, 0.0);
    e.x.at(i) = 1.0;
    e.y = 1.0;
    return e;
  }

  ModelParams initial_params(Rng&) const override {
    return ModelParams::single(ParamVector(spec_.d, 0.0));
  }

  Example sample(Rng& rng) const override { return train_[rng.index(train_.size())]; }

  double loss(const ModelParams& w, const Example& e) const override { return hinge_loss(w.values(0), e); }

  Gradient grad(const ModelParams& w, const Example& e) const override {
    return Gradient::single(hinge_grad(w.values(0), e), w.name(0));
  }

  double train_loss(const ModelParams& w) const override {
    double s = 0.0;
    for (const auto& e : train_) s += loss(w, e);
    return s / static_cast<double>(train_.size());
  }

  /// Exact population hinge loss (1/d) sum_i max(0, 1 - w_i).
  double population_loss(const ModelParams& w) const {
    auto v = w.values(0);
    double s = 0.0;
    for (double x : v) s += std::max(0.0, 1.0 - x);
    return s / static_cast<double>(spec_.d);
  }

  /// Exact population 0/1 error: fraction of basis vectors with margin <= 0.
  double zero_one_error(const ModelParams& w) const {
    auto v = w.values(0);
    std::size_t wrong = 0;
    for (double x : v) wrong += x <= 0.0 ? 1 : 0;
    return static_cast<double>(wrong) / static_cast<double>(spec_.d);
  }

  double test_metric(const ModelParams& w) const override { return population_loss(w); }

  std::size_t train_size() const override { return train_.size(); }
  const Example& train_example(std::size_t i) const override { return train_.at(i); }
  Sampling default_sampling() const override { return Sampling::Epoch; }

  Json spec() const override {
    return {{"kind", "sparse_hinge"}, {"d", spec_.d}, {"c", spec_.c}, {"seed", spec_.seed}};
  }
  Json dump() const override {
    Json j = spec();
    j["support"] = support_;
    return j;
  }

 private:
  SparseHingeSpec spec_;
  std::vector<std::size_t> support_;
  std::vector<Example> train_;
};

inline double sparse_hinge_test_error(const SparseHingeInstance& inst, const ModelParams& w) {
  return inst.zero_one_error(w);
}

inline double sparse_hinge_population_loss(const SparseHingeInstance& inst, const ModelParams& w) {
  return inst.population_loss(w);
}

// ---------------------------------------------------------------------------
// Overparameterized least-squares construction (SGD generalizes better)

inline double regression_loss(std::span<const double> w, const Example& e) {
  const double r = dot(w, e.x) - e.y;
  return r * r;
}

/// 2 (<w, x> - y) x
inline ParamVector regression_grad(std::span<const double> w, const Example& e) {
  const double r = 2.0 * (dot(w, e.x) - e.y);
  ParamVector g(e.x.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = r * e.x[i];
  return g;
}

struct WilsonSpec {
  std::size_t n = 40;
  std::size_t d = 0;  ///< 0 selects 6n + 3
  double p = 0.5;
  std::uint64_t seed = 0;
  bool positive_majority = true;  ///< redraw labels until sum(y) > 0
};

/**
 * Sample i: x[0] = y_i, x[1] = x[2] = 1, and a block starting at 3 + 5i that
 * is set to 1 over one coordinate when y_i = +1 and five when y_i = -1. Block
 * coordinates belong to exactly one sample. Labels are +1 with probability p.
 */
class WilsonRegressionInstance final : public Problem {
 public:
  explicit WilsonRegressionInstance(WilsonSpec spec) : spec_(spec) {
    if (spec_.n == 0) throw ConfigError("wilson_regression: n must be >= 1");
    if (spec_.d == 0) spec_.d = 6 * spec_.n + 3;
    if (spec_.d < block_start(spec_.n) + 5) {
      throw ConfigError("wilson_regression: d must be >= 5n + 8 to hold a fresh sample's block");
    }
    if (!(spec_.p > 0.0 && spec_.p < 1.0)) throw ConfigError("wilson_regression: p must lie in (0, 1)");

    auto rng = Rng::derive(spec_.seed, {"wilson_regression", "labels"});
    std::vector<double> y(spec_.n);
    for (int attempt = 0;; ++attempt) {
      if (attempt == 100000) throw ConfigError("wilson_regression: cannot draw a positive majority");
      double sum = 0.0;
      for (double& v : y) {
        v = rng.bernoulli(spec_.p) ? 1.0 : -1.0;
        sum += v;
      }
      if (!spec_.positive_majority || sum > 0.0) break;
    }
    for (std::size_t i = 0; i < spec_.n; ++i) train_.push_back(make_example(i, y[i]));
  }

  std::string kind() const override { return "wilson_regression"; }
  std::size_t n() const noexcept { return spec_.n; }
  std::size_t d() const noexcept { return spec_.d; }
  double p() const noexcept { return spec_.p; }

  static std::size_t block_start(std::size_t i) { return 3 + 5 * i; }

  ModelParams initial_params(Rng&) const override {
    return ModelParams::single(ParamVector(spec_.d, 0.0));
  }

  Example sample(Rng& rng) const override { return train_[rng.index(train_.size())]; }

  double loss(const ModelParams& w, const Example& e) const override {
    return regression_loss(w.values(0), e);
  }

  Gradient grad(const ModelParams& w, const Example& e) const override {
    return Gradient::single(regression_grad(w.values(0), e), w.name(0));
  }

  double train_loss(const ModelParams& w) const override {
    double s = 0.0;
    for (const auto& e : train_) s += loss(w, e);
    return s / static_cast<double>(train_.size());
  }

  /**
   * Expected accuracy of sign(<w, x>) on a fresh sample. A fresh sample's
   * block lies in coordinates no training sample touches, so its features
   * depend only on its label; the expectation over the label is exact.
   */
  double fresh_accuracy(const ModelParams& w) const {
    auto v = w.values(0);
    const std::size_t b = block_start(spec_.n);
    const double shared = v[1] + v[2];
    const double pos = v[0] + shared + v[b];
    double neg = -v[0] + shared;
    for (std::size_t k = 0; k < 5; ++k) neg += v[b + k];
    return spec_.p * (pos > 0.0 ? 1.0 : 0.0) + (1.0 - spec_.p) * (neg <= 0.0 ? 1.0 : 0.0);
  }

  double test_metric(const ModelParams& w) const override { return 1.0 - fresh_accuracy(w); }

  /// sign(X^T y), coordinatewise.
  ParamVector sign_xty() const {
    ParamVector s(spec_.d, 0.0);
    for (const auto& e : train_) {
      for (std::size_t k = 0; k < spec_.d; ++k) s[k] += e.x[k] * e.y;
    }
    for (double& v : s) v = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    return s;
  }

  /// Coordinates touched by at least one training sample.
  std::vector<bool> support_mask() const {
    std::vector<bool> m(spec_.d, false);
    for (const auto& e : train_) {
      for (std::size_t k = 0; k < spec_.d; ++k) m[k] = m[k] || e.x[k] != 0.0;
    }
    return m;
  }

  std::size_t train_size() const override { return train_.size(); }
  const Example& train_example(std::size_t i) const override { return train_.at(i); }
  Sampling default_sampling() const override { return Sampling::FullBatch; }

  Json spec() const override {
    return {{"kind", "wilson_regression"}, {"n", spec_.n}, {"d", spec_.d}, {"p", spec_.p},
            {"seed", spec_.seed}, {"positive_majority", spec_.positive_majority}};
  }
  Json dump() const override {
    Json j = spec();
    Json x = Json::array();
    Json y = Json::array();
    for (const auto& e : train_) {
      x.push_back(e.x);
      y.push_back(e.y);
    }
    j["X"] = std::move(x);
    j["y"] = std::move(y);
    return j;
  }

 private:
  Example make_example(std::size_t i, double label) const {
    Example e;
    e.y = label;
    e.x.assign(spec_.d, 0.0);
    e.x[0] = label;
    e.x[1] = 1.0;
    e.x[2] = 1.0;
    const std::size_t len = label > 0.0 ? 1 : 5;
    for (std::size_t k = 0; k < len; ++k) e.x[block_start(i) + k] = 1.0;
    return e;
  }

  WilsonSpec spec_;
  std::vector<Example> train_;
};

/**
 * True iff every iterate equals tau * sign(X^T y) on the coordinates some
 * training sample touches (one tau per iterate) and is zero elsewhere,
 * within 1e-8 (relative to max(1, |tau|)).
 */
inline bool sign_span_check(const WilsonRegressionInstance& inst,
                            std::span<const ModelParams> trajectory, double tol = 1e-8) {
  const ParamVector s = inst.sign_xty();
  const std::vector<bool> mask = inst.support_mask();
  for (const auto& w : trajectory) {
    auto v = w.values(0);
    if (v.size() != s.size()) return false;
    // s[0] = sign(n) = +1, so tau is read off the label coordinate.
    const double tau = v[0] * s[0];
    const double scale = std::max(1.0, std::abs(tau));
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double target = mask[k] ? tau * s[k] : 0.0;
      if (std::abs(v[k] - target) > tol * scale) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Online linear losses f_t(w) = <g_t, w>

/**
 * Gradients fixed in advance (oblivious adversary) and the comparator w*. With
 * a box radius B the comparator is the minimizer of sum_t <g_t, w> over
 * [-B, B]^d, i.e. -B sign(sum_t g_t).
 */
struct OnlineLinearSequence {
  std::string name;
  std::vector<ParamVector> gradients;
  ParamVector comparator;
  std::optional<double> box_radius;

  std::size_t rounds() const noexcept { return gradients.size(); }
  std::size_t dim() const noexcept { return comparator.size(); }

  static OnlineLinearSequence in_box(std::string name, std::vector<ParamVector> gradients,
                                     double radius) {
    if (gradients.empty()) throw ConfigError("online sequence: needs at least one round");
    if (!(radius >= 0.0)) throw ConfigError("online sequence: box radius must be >= 0");
    const std::size_t d = gradients.front().size();
    ParamVector sum(d, 0.0);
    for (const auto& g : gradients) {
      if (g.size() != d) throw CongruenceError("online sequence: ragged gradients");
      for (std::size_t i = 0; i < d; ++i) sum[i] += g[i];
    }
    ParamVector wstar(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      wstar[i] = sum[i] > 0.0 ? -radius : (sum[i] < 0.0 ? radius : 0.0);
    }
    return {std::move(name), std::move(gradients), std::move(wstar), radius};
  }

  static OnlineLinearSequence with_comparator(std::string name, std::vector<ParamVector> gradients,
                                              ParamVector comparator) {
    if (gradients.empty()) throw ConfigError("online sequence: needs at least one round");
    for (const auto& g : gradients) {
      if (g.size() != comparator.size()) throw CongruenceError("online sequence: ragged gradients");
    }
    return {std::move(name), std::move(gradients), std::move(comparator), std::nullopt};
  }
};

/// sum_i sqrt(sum_t g_{t,i}^2)
inline double gradient_root_sum(const OnlineLinearSequence& seq) {
  ParamVector acc(seq.dim(), 0.0);
  for (const auto& g : seq.gradients) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i] * g[i];
  }
  double s = 0.0;
  for (double a : acc) s += std::sqrt(a);
  return s;
}

namespace detail {
inline void require_trajectory(const OnlineLinearSequence& seq, std::span<const ParamVector> traj) {
  if (traj.size() < seq.rounds()) {
    throw CongruenceError("online trajectory shorter than the number of rounds");
  }
  for (std::size_t t = 0; t < seq.rounds(); ++t) {
    if (traj[t].size() != seq.dim()) throw CongruenceError("online trajectory: wrong dimension");
  }
}
}  // namespace detail

/// sum_t <g_t, w_t> - sum_t <g_t, w*>, using w_1..w_T of the trajectory.
inline double regret(const OnlineLinearSequence& seq, std::span<const ParamVector> trajectory) {
  detail::require_trajectory(seq, trajectory);
  double r = 0.0;
  for (std::size_t t = 0; t < seq.rounds(); ++t) {
    r += dot(seq.gradients[t], trajectory[t]) - dot(seq.gradients[t], seq.comparator);
  }
  return r;
}

/// max_{t <= T} ||w_t - w*||_inf * sum_i sqrt(sum_t g_{t,i}^2)
inline double regret_rhs_diag(const OnlineLinearSequence& seq,
                              std::span<const ParamVector> trajectory) {
  detail::require_trajectory(seq, trajectory);
  double dist = 0.0;
  for (std::size_t t = 0; t < seq.rounds(); ++t) {
    for (std::size_t i = 0; i < seq.dim(); ++i) {
      dist = std::max(dist, std::abs(trajectory[t][i] - seq.comparator[i]));
    }
  }
  return dist * gradient_root_sum(seq);
}

/**
 * Regret after each prefix of rounds, each against the best comparator for
 * that prefix (the box minimizer, or the fixed comparator when no box).
 */
inline std::vector<double> prefix_regret(const OnlineLinearSequence& seq,
                                         std::span<const ParamVector> trajectory) {
  detail::require_trajectory(seq, trajectory);
  std::vector<double> out;
  out.reserve(seq.rounds());
  ParamVector sum(seq.dim(), 0.0);
  double learner = 0.0;
  for (std::size_t t = 0; t < seq.rounds(); ++t) {
    learner += dot(seq.gradients[t], trajectory[t]);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += seq.gradients[t][i];
    double best = 0.0;
    if (seq.box_radius) {
      for (double s : sum) best -= *seq.box_radius * std::abs(s);
    } else {
      best = dot(sum, seq.comparator);
    }
    out.push_back(learner - best);
  }
  return out;
}

enum class SequenceKind { Gaussian, Scaled, Sparse, Late };

inline std::string_view to_string(SequenceKind k) {
  switch (k) {
    case SequenceKind::Gaussian: return "gaussian";
    case SequenceKind::Scaled: return "scaled";
    case SequenceKind::Sparse: return "sparse";
    case SequenceKind::Late: return "late";
  }
  return "gaussian";
}

/**
 * Random oblivious sequences: per coordinate, a drift of +-drift (random
 * sign) plus standard normal noise. Scaled multiplies coordinate i by
 * exp(U[-2, 2]); Sparse keeps each entry with probability 0.1; Late keeps
 * coordinate i silent until a start round drawn from [0, rounds / 4).
 */
inline OnlineLinearSequence random_linear_sequence(std::string name, std::size_t d, std::size_t rounds,
                                                   SequenceKind kind, Rng& rng, double radius = 1.0,
                                                   double drift = 0.05) {
  ParamVector mean(d);
  for (double& m : mean) m = rng.bernoulli(0.5) ? drift : -drift;
  ParamVector scale(d, 1.0);
  std::vector<std::size_t> start(d, 0);
  if (kind == SequenceKind::Scaled) {
    for (double& s : scale) s = std::exp(rng.uniform(-2.0, 2.0));
  }
  if (kind == SequenceKind::Late) {
    for (auto& s : start) s = rng.index(std::max<std::size_t>(1, rounds / 4));
  }
  std::vector<ParamVector> grads(rounds, ParamVector(d, 0.0));
  for (std::size_t t = 0; t < rounds; ++t) {
    for (std::size_t i = 0; i < d; ++i) {
      double v = scale[i] * (mean[i] + rng.normal());
      if (kind == SequenceKind::Sparse && !rng.bernoulli(0.1)) v = 0.0;
      if (t < start[i]) v = 0.0;
      grads[t][i] = v;
    }
  }
  return OnlineLinearSequence::in_box(std::move(name), std::move(grads), radius);
}

/**
 * Coordinate-cycling adversary: round t touches coordinate t mod d only, with
 * magnitude 1 + variant * i / d and a sign that flips every (variant + 1)
 * passes over the coordinates.
 */
inline OnlineLinearSequence cycling_sequence(std::string name, std::size_t d, std::size_t rounds,
                                             std::size_t variant, double radius = 1.0) {
  std::vector<ParamVector> grads(rounds, ParamVector(d, 0.0));
  for (std::size_t t = 0; t < rounds; ++t) {
    const std::size_t i = t % d;
    const std::size_t pass = t / d;
    const double sign = (pass / (variant + 1)) % 2 == 0 ? 1.0 : -1.0;
    grads[t][i] = sign * (1.0 + static_cast<double>(variant) * static_cast<double>(i) / static_cast<double>(d));
  }
  return OnlineLinearSequence::in_box(std::move(name), std::move(grads), radius);
}

// ---------------------------------------------------------------------------
// Construction from JSON

inline std::unique_ptr<Problem> make_problem(const Json& j) {
  constexpr std::string_view where = "problem";
  const std::string kind = detail::get_string(j, "kind", where);
  if (kind == "quadratic") {
    detail::check_keys(j, {"kind", "group_sizes", "condition", "noise", "init_value", "init_scale"}, where);
    QuadraticSpec s;
    if (j.contains("group_sizes")) {
      const Json& g = j.at("group_sizes");
      if (!g.is_array()) throw ConfigError("problem.group_sizes: expected an array");
      s.group_sizes.clear();
      for (const auto& x : g) {
        if (!x.is_number_integer() || x.get<std::int64_t>() < 1) {
          throw ConfigError("problem.group_sizes: expected positive integers");
        }
        s.group_sizes.push_back(x.get<std::size_t>());
      }
    }
    s.condition = detail::get_number(j, "condition", where, s.condition);
    s.noise = detail::get_number(j, "noise", where, s.noise);
    if (j.contains("init_value")) s.init_value = detail::get_number(j, "init_value", where);
    s.init_scale = detail::get_number(j, "init_scale", where, s.init_scale);
    return std::make_unique<QuadraticProblem>(std::move(s));
  }
  if (kind == "sparse_hinge") {
    detail::check_keys(j, {"kind", "d", "c", "seed"}, where);
    SparseHingeSpec s;
    const auto d = detail::get_integer(j, "d", where, static_cast<std::int64_t>(s.d));
    if (d < 1) throw ConfigError("problem.d must be >= 1");
    s.d = static_cast<std::size_t>(d);
    s.c = detail::get_number(j, "c", where, s.c);
    s.seed = detail::get_seed(j, "seed", where, s.seed);
    return std::make_unique<SparseHingeInstance>(s);
  }
  if (kind == "wilson_regression") {
    detail::check_keys(j, {"kind", "n", "d", "p", "seed", "positive_majority"}, where);
    WilsonSpec s;
    const auto n = detail::get_integer(j, "n", where, static_cast<std::int64_t>(s.n));
    const auto d = detail::get_integer(j, "d", where, 0);
    if (n < 1 || d < 0) throw ConfigError("problem.n must be >= 1 and problem.d >= 0");
    s.n = static_cast<std::size_t>(n);
    s.d = static_cast<std::size_t>(d);
    s.p = detail::get_number(j, "p", where, s.p);
    s.seed = detail::get_seed(j, "seed", where, s.seed);
    s.positive_majority = detail::get_bool(j, "positive_majority", where, s.positive_majority);
    return std::make_unique<WilsonRegressionInstance>(s);
  }
  throw ConfigError("problem: unknown kind '" + kind + "'");
}

}  // namespace adagraft

#endif  // ADAGRAFT_PROBLEMS_HPP
