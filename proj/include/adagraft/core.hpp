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

#ifndef ADAGRAFT_CORE_HPP
#define ADAGRAFT_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "adagraft/error.hpp"

namespace adagraft {

/// Step index. Steps are numbered from 1; 0 means "no step taken yet".
using Step = std::int64_t;

using ParamVector = std::vector<double>;

/// A named, flat block of coordinates. One grafting unit in layer-wise mode.
struct ParamGroup {
  std::string name;
  ParamVector values;

  friend bool operator==(const ParamGroup&, const ParamGroup&) = default;
};

struct ParamsTag {};
struct GradientTag {};
struct StepTag {};
struct MomentTag {};

/**
 * Ordered list of named groups. The tag keeps weights, gradients, step
 * proposals and optimizer accumulators from being mixed up, while every
 * instantiation shares the same layout rules: names non-empty and pairwise
 * distinct, declaration order is the canonical iteration order.
 */
template <class Tag>
class Grouped {
 public:
  Grouped() = default;

  explicit Grouped(std::vector<ParamGroup> groups) : groups_(std::move(groups)) {
    std::unordered_set<std::string_view> seen;
    for (const auto& g : groups_) {
      if (g.name.empty()) throw ConfigError("parameter group with empty name");
      if (!seen.insert(g.name).second) {
        throw ConfigError("duplicate parameter group name '" + g.name + "'");
      }
    }
  }

  /// Single group named `name` holding `values`.
  static Grouped single(ParamVector values, std::string name = "w") {
    return Grouped({ParamGroup{std::move(name), std::move(values)}});
  }

  /// Zero-filled container with the layout of `other`.
  template <class OtherTag>
  static Grouped zeros_like(const Grouped<OtherTag>& other) {
    std::vector<ParamGroup> groups;
    groups.reserve(other.num_groups());
    for (std::size_t i = 0; i < other.num_groups(); ++i) {
      groups.push_back({other.name(i), ParamVector(other.size(i), 0.0)});
    }
    Grouped out;
    out.groups_ = std::move(groups);
    return out;
  }

  /// Same layout and values as `other`, retagged.
  template <class OtherTag>
  static Grouped copy_of(const Grouped<OtherTag>& other) {
    Grouped out;
    out.groups_ = other.groups();
    return out;
  }

  std::size_t num_groups() const noexcept { return groups_.size(); }

  std::size_t dim() const noexcept {
    std::size_t d = 0;
    for (const auto& g : groups_) d += g.values.size();
    return d;
  }

  std::size_t size(std::size_t i) const { return groups_.at(i).values.size(); }
  const std::string& name(std::size_t i) const { return groups_.at(i).name; }

  std::span<const double> values(std::size_t i) const { return groups_.at(i).values; }
  std::span<double> values(std::size_t i) { return groups_.at(i).values; }

  const std::vector<ParamGroup>& groups() const noexcept { return groups_; }

  std::optional<std::size_t> find(std::string_view group_name) const {
    for (std::size_t i = 0; i < groups_.size(); ++i) {
      if (groups_[i].name == group_name) return i;
    }
    return std::nullopt;
  }

  /// Index of `group_name`; throws LookupError when absent.
  std::size_t index_of(std::string_view group_name) const {
    if (auto i = find(group_name)) return *i;
    throw LookupError("unknown parameter group '" + std::string(group_name) + "'");
  }

  bool all_finite() const noexcept {
    for (const auto& g : groups_) {
      for (double v : g.values) {
        if (!std::isfinite(v)) return false;
      }
    }
    return true;
  }

  /// Concatenation of every group in declaration order.
  ParamVector flatten() const {
    ParamVector out;
    out.reserve(dim());
    for (const auto& g : groups_) out.insert(out.end(), g.values.begin(), g.values.end());
    return out;
  }

  friend bool operator==(const Grouped&, const Grouped&) = default;

 private:
  std::vector<ParamGroup> groups_;
};

using ModelParams = Grouped<ParamsTag>;
using Gradient = Grouped<GradientTag>;
using StepProposal = Grouped<StepTag>;
using Moments = Grouped<MomentTag>;

template <class A, class B>
bool congruent(const Grouped<A>& a, const Grouped<B>& b) noexcept {
  if (a.num_groups() != b.num_groups()) return false;
  for (std::size_t i = 0; i < a.num_groups(); ++i) {
    if (a.name(i) != b.name(i) || a.size(i) != b.size(i)) return false;
  }
  return true;
}

template <class A, class B>
void require_congruent(const Grouped<A>& a, const Grouped<B>& b, std::string_view what) {
  if (!congruent(a, b)) {
    throw CongruenceError(std::string(what) + ": containers are not shape-congruent");
  }
}

inline double squared_norm(std::span<const double> v) noexcept {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

namespace detail {

// Plain sum of squares when it stays well inside the normal range, otherwise
// a rescaled sum so tiny or huge entries neither underflow nor overflow.
template <class Range>
double robust_norm(const Range& spans) {
  double s = 0.0;
  for (auto v : spans) s += squared_norm(v);
  if (s > 1e-280 && s < 1e280) return std::sqrt(s);
  double m = 0.0;
  for (auto v : spans) {
    for (double x : v) m = std::max(m, std::abs(x));
  }
  if (m == 0.0 || !std::isfinite(m)) return m;
  double r = 0.0;
  for (auto v : spans) {
    for (double x : v) r += (x / m) * (x / m);
  }
  return m * std::sqrt(r);
}

}  // namespace detail

/// Euclidean norm of group `i`.
template <class Tag>
double group_norm(const Grouped<Tag>& p, std::size_t i) {
  const std::span<const double> v[1] = {p.values(i)};
  return detail::robust_norm(v);
}

template <class Tag>
double group_norm(const Grouped<Tag>& p, std::string_view group_name) {
  return group_norm(p, p.index_of(group_name));
}

/// Norm of the concatenation; sqrt of the sum of squared group norms.
template <class Tag>
double global_norm(const Grouped<Tag>& p) {
  std::vector<std::span<const double>> v;
  v.reserve(p.num_groups());
  for (std::size_t i = 0; i < p.num_groups(); ++i) v.push_back(p.values(i));
  return detail::robust_norm(v);
}

/// Returns w + scale * s. Throws CongruenceError on layout mismatch and
/// OverflowError if any resulting coordinate is not finite.
inline ModelParams axpy(const ModelParams& w, const StepProposal& s, double scale) {
  require_congruent(w, s, "axpy");
  ModelParams out = w;
  for (std::size_t i = 0; i < out.num_groups(); ++i) {
    auto dst = out.values(i);
    auto src = s.values(i);
    for (std::size_t j = 0; j < dst.size(); ++j) {
      dst[j] += scale * src[j];
      if (!std::isfinite(dst[j])) {
        throw OverflowError("axpy: non-finite coordinate in group '" + out.name(i) + "'");
      }
    }
  }
  return out;
}

/// Largest absolute coordinate difference between two congruent containers.
template <class A, class B>
double max_abs_diff(const Grouped<A>& a, const Grouped<B>& b) {
  require_congruent(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.num_groups(); ++i) {
    auto x = a.values(i);
    auto y = b.values(i);
    for (std::size_t j = 0; j < x.size(); ++j) m = std::max(m, std::abs(x[j] - y[j]));
  }
  return m;
}

}  // namespace adagraft

#endif  // ADAGRAFT_CORE_HPP
