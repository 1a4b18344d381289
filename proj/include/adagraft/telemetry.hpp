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

#ifndef ADAGRAFT_TELEMETRY_HPP
#define ADAGRAFT_TELEMETRY_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adagraft/core.hpp"
#include "adagraft/detail/json_util.hpp"

namespace adagraft {

/// Group name used for records of a global-scope graft.
inline constexpr std::string_view kGlobalGroup = "__global__";

/**
 * Step norms of the two children of a grafted step. `ratio` is the raw
 * norm_m / norm_d (0 when norm_d is 0). `guarded` marks steps where the
 * epsilon guard decided the outcome: norm_d == 0, or epsilon large enough to
 * move the applied ratio by more than 1e-12 relative.
 */
struct StepNormRecord {
  Step t = 0;
  std::string group;
  double norm_m = 0.0;
  double norm_d = 0.0;
  double ratio = 0.0;
  bool guarded = false;

  friend bool operator==(const StepNormRecord&, const StepNormRecord&) = default;
};

/// Records grouped by name (first-appearance order), strictly increasing t
/// within each group.
class StepNormSeries {
 public:
  void record(StepNormRecord r) {
    for (auto& [name, rows] : groups_) {
      if (name == r.group) {
        if (!rows.empty() && r.t <= rows.back().t) {
          throw InputError("step-norm series: t must increase within group '" + name + "'");
        }
        rows.push_back(std::move(r));
        return;
      }
    }
    std::string name = r.group;
    groups_.push_back({std::move(name), {std::move(r)}});
  }

  /// Every record, ordered by (group, t).
  std::vector<StepNormRecord> records() const {
    std::vector<StepNormRecord> out;
    for (const auto& [name, rows] : groups_) out.insert(out.end(), rows.begin(), rows.end());
    return out;
  }

  const std::vector<StepNormRecord>& group(std::string_view name) const {
    for (const auto& [n, rows] : groups_) {
      if (n == name) return rows;
    }
    throw LookupError("step-norm series has no group '" + std::string(name) + "'");
  }

  std::vector<std::string> group_names() const {
    std::vector<std::string> out;
    for (const auto& [name, rows] : groups_) out.push_back(name);
    return out;
  }

  std::size_t size() const noexcept {
    std::size_t n = 0;
    for (const auto& [name, rows] : groups_) n += rows.size();
    return n;
  }

  bool empty() const noexcept { return size() == 0; }

  friend bool operator==(const StepNormSeries&, const StepNormSeries&) = default;

 private:
  std::vector<std::pair<std::string, std::vector<StepNormRecord>>> groups_;
};

/// Inclusive step range used by the fits.
struct FitWindow {
  Step first = 1;
  Step last = std::numeric_limits<Step>::max();

  bool contains(Step t) const noexcept { return t >= first && t <= last; }
};

struct LinearFit {
  double c0 = 0.0;
  double c1 = 0.0;
  double residual = 0.0;  ///< RMS error of ratio vs c0 + c1 t
};

struct PowerFit {
  double scale = 0.0;
  double alpha = 0.0;
  double residual = 0.0;  ///< RMS error in log space
};

namespace detail {

struct LineFit {
  double intercept;
  double slope;
  double rms;
};

// Centered least squares for y = a + b x.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw FitError("fit: all samples share the same step");
  const double b = sxy / sxx;
  const double a = my - b * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (a + b * x[i]);
    ss += r * r;
  }
  return {a, b, std::sqrt(ss / n)};
}

inline std::vector<const StepNormRecord*> usable(const StepNormSeries& s, std::string_view group,
                                                 FitWindow window) {
  std::vector<const StepNormRecord*> out;
  for (const auto& r : s.group(group)) {
    if (!r.guarded && window.contains(r.t)) out.push_back(&r);
  }
  if (out.size() < 2) throw FitError("fit: fewer than two unguarded records in the window");
  return out;
}

}  // namespace detail

/// Ordinary least squares of ratio against t over unguarded records.
inline LinearFit fit_linear(const StepNormSeries& series, std::string_view group,
                            FitWindow window = {}) {
  const auto rows = detail::usable(series, group, window);
  std::vector<double> x, y;
  for (const auto* r : rows) {
    x.push_back(static_cast<double>(r->t));
    y.push_back(r->ratio);
  }
  const auto f = detail::fit_line(x, y);
  return {f.intercept, f.slope, f.rms};
}

/// Least squares of log(ratio) against log(t): ratio ~ scale * t^alpha.
inline PowerFit fit_power(const StepNormSeries& series, std::string_view group,
                          FitWindow window = {}) {
  const auto rows = detail::usable(series, group, window);
  std::vector<double> x, y;
  for (const auto* r : rows) {
    if (!(r->ratio > 0.0)) throw DomainError("fit_power: non-positive ratio at t=" + std::to_string(r->t));
    x.push_back(std::log(static_cast<double>(r->t)));
    y.push_back(std::log(r->ratio));
  }
  const auto f = detail::fit_line(x, y);
  return {std::exp(f.intercept), f.slope, f.rms};
}

enum class FitKind { Linear, Power };

inline std::string_view to_string(FitKind k) { return k == FitKind::Linear ? "linear" : "power"; }

inline FitKind fit_kind_from_string(std::string_view s) {
  if (s == "linear") return FitKind::Linear;
  if (s == "power") return FitKind::Power;
  throw ConfigError("unknown fit kind '" + std::string(s) + "'");
}

/// A fitted correction as emitted to JSON. params: (c0, c1) or (scale, alpha).
struct CorrectionFit {
  std::string group;
  FitKind kind = FitKind::Linear;
  std::vector<double> params;
  double residual = 0.0;

  friend bool operator==(const CorrectionFit&, const CorrectionFit&) = default;
};

inline CorrectionFit fit_correction(const StepNormSeries& series, std::string_view group,
                                    FitKind kind, FitWindow window = {}) {
  if (kind == FitKind::Linear) {
    const auto f = fit_linear(series, group, window);
    return {std::string(group), kind, {f.c0, f.c1}, f.residual};
  }
  const auto f = fit_power(series, group, window);
  return {std::string(group), kind, {f.scale, f.alpha}, f.residual};
}

inline Json correction_to_json(const CorrectionFit& f) {
  return {{"group", f.group}, {"kind", to_string(f.kind)}, {"params", f.params}, {"residual", f.residual}};
}

inline CorrectionFit correction_from_json(const Json& j) {
  constexpr std::string_view where = "correction";
  detail::check_keys(j, {"group", "kind", "params", "residual"}, where);
  CorrectionFit f;
  f.group = detail::get_string(j, "group", where);
  f.kind = fit_kind_from_string(detail::get_string(j, "kind", where));
  f.params = detail::require(j, "params", where).get<std::vector<double>>();
  f.residual = detail::get_number(j, "residual", where);
  if (f.params.size() != 2) throw ConfigError("correction.params: expected two values");
  return f;
}

inline constexpr std::string_view kStepNormCsvHeader = "t,group,norm_m,norm_d,ratio,guarded";

inline void write_csv(const StepNormSeries& series, std::ostream& os) {
  os << kStepNormCsvHeader << '\n';
  for (const auto& r : series.records()) {
    os << r.t << ',' << r.group << ',' << detail::format_double(r.norm_m) << ','
       << detail::format_double(r.norm_d) << ',' << detail::format_double(r.ratio) << ','
       << (r.guarded ? 1 : 0) << '\n';
  }
}

inline void export_csv(const StepNormSeries& series, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  write_csv(series, os);
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

inline StepNormSeries read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kStepNormCsvHeader) {
    throw IoError("step-norm CSV: missing or wrong header");
  }
  StepNormSeries s;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    if (cols.size() != 6) throw IoError("step-norm CSV: expected 6 columns in '" + line + "'");
    StepNormRecord r;
    r.t = static_cast<Step>(std::stoll(cols[0]));
    r.group = cols[1];
    r.norm_m = detail::parse_double(cols[2]);
    r.norm_d = detail::parse_double(cols[3]);
    r.ratio = detail::parse_double(cols[4]);
    if (cols[5] != "0" && cols[5] != "1") throw IoError("step-norm CSV: bad guarded flag");
    r.guarded = cols[5] == "1";
    s.record(std::move(r));
  }
  return s;
}

inline StepNormSeries import_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  return read_csv(is);
}

}  // namespace adagraft

#endif  // ADAGRAFT_TELEMETRY_HPP
