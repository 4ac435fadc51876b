// Copyright 2026 The neuromip Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Gap metrics, gap-over-time curves, survival fractions and PAR-k.

#ifndef NEUROMIP_EVALUATION_HPP_
#define NEUROMIP_EVALUATION_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace neuromip {

inline constexpr double kGapEpsilon = 1e-12;

// One entry of a solve's bound history.
struct BoundEvent {
  double elapsed = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  long nodes = 0;

  friend bool operator==(const BoundEvent&, const BoundEvent&) = default;
};

// Relative gaps in [0, 1]. An infinite bound (no incumbent, no finite dual
// bound) or bounds of opposite sign give 1. Values are clamped into [0, 1],
// so a primal bound better than p* reads as gap 0.
double primal_gap(double p, double p_star, double eps = kGapEpsilon);
double dual_gap(double d, double p_star, double eps = kGapEpsilon);
double primal_dual_gap(double p, double d, double eps = kGapEpsilon);

enum class GapKind : std::uint8_t { kPrimal, kDual, kPrimalDual };
const char* to_string(GapKind kind);

struct GapPoint {
  double time = 0.0;
  double value = 0.0;

  friend bool operator==(const GapPoint&, const GapPoint&) = default;
};

// Right-continuous step function starting at time 0.
struct GapCurve {
  GapKind kind = GapKind::kPrimal;
  std::vector<GapPoint> points;

  double at(double t) const;
  friend bool operator==(const GapCurve&, const GapCurve&) = default;
};

// Curve of one run. If the log contains a primal bound below `p_star`, that
// bound replaces p_star for every point of the curve (`p_star_used` reports
// the value applied).
GapCurve build_gap_curve(std::span<const BoundEvent> log, double p_star, GapKind kind,
                         double* p_star_used = nullptr);

// Pointwise mean over the union of breakpoints.
GapCurve average_curve(std::span<const GapCurve> curves);

// Fraction of curves at or below `target_gap` as a step function of time.
std::vector<GapPoint> survival(std::span<const GapCurve> curves, double target_gap);

// First time the curve reaches `target_gap`; +inf if never.
double time_to_target(const GapCurve& curve, double target_gap);

// Mean time-to-target with runs slower than `time_limit` (or unsolved,
// +inf) charged k * time_limit.
double par_k(std::span<const double> times_to_target, double time_limit = 10000.0,
             double k = 10.0);

struct PlotSeries {
  std::string label;
  std::vector<GapPoint> points;
};

// Step-curve SVG with optional log axes.
std::string render_svg_plot(const std::vector<PlotSeries>& series, const std::string& title,
                            const std::string& x_label, const std::string& y_label,
                            bool log_x, bool log_y);

std::string curve_csv(const std::vector<GapPoint>& points, const std::string& value_name);

}  // namespace neuromip

#endif  // NEUROMIP_EVALUATION_HPP_
