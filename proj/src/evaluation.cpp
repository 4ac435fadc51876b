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

#include "neuromip/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace neuromip {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

double relative_gap(double hi, double lo, double a, double b, double eps) {
  if (!std::isfinite(a) || !std::isfinite(b)) return 1.0;
  if (a * b < 0.0) return 1.0;
  const double g = (hi - lo) / std::max({std::abs(a), std::abs(b), eps});
  return std::clamp(g, 0.0, 1.0);
}

}  // namespace

double primal_gap(double p, double p_star, double eps) {
  return relative_gap(p, p_star, p, p_star, eps);
}

double dual_gap(double d, double p_star, double eps) {
  return relative_gap(p_star, d, d, p_star, eps);
}

double primal_dual_gap(double p, double d, double eps) {
  return relative_gap(p, d, d, p, eps);
}

const char* to_string(GapKind kind) {
  switch (kind) {
    case GapKind::kPrimal: return "primal";
    case GapKind::kDual: return "dual";
    case GapKind::kPrimalDual: return "primal_dual";
  }
  return "primal";
}

double GapCurve::at(double t) const {
  if (points.empty()) return 1.0;
  auto it = std::upper_bound(points.begin(), points.end(), t,
                             [](double v, const GapPoint& p) { return v < p.time; });
  if (it == points.begin()) return 1.0;
  return std::prev(it)->value;
}

GapCurve build_gap_curve(std::span<const BoundEvent> log, double p_star, GapKind kind,
                         double* p_star_used) {
  double best = p_star;
  for (const auto& e : log) {
    if (std::isfinite(e.primal) && (!std::isfinite(best) || e.primal < best)) best = e.primal;
  }
  if (p_star_used) *p_star_used = best;
  GapCurve curve;
  curve.kind = kind;
  curve.points.push_back({0.0, 1.0});
  for (const auto& e : log) {
    double g = 1.0;
    switch (kind) {
      case GapKind::kPrimal: g = std::isfinite(best) ? primal_gap(e.primal, best) : 1.0; break;
      case GapKind::kDual: g = std::isfinite(best) ? dual_gap(e.dual, best) : 1.0; break;
      case GapKind::kPrimalDual: g = primal_dual_gap(e.primal, e.dual); break;
    }
    const double t = std::max(0.0, e.elapsed);
    if (t <= curve.points.back().time) {
      curve.points.back().value = g;
    } else if (g != curve.points.back().value) {
      curve.points.push_back({t, g});
    }
  }
  return curve;
}

namespace {

std::vector<double> union_times(std::span<const GapCurve> curves) {
  std::set<double> times;
  times.insert(0.0);
  for (const auto& c : curves) {
    for (const auto& p : c.points) times.insert(p.time);
  }
  return {times.begin(), times.end()};
}

}  // namespace

GapCurve average_curve(std::span<const GapCurve> curves) {
  if (curves.empty()) throw std::invalid_argument("average_curve: no curves");
  GapCurve out;
  out.kind = curves.front().kind;
  for (double t : union_times(curves)) {
    double sum = 0.0;
    for (const auto& c : curves) sum += c.at(t);
    const double v = sum / static_cast<double>(curves.size());
    if (out.points.empty() || out.points.back().value != v) out.points.push_back({t, v});
  }
  return out;
}

std::vector<GapPoint> survival(std::span<const GapCurve> curves, double target_gap) {
  if (curves.empty()) throw std::invalid_argument("survival: no curves");
  std::vector<GapPoint> out;
  for (double t : union_times(curves)) {
    int solved = 0;
    for (const auto& c : curves) solved += c.at(t) <= target_gap ? 1 : 0;
    const double f = static_cast<double>(solved) / static_cast<double>(curves.size());
    if (out.empty() || out.back().value != f) out.push_back({t, f});
  }
  return out;
}

double time_to_target(const GapCurve& curve, double target_gap) {
  for (const auto& p : curve.points) {
    if (p.value <= target_gap) return p.time;
  }
  return kInfinity;
}

double par_k(std::span<const double> times_to_target, double time_limit, double k) {
  if (times_to_target.empty()) throw std::invalid_argument("par_k: empty result set");
  double sum = 0.0;
  for (double t : times_to_target) sum += (t > time_limit || std::isnan(t)) ? k * time_limit : t;
  return sum / static_cast<double>(times_to_target.size());
}

std::string curve_csv(const std::vector<GapPoint>& points, const std::string& value_name) {
  std::ostringstream os;
  os << std::setprecision(17) << "time," << value_name << "\n";
  for (const auto& p : points) os << p.time << "," << p.value << "\n";
  return os.str();
}

std::string render_svg_plot(const std::vector<PlotSeries>& series, const std::string& title,
                            const std::string& x_label, const std::string& y_label,
                            bool log_x, bool log_y) {
  constexpr double kW = 640, kH = 420, kL = 70, kR = 160, kT = 40, kB = 50;
  double x_lo = kInfinity, x_hi = -kInfinity, y_lo = kInfinity, y_hi = -kInfinity;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (log_x && p.time <= 0.0) continue;
      if (log_y && p.value <= 0.0) continue;
      x_lo = std::min(x_lo, p.time);
      x_hi = std::max(x_hi, p.time);
      y_lo = std::min(y_lo, p.value);
      y_hi = std::max(y_hi, p.value);
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = log_x ? 1e-3 : 0.0;
    x_hi = 1.0;
  }
  if (!std::isfinite(y_lo)) {
    y_lo = log_y ? 1e-6 : 0.0;
    y_hi = 1.0;
  }
  if (x_hi <= x_lo) x_hi = log_x ? x_lo * 10.0 : x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = log_y ? y_lo * 10.0 : y_lo + 1.0;
  auto tx = [&](double v) {
    const double a = log_x ? std::log10(std::max(v, x_lo)) : v;
    const double lo = log_x ? std::log10(x_lo) : x_lo;
    const double hi = log_x ? std::log10(x_hi) : x_hi;
    return kL + (a - lo) / (hi - lo) * (kW - kL - kR);
  };
  auto ty = [&](double v) {
    const double a = log_y ? std::log10(std::max(v, y_lo)) : v;
    const double lo = log_y ? std::log10(y_lo) : y_lo;
    const double hi = log_y ? std::log10(y_hi) : y_hi;
    return kH - kB - (a - lo) / (hi - lo) * (kH - kT - kB);
  };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
  os << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\""
     << kH - kB << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12
     << "\" text-anchor=\"middle\">" << x_label << (log_x ? " (log)" : "") << "</text>\n";
  os << "<text x=\"16\" y=\"" << (kT + kH - kB) / 2 << "\" transform=\"rotate(-90 16 "
     << (kT + kH - kB) / 2 << ")\" text-anchor=\"middle\">" << y_label << (log_y ? " (log)" : "")
     << "</text>\n";
  os << "<text x=\"" << kL << "\" y=\"" << kH - kB + 16 << "\" text-anchor=\"middle\">" << x_lo
     << "</text>\n";
  os << "<text x=\"" << kW - kR << "\" y=\"" << kH - kB + 16 << "\" text-anchor=\"middle\">"
     << x_hi << "</text>\n";
  os << "<text x=\"" << kL - 6 << "\" y=\"" << kH - kB << "\" text-anchor=\"end\">" << y_lo
     << "</text>\n";
  os << "<text x=\"" << kL - 6 << "\" y=\"" << kT + 4 << "\" text-anchor=\"end\">" << y_hi
     << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % 8];
    std::ostringstream path;
    bool started = false;
    double prev_y = 0.0;
    for (const auto& p : s.points) {
      if (log_x && p.time <= 0.0) continue;
      const double x = tx(p.time);
      const double y = ty(log_y && p.value <= 0.0 ? y_lo : p.value);
      if (!started) {
        path << "M" << x << "," << y;
        started = true;
      } else {
        path << " L" << x << "," << prev_y << " L" << x << "," << y;
      }
      prev_y = y;
    }
    if (started) {
      path << " L" << tx(x_hi) << "," << prev_y;
      os << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"1.5\"/>\n";
    }
    const double ly = kT + 16.0 * static_cast<double>(k);
    os << "<line x1=\"" << kW - kR + 10 << "\" y1=\"" << ly << "\" x2=\"" << kW - kR + 30
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kW - kR + 34 << "\" y=\"" << ly + 4 << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace neuromip
