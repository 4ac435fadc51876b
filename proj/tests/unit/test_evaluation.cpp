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

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "doctest.h"
#include "neuromip/calibration.hpp"
#include "neuromip/evaluation.hpp"

using namespace neuromip;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("primal gap branches") {
  CHECK(primal_gap(5.0, 5.0) == 0.0);
  CHECK(primal_gap(2.0, -1.0) == 1.0);  // opposite signs
  CHECK(primal_gap(2.0, 1.0) == 0.5);
  CHECK(primal_gap(-1.0, -2.0) == 0.5);
  CHECK(primal_gap(kInf, -2.0) == 1.0);  // no incumbent
  CHECK(primal_gap(0.0, 0.0) == 0.0);
  // Both near zero: the epsilon floor is the denominator.
  CHECK(primal_gap(1e-13, 0.0) == 1e-13 / 1e-12);
  CHECK(primal_gap(1e-13, 0.0, 1e-10) == 1e-13 / 1e-10);
  // Better than p*: clamped at zero.
  CHECK(primal_gap(-3.0, -2.0) == 0.0);
}

TEST_CASE("dual gap branches") {
  CHECK(dual_gap(3.0, 5.0) == 0.4);
  CHECK(dual_gap(5.0, 5.0) == 0.0);
  CHECK(dual_gap(-1.0, 2.0) == 1.0);
  CHECK(dual_gap(-kInf, 2.0) == 1.0);
  CHECK(dual_gap(-4.0, -2.0) == 0.5);
  CHECK(dual_gap(0.0, 0.0) == 0.0);
}

TEST_CASE("primal-dual gap branches") {
  CHECK(primal_dual_gap(4.0, 2.0) == 0.5);
  CHECK(primal_dual_gap(kInf, 2.0) == 1.0);
  CHECK(primal_dual_gap(4.0, -kInf) == 1.0);
  CHECK(primal_dual_gap(1.0, -1.0) == 1.0);
  CHECK(primal_dual_gap(-2.0, -4.0) == 0.5);
  CHECK(primal_dual_gap(0.0, 0.0) == 0.0);
}

TEST_CASE("gaps stay in the unit interval") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(-100.0, 100.0);
  for (int k = 0; k < 2000; ++k) {
    const double a = v(rng), b = v(rng);
    for (double g : {primal_gap(a, b), dual_gap(a, b), primal_dual_gap(a, b)}) {
      CHECK(g >= 0.0);
      CHECK(g <= 1.0);
    }
  }
}

TEST_CASE("gap curve of a run") {
  const std::vector<BoundEvent> log = {
      {0.0, kInf, -10.0, 1}, {2.0, -5.0, -8.0, 5}, {10.0, -7.0, -7.0, 9}};
  const GapCurve primal = build_gap_curve(log, -7.0, GapKind::kPrimal);
  REQUIRE(primal.points.size() == 3);
  CHECK(primal.points[0] == GapPoint{0.0, 1.0});
  CHECK(primal.points[1] == GapPoint{2.0, 2.0 / 7.0});
  CHECK(primal.points[2] == GapPoint{10.0, 0.0});
  CHECK(primal.at(1.0) == 1.0);
  CHECK(primal.at(9.99) == 2.0 / 7.0);
  CHECK(primal.at(1e9) == 0.0);
  CHECK(time_to_target(primal, 0.0) == 10.0);
  CHECK(time_to_target(primal, 0.5) == 2.0);

  const GapCurve dual = build_gap_curve(log, -7.0, GapKind::kDual);
  for (std::size_t k = 1; k < dual.points.size(); ++k) {
    CHECK(dual.points[k].value <= dual.points[k - 1].value);
  }
  CHECK(dual.at(0.0) == 3.0 / 10.0);
  CHECK(dual.at(2.0) == 1.0 / 8.0);
  CHECK(dual.at(10.0) == 0.0);

  const GapCurve pd = build_gap_curve(log, -7.0, GapKind::kPrimalDual);
  CHECK(pd.at(0.0) == 1.0);
  CHECK(pd.at(2.0) == 3.0 / 8.0);
  CHECK(pd.at(10.0) == 0.0);
}

TEST_CASE("a run beating p* recomputes the whole curve") {
  const std::vector<BoundEvent> log = {{2.0, -5.0, -8.0, 5}, {10.0, -7.0, -7.0, 9}};
  double used = 0.0;
  const GapCurve c = build_gap_curve(log, -6.0, GapKind::kPrimal, &used);
  CHECK(used == -7.0);
  // With the supplied p* = -6 the point at t = 2 would be 1/6.
  CHECK(c.at(2.0) == 2.0 / 7.0);
  CHECK(c.points.back().value == 0.0);
}

TEST_CASE("empty log gives a constant curve at one") {
  const GapCurve c = build_gap_curve({}, -3.0, GapKind::kPrimal);
  REQUIRE(c.points.size() == 1);
  CHECK(c.points[0] == GapPoint{0.0, 1.0});
  CHECK(c.at(1e6) == 1.0);
  CHECK(time_to_target(c, 0.0) == kInf);
}

TEST_CASE("average curve") {
  GapCurve a{GapKind::kPrimal, {{0.0, 1.0}, {1.0, 0.5}, {4.0, 0.0}}};
  GapCurve b{GapKind::kPrimal, {{0.0, 1.0}, {2.0, 0.0}}};
  const std::vector<GapCurve> same = {a, a, a};
  CHECK(average_curve(same) == a);
  const std::vector<GapCurve> two = {a, b};
  const GapCurve m = average_curve(two);
  CHECK(m.at(0.0) == 1.0);
  CHECK(m.at(1.0) == 0.75);
  CHECK(m.at(2.0) == 0.25);
  CHECK(m.at(4.0) == 0.0);
  for (std::size_t k = 1; k < m.points.size(); ++k) {
    CHECK(m.points[k].value <= m.points[k - 1].value);
  }
  CHECK_THROWS_AS(average_curve(std::vector<GapCurve>{}), std::invalid_argument);
}

TEST_CASE("survival counts solved curves") {
  GapCurve a{GapKind::kPrimalDual, {{0.0, 1.0}, {1.0, 0.0}}};
  GapCurve b{GapKind::kPrimalDual, {{0.0, 1.0}, {3.0, 0.0}}};
  const std::vector<GapCurve> curves = {a, b};
  const auto s = survival(curves, 0.0);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == GapPoint{0.0, 0.0});
  CHECK(s[1] == GapPoint{1.0, 0.5});
  CHECK(s[2] == GapPoint{3.0, 1.0});
  const auto all = survival(curves, 1.0);
  CHECK(all.back().value == 1.0);
  CHECK(all.front().value == 1.0);
}

TEST_CASE("PAR-k arithmetic") {
  CHECK(par_k(std::vector<double>{5.0, 5.0}) == 5.0);
  CHECK(par_k(std::vector<double>{0.0, kInf}, 10000.0, 10.0) == 50000.0);
  CHECK(par_k(std::vector<double>{0.0, 20000.0}, 10000.0, 10.0) == 50000.0);
  // k = 1 is the mean with times capped at the limit.
  CHECK(par_k(std::vector<double>{1.0, kInf}, 10000.0, 1.0) == 5000.5);
  CHECK(par_k(std::vector<double>{10000.0}, 10000.0, 10.0) == 10000.0);
  const std::vector<double> t = {3.0, kInf, 7.0};
  double prev = 0.0;
  for (double k : {1.0, 2.0, 5.0, 10.0}) {
    const double v = par_k(t, 100.0, k);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK_THROWS_AS(par_k(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("curve CSV and SVG output") {
  const std::vector<GapPoint> pts = {{0.0, 1.0}, {2.5, 0.25}};
  CHECK(curve_csv(pts, "gap") == "time,gap\n0,1\n2.5,0.25\n");
  const std::string svg =
      render_svg_plot({{"run", pts}}, "title", "time", "gap", true, true);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("run") != std::string::npos);
}

TEST_CASE("normal quantile and speed summary") {
  CHECK(std::abs(normal_quantile(0.95) - 1.959963984540054) < 1e-9);
  const std::vector<double> seconds = {0.5, 0.5, 0.25, 0.25};
  const SpeedEstimate e = summarize_speed(seconds, 0.95);
  CHECK(e.mean_speed == 3.0);
  // Sample sd of {2, 2, 4, 4} is sqrt(4/3).
  CHECK(std::abs(e.half_width - 1.959963984540054 * std::sqrt(4.0 / 3.0) / 2.0) < 1e-9);
}

TEST_CASE("adaptive sample count") {
  CalibrationConfig cfg;
  int calls = 0;
  // Constant durations: the interval is zero after k_min samples.
  const SpeedEstimate steady = estimate_speed([&] { ++calls; return 0.01; }, cfg);
  CHECK(calls == 3);
  CHECK(steady.converged);
  CHECK(steady.mean_speed == doctest::Approx(100.0));

  // Alternating 1 and 3 seconds never narrows to 5 %: stops at k_max.
  calls = 0;
  const SpeedEstimate noisy = estimate_speed([&] { return (calls++ % 2) ? 3.0 : 1.0; }, cfg);
  CHECK(calls == 30);
  CHECK_FALSE(noisy.converged);

  cfg.k_min = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("calibrated time accumulator") {
  // speed * reference = 1: calibrated time is wall time.
  CalibratedTime unit(0.5);
  unit.advance(3.0, 2.0);
  CHECK(unit.total() == 3.0);
  // Doubling the speed doubles the accumulated units.
  CalibratedTime a(0.5), b(0.5);
  a.advance(1.5, 1.0);
  b.advance(1.5, 2.0);
  CHECK(b.total() == 2.0 * a.total());
}

TEST_CASE("calibrated clock with a synthetic sampler") {
  CalibrationConfig cfg;
  cfg.reference_solve_seconds = 0.002;
  // Each sample pretends the calibration solve took 4 ms: half the reference
  // speed, so calibrated time runs at half the wall rate.
  cfg.sampler = [] {
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    return 0.004;
  };
  CalibratedClock clock(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  while (clock.batches() < 3) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  const double c = clock.now();
  const double w = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK_FALSE(clock.wall_fallback());
  CHECK(clock.current_speed() == doctest::Approx(250.0));
  CHECK(c > 0.3 * w);
  CHECK(c < 0.7 * w);
  const double later = clock.now();
  CHECK(later >= c);
}

TEST_CASE("calibrated clock falls back to wall time") {
  CalibrationConfig cfg;
  cfg.reference_solve_seconds = 0.01;
  cfg.sampler = []() -> double { throw std::runtime_error("calibration failed"); };
  CalibratedClock clock(cfg);
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  CHECK(clock.wall_fallback());
  CHECK(clock.now() > 0.0);
}
