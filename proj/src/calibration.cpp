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

#include "neuromip/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "neuromip/bnb.hpp"
#include "neuromip/synth.hpp"

namespace neuromip {

void CalibrationConfig::validate() const {
  if (k_min < 2 || k_max < k_min) {
    throw std::invalid_argument("calibration needs 2 <= k_min <= k_max");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("calibration confidence must be in (0, 1)");
  }
  if (!(max_rel_half_width > 0.0)) {
    throw std::invalid_argument("calibration half-width threshold must be positive");
  }
}

double timed_calibration_solve() {
  static const MipInstance instance = calibration_instance();
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < kCalibrationRepeats; ++i) {
    PseudocostPolicy policy;
    const SolveResult r = solve(instance, policy, SolveLimits{}, 1);
    if (r.status != SolveStatus::kOptimal) {
      throw std::runtime_error("calibration solve did not reach optimality");
    }
  }
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double normal_quantile(double confidence) {
  // Solve erf(z / sqrt 2) = confidence by bisection.
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::erf(mid / std::sqrt(2.0)) < confidence) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SpeedEstimate summarize_speed(std::span<const double> seconds, double confidence) {
  SpeedEstimate e;
  e.samples = static_cast<int>(seconds.size());
  if (seconds.empty()) return e;
  double sum = 0.0;
  for (double s : seconds) sum += 1.0 / s;
  e.mean_speed = sum / seconds.size();
  if (seconds.size() < 2) {
    e.half_width = std::numeric_limits<double>::infinity();
    return e;
  }
  double ss = 0.0;
  for (double s : seconds) ss += (1.0 / s - e.mean_speed) * (1.0 / s - e.mean_speed);
  const double sd = std::sqrt(ss / (seconds.size() - 1));
  e.half_width = normal_quantile(confidence) * sd / std::sqrt(static_cast<double>(seconds.size()));
  return e;
}

SpeedEstimate estimate_speed(const std::function<double()>& sampler,
                             const CalibrationConfig& config) {
  config.validate();
  std::vector<double> seconds;
  SpeedEstimate e;
  while (static_cast<int>(seconds.size()) < config.k_max) {
    const double s = sampler();
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::runtime_error("calibration sample is not a positive duration");
    }
    seconds.push_back(s);
    if (static_cast<int>(seconds.size()) < config.k_min) continue;
    e = summarize_speed(seconds, config.confidence);
    if (e.half_width <= config.max_rel_half_width * e.mean_speed) {
      e.converged = true;
      return e;
    }
  }
  return e;
}

CalibratedClock::CalibratedClock(CalibrationConfig config) : config_(std::move(config)) {
  config_.validate();
  if (!config_.sampler) config_.sampler = timed_calibration_solve;
  ref_ = config_.reference_solve_seconds;
  if (ref_ <= 0.0) {
    try {
      ref_ = 1.0 / estimate_speed(config_.sampler, config_).mean_speed;
    } catch (const std::exception&) {
      fallback_ = true;
      ref_ = 1.0;
    }
  }
  accumulated_ = CalibratedTime(ref_);
  // Until the first batch completes the clock runs at reference speed.
  speed_ = 1.0 / ref_;
  start_ = last_ = Steady::now();
  if (!fallback_) worker_ = std::thread([this] { run(); });
}

CalibratedClock::~CalibratedClock() {
  stop_ = true;
  if (worker_.joinable()) worker_.join();
}

double CalibratedClock::wall_since(Steady::time_point t) const {
  return std::chrono::duration<double>(Steady::now() - t).count();
}

void CalibratedClock::run() {
  std::vector<double> batch;
  while (!stop_) {
    double sample;
    try {
      sample = config_.sampler();
      if (!(sample > 0.0) || !std::isfinite(sample)) {
        throw std::runtime_error("calibration sample is not a positive duration");
      }
    } catch (const std::exception&) {
      std::lock_guard<std::mutex> lock(mu_);
      // Wall time from here on.
      accumulated_.advance(wall_since(last_), current_locked());
      last_ = Steady::now();
      speed_ = 1.0 / ref_;
      running_speed_ = 0.0;
      fallback_ = true;
      return;
    }
    batch.push_back(sample);
    const SpeedEstimate e = summarize_speed(batch, config_.confidence);
    std::lock_guard<std::mutex> lock(mu_);
    running_speed_ = e.mean_speed;
    const int k = static_cast<int>(batch.size());
    const bool narrow = k >= config_.k_min &&
                        e.half_width <= config_.max_rel_half_width * e.mean_speed;
    if (narrow || k >= config_.k_max) {
      // The batch measured the speed of the interval it just covered.
      const auto t = Steady::now();
      accumulated_.advance(std::chrono::duration<double>(t - last_).count(), e.mean_speed);
      last_ = t;
      speed_ = e.mean_speed;
      running_speed_ = 0.0;
      batch.clear();
      ++batches_;
    }
  }
}

double CalibratedClock::current_locked() const {
  return running_speed_ > 0.0 ? running_speed_ : speed_;
}

double CalibratedClock::now() const {
  std::lock_guard<std::mutex> lock(mu_);
  const double v = accumulated_.total() + wall_since(last_) * current_locked() * ref_;
  last_returned_ = std::max(last_returned_, v);
  return last_returned_;
}

double CalibratedClock::current_speed() const {
  std::lock_guard<std::mutex> lock(mu_);
  return current_locked();
}

}  // namespace neuromip
