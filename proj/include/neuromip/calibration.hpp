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

// Machine-speed calibrated time. A background thread repeatedly solves a
// small fixed MIP; speed = 1 / (its wall time), and calibrated time grows at
// speed * reference_solve_seconds per wall second. On an unloaded reference
// machine calibrated time equals wall time.

#ifndef NEUROMIP_CALIBRATION_HPP_
#define NEUROMIP_CALIBRATION_HPP_

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <span>
#include <thread>

namespace neuromip {

struct CalibrationConfig {
  int k_min = 3;
  int k_max = 30;
  double confidence = 0.95;
  // Stop sampling once the confidence half-width is this fraction of the mean.
  double max_rel_half_width = 0.05;
  // Wall seconds of one calibration solve on the reference machine. <= 0
  // measures it at construction, so calibrated time starts out as wall time.
  double reference_solve_seconds = 0.0;
  // Seconds taken by one calibration run; empty uses timed_calibration_solve.
  std::function<double()> sampler;

  void validate() const;
};

// One calibration sample: kCalibrationRepeats back-to-back solves of
// calibration_instance(), so a sample spans many scheduler time slices.
// Throws std::runtime_error if a solve does not reach optimality.
inline constexpr int kCalibrationRepeats = 4;
double timed_calibration_solve();

// Two-sided standard normal quantile for `confidence` (0.95 -> 1.95996...).
double normal_quantile(double confidence);

struct SpeedEstimate {
  double mean_speed = 0.0;  // 1 / seconds
  double half_width = 0.0;
  int samples = 0;
  bool converged = false;
};

// Normal-approximation interval of the mean of 1/sample.
SpeedEstimate summarize_speed(std::span<const double> seconds, double confidence);

// Draws between k_min and k_max samples, stopping as soon as the interval
// is narrow enough.
SpeedEstimate estimate_speed(const std::function<double()>& sampler,
                             const CalibrationConfig& config);

// Calibrated time accumulator: advance(dt, speed) adds dt * speed * ref.
class CalibratedTime {
 public:
  explicit CalibratedTime(double reference_solve_seconds) : ref_(reference_solve_seconds) {}
  void advance(double wall_seconds, double speed) { total_ += wall_seconds * speed * ref_; }
  double total() const { return total_; }

 private:
  double ref_;
  double total_ = 0.0;
};

class CalibratedClock {
 public:
  explicit CalibratedClock(CalibrationConfig config = {});
  ~CalibratedClock();
  CalibratedClock(const CalibratedClock&) = delete;
  CalibratedClock& operator=(const CalibratedClock&) = delete;

  // Calibrated seconds since construction; non-decreasing.
  double now() const;
  // Speed failed to measure; now() then reports wall time.
  bool wall_fallback() const { return fallback_.load(); }
  double reference_solve_seconds() const { return ref_; }
  long batches() const { return batches_.load(); }
  // Running mean of the batch in progress, else the last batch mean.
  double current_speed() const;

  std::function<double()> as_function() const {
    return [this] { return now(); };
  }

 private:
  using Steady = std::chrono::steady_clock;
  double wall_since(Steady::time_point t) const;
  void run();
  double current_locked() const;

  CalibrationConfig config_;
  double ref_ = 0.0;
  Steady::time_point start_;
  mutable std::mutex mu_;
  CalibratedTime accumulated_{1.0};
  Steady::time_point last_;
  double speed_ = 0.0;
  // Mean speed of the batch in progress; 0 before its first sample.
  double running_speed_ = 0.0;
  mutable double last_returned_ = 0.0;
  std::atomic<bool> stop_{false};
  std::atomic<bool> fallback_{false};
  std::atomic<long> batches_{0};
  std::thread worker_;
};

}  // namespace neuromip

#endif  // NEUROMIP_CALIBRATION_HPP_
