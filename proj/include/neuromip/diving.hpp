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

// Learned diving: sample partial assignments from per-variable predictions,
// turn them into sub-MIPs and solve those with branch-and-bound.

#ifndef NEUROMIP_DIVING_HPP_
#define NEUROMIP_DIVING_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "neuromip/bnb.hpp"
#include "neuromip/gcn.hpp"

namespace neuromip {

// Predictions for one integer variable: one entry per decision. Binaries
// have a single decision; general integers one per bit, most significant
// first.
struct VariablePrediction {
  int var = 0;
  bool binary = true;
  std::vector<double> mu;
  std::vector<double> select;
};

class DivingPredictor {
 public:
  virtual ~DivingPredictor() = default;
  virtual std::string name() const = 0;
  virtual std::vector<VariablePrediction> predict(const MipInstance& instance,
                                                  int bit_budget) const = 0;
};

// Graph encoding of the instance with its root LP solution (when the root
// LP is solvable) fed through the diving and selective heads.
class ModelPredictor : public DivingPredictor {
 public:
  explicit ModelPredictor(GcnModel model, std::string name = "model")
      : model_(std::move(model)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  std::vector<VariablePrediction> predict(const MipInstance& instance,
                                          int bit_budget) const override;

 private:
  GcnModel model_;
  std::string name_;
};

// Probabilities read off a known assignment; every decision selected with
// probability `coverage`.
class OraclePredictor : public DivingPredictor {
 public:
  explicit OraclePredictor(std::vector<double> x, double coverage = 1.0)
      : x_(std::move(x)), coverage_(coverage) {}
  std::string name() const override { return "oracle"; }
  std::vector<VariablePrediction> predict(const MipInstance& instance,
                                          int bit_budget) const override;

 private:
  std::vector<double> x_;
  double coverage_;
};

// Encoding used for diving: instance bounds plus root LP features.
BipartiteGraph encode_for_diving(const MipInstance& instance);

enum class ValueMode : std::uint8_t { kRound, kSample };

struct SampleOptions {
  int bit_budget = 8;
  // kRound assigns round(mu); kSample draws the value from Bernoulli(mu).
  ValueMode value_mode = ValueMode::kRound;
};

// Selection y ~ Bernoulli(select) per decision. Binary: y = 1 fixes the
// value. General integer: bits walk [lb, ub] (1: lb += ceil(w/2), 0: ub =
// lb + floor(w/2)); the first y = 0 stops the walk and records the interval
// reached so far, a single-point interval becomes a fixing.
SubMipSpec sample_partial_assignment(const MipInstance& instance,
                                     const std::vector<VariablePrediction>& predictions,
                                     std::uint64_t seed, const SampleOptions& options = {});

SubMipSpec sample_partial_assignment(const DivingPredictor& predictor, const MipInstance& instance,
                                     std::uint64_t seed, const SampleOptions& options = {});

// Seed derivation used for sub-MIP sampling and sub-solves.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

enum class DiveMode : std::uint8_t { kSequential, kParallel };

struct DivingConfig {
  int samples_per_model = 1;
  int max_submips = 100;
  // Independent sampling rounds per model, standing in for solver seeds.
  int sub_seeds = 1;
  SampleOptions sample;
  std::uint64_t seed = 0;
  DiveMode mode = DiveMode::kSequential;
  void validate() const;
};

// Cross product models x sub-seeds x samples in that nesting order,
// duplicates dropped, truncated to max_submips. Deterministic given the seed.
std::vector<SubMipSpec> generate_submips(const std::vector<const DivingPredictor*>& models,
                                         const MipInstance& instance, const DivingConfig& config);

struct DiveOptions {
  // Branching rule used inside each sub-MIP.
  std::string policy = "pseudocost";
  SolveOptions solve;
};

struct DiveResult {
  SolveResult result;
  // Per processed spec (in processing order): index into the input list,
  // sub-solve status and best objective (+inf if none).
  std::vector<int> order;
  std::vector<double> sub_objective;
  std::vector<std::string> sub_error;
};

// Specs are shuffled with `seed` and solved one after another. `limits` is
// the total budget; each sub-MIP gets an equal share of what remains, so
// unused budget rolls over. An empty list falls back to one plain solve.
DiveResult dive_sequential(const MipInstance& instance, const std::vector<SubMipSpec>& specs,
                           const SolveLimits& limits, std::uint64_t seed,
                           const DiveOptions& options = {});

// Every spec k solved as an independent task with `limits` each and seed
// mix_seed(seed, k); event logs
// merged by timestamp (ties by spec index) keeping the best primal bound.
DiveResult dive_parallel(const MipInstance& instance, const std::vector<SubMipSpec>& specs,
                         const SolveLimits& limits, std::uint64_t seed = 0,
                         const DiveOptions& options = {});

nlohmann::json to_json(const SolveResult& result);
// Reads the fields written by to_json; solutions are not stored.
SolveResult solve_result_from_json(const nlohmann::json& doc);
std::string event_log_csv(const std::vector<BoundEvent>& log);

}  // namespace neuromip

#endif  // NEUROMIP_DIVING_HPP_
