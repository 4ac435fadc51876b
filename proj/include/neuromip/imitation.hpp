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

// Expert data for learned branching and diving, and imitation accuracy.

#ifndef NEUROMIP_IMITATION_HPP_
#define NEUROMIP_IMITATION_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "neuromip/bnb.hpp"
#include "neuromip/gcn.hpp"

namespace neuromip {

struct BranchingDataOptions {
  FsbOptions expert;
  double random_prob = 0.1;
  int repeats = 5;
  long node_limit = 1000;
  std::uint64_t seed = 0;
  // Nodes where the executed move was random keep their expert label.
  bool log_random_nodes = true;
  int jobs = 1;
};

// Runs branch-and-bound with the expert choosing (or, with probability
// random_prob, a uniform random candidate) and records every branching node.
// Output order: instance, repeat, node. Deterministic given the options.
std::vector<TrainingExample> generate_branching_data(const std::vector<MipInstance>& instances,
                                                     const BranchingDataOptions& options);

// The learned policy picks the branch; the expert labels every node.
std::vector<TrainingExample> dagger_round(const GcnModel& policy,
                                          const std::vector<MipInstance>& instances,
                                          const BranchingDataOptions& options);

struct DivingLabels {
  std::string instance;
  std::vector<std::vector<double>> assignments;
  std::vector<double> objectives;
  std::vector<double> weights;
};

// Every distinct incumbent found while solving each instance, weighted by
// importance_weights. Instances without a feasible assignment are dropped
// and named in `dropped` when non-null.
std::vector<DivingLabels> collect_diving_labels(const std::vector<MipInstance>& instances,
                                                const SolveLimits& limits, std::uint64_t seed,
                                                const std::string& policy = "pseudocost",
                                                std::vector<std::string>* dropped = nullptr,
                                                int jobs = 1);

// One diving example per labelled assignment, on the diving encoding.
std::vector<TrainingExample> diving_examples(const MipInstance& instance,
                                             const DivingLabels& labels);

// Whether the expert argmax (lowest index on ties) is among the k highest
// predicted entries (ties by index); k is clamped to the candidate count.
bool topk_hit(std::span<const double> predicted, std::span<const double> expert, int k);

std::vector<double> topk_accuracy(const GcnModel& model, std::span<const TrainingExample> dataset,
                                  std::span<const int> ks);

// Dataset directory: examples.jsonl (one record per line) and index.json.
void write_dataset(const std::filesystem::path& dir, std::span<const TrainingExample> examples);
std::vector<TrainingExample> read_dataset(const std::filesystem::path& dir_or_file);

}  // namespace neuromip

#endif  // NEUROMIP_IMITATION_HPP_
