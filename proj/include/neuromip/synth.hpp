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

// Homogeneous synthetic instance families: every member shares the size and
// distribution parameters and differs only by seed.

#ifndef NEUROMIP_SYNTH_HPP_
#define NEUROMIP_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "neuromip/mip.hpp"

namespace neuromip {

enum class Family : std::uint8_t { kSetCover, kKnapsack };

Family parse_family(const std::string& name);
const char* to_string(Family family);

struct FamilyParams {
  Family family = Family::kKnapsack;
  // Set cover: columns (variables) and rows. Knapsack: items and resources.
  int num_vars = 30;
  int num_cons = 5;
  // Set cover only.
  double density = 0.08;
};

// min c x  s.t. every row covered at least once, x binary. Costs in [1, 100].
MipInstance generate_set_cover(int num_cols, int num_rows, double density, std::uint64_t seed);

// max v x  s.t. W x <= cap, x binary, written as a minimization of -v x.
// Weights in [1, 30], values correlated with weights, capacities half the
// row totals.
MipInstance generate_knapsack(int num_items, int num_resources, std::uint64_t seed);

MipInstance generate(const FamilyParams& params, std::uint64_t seed);

// `count` members seeded base_seed, base_seed + 1, ...
std::vector<MipInstance> generate_family(const FamilyParams& params, int count,
                                         std::uint64_t base_seed);

// Fixed 20-variable instance used to measure machine speed.
MipInstance calibration_instance();

}  // namespace neuromip

#endif  // NEUROMIP_SYNTH_HPP_
