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

#include "neuromip/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace neuromip {

Family parse_family(const std::string& name) {
  if (name == "setcover" || name == "set-cover" || name == "set_cover") return Family::kSetCover;
  if (name == "knapsack") return Family::kKnapsack;
  throw std::invalid_argument("unknown instance family '" + name + "' (setcover, knapsack)");
}

const char* to_string(Family family) {
  return family == Family::kSetCover ? "setcover" : "knapsack";
}

MipInstance generate_set_cover(int num_cols, int num_rows, double density, std::uint64_t seed) {
  if (num_cols < 1 || num_rows < 1 || !(density > 0.0 && density <= 1.0)) {
    throw std::invalid_argument("set cover: need positive sizes and density in (0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> cost(1, 100);
  std::uniform_int_distribution<int> col(0, num_cols - 1);
  MipBuilder b("setcover_" + std::to_string(num_cols) + "x" + std::to_string(num_rows) + "_s" +
               std::to_string(seed));
  for (int j = 0; j < num_cols; ++j) b.add_var(0.0, 1.0, cost(rng), VarKind::kBinary);
  std::vector<char> used(num_cols, 0);
  std::vector<std::vector<std::pair<int, double>>> rows(num_rows);
  for (int r = 0; r < num_rows; ++r) {
    for (int j = 0; j < num_cols; ++j) {
      if (unit(rng) < density) rows[r].emplace_back(j, 1.0);
    }
    while (rows[r].size() < 2 && static_cast<int>(rows[r].size()) < num_cols) {
      const int j = col(rng);
      bool dup = false;
      for (const auto& e : rows[r]) dup = dup || e.first == j;
      if (!dup) rows[r].emplace_back(j, 1.0);
    }
    for (const auto& e : rows[r]) used[e.first] = 1;
  }
  // Every column covers at least one row.
  std::uniform_int_distribution<int> row(0, num_rows - 1);
  for (int j = 0; j < num_cols; ++j) {
    if (used[j]) continue;
    rows[row(rng)].emplace_back(j, 1.0);
  }
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    b.add_row(1.0, kInf, r);
  }
  return b.build();
}

MipInstance generate_knapsack(int num_items, int num_resources, std::uint64_t seed) {
  if (num_items < 1 || num_resources < 1) throw std::invalid_argument("knapsack: need positive sizes");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> weight(1, 30);
  std::uniform_int_distribution<int> noise(0, 10);
  std::vector<std::vector<double>> w(num_resources, std::vector<double>(num_items));
  for (auto& row : w) {
    for (double& v : row) v = weight(rng);
  }
  MipBuilder b("knapsack_" + std::to_string(num_items) + "x" + std::to_string(num_resources) + "_s" +
               std::to_string(seed));
  for (int i = 0; i < num_items; ++i) {
    double avg = 0.0;
    for (int k = 0; k < num_resources; ++k) avg += w[k][i];
    avg /= num_resources;
    b.add_var(0.0, 1.0, -(std::round(avg) + noise(rng)), VarKind::kBinary);
  }
  for (int k = 0; k < num_resources; ++k) {
    std::vector<std::pair<int, double>> row;
    double total = 0.0;
    for (int i = 0; i < num_items; ++i) {
      row.emplace_back(i, w[k][i]);
      total += w[k][i];
    }
    b.add_row(-kInf, std::floor(0.5 * total), row);
  }
  return b.build();
}

MipInstance generate(const FamilyParams& p, std::uint64_t seed) {
  if (p.family == Family::kSetCover) {
    return generate_set_cover(p.num_vars, p.num_cons, p.density, seed);
  }
  return generate_knapsack(p.num_vars, p.num_cons, seed);
}

std::vector<MipInstance> generate_family(const FamilyParams& params, int count,
                                         std::uint64_t base_seed) {
  std::vector<MipInstance> out;
  for (int k = 0; k < count; ++k) out.push_back(generate(params, base_seed + k));
  return out;
}

MipInstance calibration_instance() {
  MipInstance m = generate_knapsack(20, 3, 20260101);
  m.name = "calibration20";
  return m;
}

}  // namespace neuromip
