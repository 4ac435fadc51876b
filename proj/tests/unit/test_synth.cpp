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

#include "doctest.h"
#include "neuromip/synth.hpp"

using namespace neuromip;

TEST_CASE("set cover instances") {
  const MipInstance m = generate_set_cover(20, 10, 0.1, 4);
  CHECK(m.num_vars == 20);
  CHECK(m.num_cons == 10);
  CHECK(validate(m).ok());
  const CsrMatrix a = m.matrix();
  std::vector<int> covered(20, 0);
  for (int j = 0; j < m.num_cons; ++j) {
    CHECK(m.row_lower[j] == 1.0);
    CHECK(a.row_ptr[j + 1] - a.row_ptr[j] >= 2);
    for (int p = a.row_ptr[j]; p < a.row_ptr[j + 1]; ++p) {
      CHECK(a.values[p] == 1.0);
      covered[a.col_idx[p]] = 1;
    }
  }
  for (int i = 0; i < 20; ++i) {
    CHECK(covered[i] == 1);
    CHECK(m.var_kind[i] == VarKind::kBinary);
    CHECK(m.objective[i] >= 1.0);
  }
  // All ones covers every row.
  CHECK(check_feasible(m, std::vector<double>(20, 1.0)));
  CHECK_THROWS_AS(generate_set_cover(0, 3, 0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_set_cover(3, 3, 0.0, 1), std::invalid_argument);
}

TEST_CASE("knapsack instances") {
  const MipInstance m = generate_knapsack(15, 3, 9);
  CHECK(m.num_vars == 15);
  CHECK(m.num_cons == 3);
  CHECK(validate(m).ok());
  for (int i = 0; i < 15; ++i) CHECK(m.objective[i] < 0.0);
  // Empty knapsack is feasible, the full one is not (capacity is half the weight).
  CHECK(check_feasible(m, std::vector<double>(15, 0.0)));
  CHECK_FALSE(check_feasible(m, std::vector<double>(15, 1.0)));
  CHECK_THROWS_AS(generate_knapsack(4, 0, 1), std::invalid_argument);
}

TEST_CASE("families are deterministic and homogeneous") {
  FamilyParams p;
  const auto a = generate_family(p, 4, 100);
  const auto b = generate_family(p, 4, 100);
  REQUIRE(a.size() == 4);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k] == b[k]);
    CHECK(a[k].num_vars == p.num_vars);
    CHECK(a[k].num_cons == p.num_cons);
    CHECK(a[k] == generate(p, 100 + k));
  }
  CHECK_FALSE(a[0] == a[1]);
  p.family = Family::kSetCover;
  CHECK(generate(p, 3).num_vars == p.num_vars);
}

TEST_CASE("family names") {
  CHECK(parse_family("knapsack") == Family::kKnapsack);
  CHECK(parse_family("setcover") == Family::kSetCover);
  CHECK(parse_family("set-cover") == Family::kSetCover);
  CHECK(std::string(to_string(Family::kSetCover)) == "setcover");
  CHECK_THROWS_AS(parse_family("tsp"), std::invalid_argument);
}

TEST_CASE("calibration instance is fixed") {
  CHECK(calibration_instance() == calibration_instance());
  CHECK(calibration_instance().name == "calibration20");
}
