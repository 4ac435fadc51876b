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

#include <cmath>
#include <random>

#include "doctest.h"
#include "neuromip/lp.hpp"
#include "test_util.hpp"

using namespace neuromip;

namespace {

LpProblem one_var() {
  // min -x s.t. x <= 1.5, 0 <= x <= 2.
  MipBuilder b;
  b.add_var(0.0, 2.0, -1.0);
  b.add_row(-kInf, 1.5, {{0, 1.0}});
  return LpProblem::from_mip(b.build());
}

}  // namespace

TEST_CASE("exact oracle on the one-variable LP") {
  const LpSolution s = exact_lp_oracle(one_var());
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.x[0] == doctest::Approx(1.5));
  CHECK(s.objective == doctest::Approx(-1.5));
  // c - A^T pi = d with the row active at its upper side.
  CHECK(s.row_duals[0] == doctest::Approx(-1.0));
  CHECK(s.reduced_costs[0] == doctest::Approx(0.0));
}

TEST_CASE("exact oracle statuses") {
  LpProblem bad = one_var();
  bad.var_lower[0] = 3.0;
  CHECK_THROWS_AS(exact_lp_oracle(bad), DataError);

  MipBuilder inf;
  inf.add_var(0.0, 1.0, 1.0);
  inf.add_row(2.0, kInf, {{0, 1.0}});
  CHECK(exact_lp_oracle(LpProblem::from_mip(inf.build())).status == LpStatus::kInfeasible);

  MipBuilder unb;
  unb.add_var(-kInf, kInf, 1.0);
  unb.add_var(0.0, kInf, 0.0);
  unb.add_row(-kInf, 4.0, {{0, 1.0}, {1, 1.0}});
  CHECK(exact_lp_oracle(LpProblem::from_mip(unb.build())).status == LpStatus::kUnbounded);
}

TEST_CASE("exact oracle matches vertex enumeration on random 6x6 LPs") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 12; ++t) {
    const LpProblem lp = testing::random_lp(rng, 6, 6);
    const auto brute = testing::vertex_enumeration(lp);
    REQUIRE(brute.has_value());
    const LpSolution s = exact_lp_oracle(lp);
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(*brute).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("exact oracle duals satisfy complementary slackness") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 30; ++t) {
    const LpProblem lp = testing::random_lp(rng, 8, 5);
    const LpSolution s = exact_lp_oracle(lp);
    REQUIRE(s.status == LpStatus::kOptimal);
    std::vector<double> atpi(lp.num_vars), ax(lp.num_cons);
    lp.matrix.multiply_transposed(s.row_duals, atpi);
    lp.matrix.multiply(s.x, ax);
    for (int i = 0; i < lp.num_vars; ++i) {
      CHECK(lp.objective[i] - atpi[i] == doctest::Approx(s.reduced_costs[i]).scale(1.0));
      if (s.reduced_costs[i] > 1e-7) CHECK(s.x[i] == doctest::Approx(lp.var_lower[i]));
      if (s.reduced_costs[i] < -1e-7) CHECK(s.x[i] == doctest::Approx(lp.var_upper[i]));
    }
    for (int j = 0; j < lp.num_cons; ++j) {
      if (s.row_duals[j] > 1e-7) CHECK(ax[j] == doctest::Approx(lp.row_lower[j]));
      if (s.row_duals[j] < -1e-7) CHECK(ax[j] == doctest::Approx(lp.row_upper[j]));
    }
  }
}
