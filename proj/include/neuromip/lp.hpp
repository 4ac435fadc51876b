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

#ifndef NEUROMIP_LP_HPP_
#define NEUROMIP_LP_HPP_

#include <cstdint>
#include <vector>

#include "neuromip/mip.hpp"

namespace neuromip {

// LP relaxation in two-sided form: min c^T x  s.t. b_l <= A x <= b_u, l <= x <= u.
struct LpProblem {
  int num_vars = 0;
  int num_cons = 0;
  std::vector<double> objective;
  double objective_offset = 0.0;
  CsrMatrix matrix;
  std::vector<double> row_lower;
  std::vector<double> row_upper;
  std::vector<double> var_lower;
  std::vector<double> var_upper;

  static LpProblem from_mip(const MipInstance& instance);
  // Same problem with different variable bounds.
  LpProblem with_bounds(std::vector<double> lower, std::vector<double> upper) const;
};

enum class LpStatus : std::uint8_t {
  kOptimal,      // exact oracle: optimum found
  kInfeasible,   // exact oracle: no feasible point
  kUnbounded,    // exact oracle: objective unbounded below
  kConverged,    // ADMM: residuals below tolerance
  kMaxIters,     // ADMM: iteration limit reached
  kUnknown,      // numerical failure
};

const char* to_string(LpStatus status);

struct LpSolution {
  std::vector<double> x;
  // c^T x (the objective offset is not included).
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  LpStatus status = LpStatus::kUnknown;
  int iters_used = 0;
  // Exact oracle only: row multipliers pi and reduced costs d with
  // c - A^T pi = d. Signs follow the minimization convention (pi_j >= 0 on
  // rows active at their lower side, d_i >= 0 on variables at their lower
  // bound).
  std::vector<double> row_duals;
  std::vector<double> reduced_costs;

  bool solved() const {
    return status == LpStatus::kOptimal || status == LpStatus::kConverged ||
           status == LpStatus::kMaxIters;
  }
};

struct ExactLpOptions {
  // The oracle is a dense method; larger problems are rejected.
  int max_size = 4000;
  int max_pivots = 200000;
  double tol = 1e-9;
};

// Bounded-variable primal simplex on the dense basis inverse with Bland's
// rule as an anti-cycling fallback. Throws DataError when some l_i > u_i or
// the problem exceeds `max_size` (n + m).
LpSolution exact_lp_oracle(const LpProblem& problem, const ExactLpOptions& options);
LpSolution exact_lp_oracle(const LpProblem& problem);

}  // namespace neuromip

#endif  // NEUROMIP_LP_HPP_
