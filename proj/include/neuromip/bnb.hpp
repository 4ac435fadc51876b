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

// Best-bound branch-and-bound with pluggable variable selection.

#ifndef NEUROMIP_BNB_HPP_
#define NEUROMIP_BNB_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "neuromip/admm.hpp"
#include "neuromip/evaluation.hpp"
#include "neuromip/lp.hpp"
#include "neuromip/mip.hpp"

namespace neuromip {

inline constexpr double kFsbEpsilon = 1e-4;

struct Node {
  long id = 0;
  long parent = -1;
  int depth = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  double dual_bound = -kInf;
  std::optional<LpSolution> lp_solution;
  std::optional<AdmmState> warm_state;
  // Branching that created this node (-1 at the root).
  int branch_var = -1;
  bool branch_up = false;
  double branch_distance = 0.0;
};

// Indices i in the integer set whose value is more than int_tol away from
// the nearest integer, ascending.
std::vector<int> fractional_candidates(const MipInstance& instance,
                                       std::span<const double> x,
                                       double int_tol = kDefaultIntTol);

// Down child u_i = floor(x_i), up child l_i = ceil(x_i).
std::pair<Node, Node> branch(const Node& node, int var, double x_star_i);

enum class FsbBackend : std::uint8_t { kExact, kAdmm };

struct BranchScores {
  std::vector<int> candidates;
  std::vector<double> scores;
  std::vector<double> opt_up;
  std::vector<double> opt_down;
  std::vector<char> flagged_up;
  std::vector<char> flagged_down;
  std::vector<double> expert_dist;
  double parent_opt = 0.0;

  // Position of the best score, lowest position on ties.
  std::size_t argmax() const;
};

// ADMM settings of the strong-branching expert: the solver defaults except
// for rho, which suits equilibrated problems.
inline AdmmConfig default_fsb_admm() {
  AdmmConfig c;
  c.rho = 10.0;
  return c;
}

struct FsbOptions {
  FsbBackend backend = FsbBackend::kExact;
  AdmmConfig admm = default_fsb_admm();
  // Scale rows to unit 2-norm and the cost to unit max-norm before the ADMM
  // batch. The LP and its children are unchanged; objectives are scaled back.
  bool admm_equilibrate = true;
  double epsilon = kFsbEpsilon;
  // ADMM children whose primal residual stays above this value after the
  // iteration budget are treated as infeasible.
  double admm_infeasible_residual = 2e-2;
};

// Equilibrated copy of `problem`: row j scaled by row_scale[j] = 1/||a_j||_2
// (1 for empty rows) and the cost by cost_scale = 1/||c||_inf (1 if c = 0).
// When `solution` is given its duals are mapped to the scaled problem.
struct Equilibrated {
  LpProblem problem;
  std::vector<double> row_scale;
  double cost_scale = 1.0;
};
Equilibrated equilibrate(const LpProblem& problem);
LpSolution equilibrate_solution(const Equilibrated& eq, const LpSolution& solution);

// Product-rule strong branching scores of every candidate at a node.
// `node_problem` carries the node's bounds, `node_lp` its exact solution.
// `factor` may share one KKT factorization across nodes (ADMM backend); it
// must be built from the equilibrated matrix when admm_equilibrate is set.
BranchScores fsb_scores(const LpProblem& node_problem, const LpSolution& node_lp,
                        std::span<const int> candidates, const FsbOptions& options,
                        const KktFactor* factor = nullptr);

// p_i = s_i / sum(s); uniform if the sum is zero.
std::vector<double> expert_distribution(std::span<const double> scores);

struct BranchContext {
  const MipInstance& instance;
  const LpProblem& root_problem;
  const Node& node;
  const LpProblem& node_problem;
  const LpSolution& node_lp;
  std::span<const int> candidates;
  std::mt19937_64& rng;
  long node_number;
};

class BranchingPolicy {
 public:
  virtual ~BranchingPolicy() = default;
  virtual std::string name() const = 0;
  // Returns a position into ctx.candidates.
  virtual std::size_t select(const BranchContext& ctx) = 0;
  // Called after a child LP is solved: objective gain per unit of bound change.
  virtual void observe(int /*var*/, bool /*up*/, double /*gain_per_unit*/) {}
  // Called once at the start of every solve.
  virtual void reset(const MipInstance& /*instance*/) {}
};

class FsbPolicy : public BranchingPolicy {
 public:
  explicit FsbPolicy(FsbOptions options = {}) : options_(std::move(options)) {}
  std::string name() const override;
  std::size_t select(const BranchContext& ctx) override;
  void reset(const MipInstance& instance) override;
  BranchScores scores(const BranchContext& ctx);
  const FsbOptions& options() const { return options_; }

 private:
  FsbOptions options_;
  std::unique_ptr<KktFactor> factor_;
};

class RandomPolicy : public BranchingPolicy {
 public:
  std::string name() const override { return "random"; }
  std::size_t select(const BranchContext& ctx) override;
};

class MostFractionalPolicy : public BranchingPolicy {
 public:
  std::string name() const override { return "most_fractional"; }
  std::size_t select(const BranchContext& ctx) override;
};

// Running averages of per-unit objective gains per variable and direction.
class PseudocostPolicy : public BranchingPolicy {
 public:
  std::string name() const override { return "pseudocost"; }
  std::size_t select(const BranchContext& ctx) override;
  void observe(int var, bool up, double gain_per_unit) override;
  void reset(const MipInstance& instance) override;

 private:
  std::vector<double> sum_up_, sum_down_;
  std::vector<int> count_up_, count_down_;
};

std::size_t most_fractional_choice(std::span<const int> candidates, std::span<const double> x);

enum class SolveStatus : std::uint8_t { kOptimal, kGapReached, kLimit };
const char* to_string(SolveStatus status);

struct SolveLimits {
  double max_time = kInf;
  long max_nodes = std::numeric_limits<long>::max();
  double target_gap = 0.0;
};

struct SolveOptions {
  // Node LP solver; nullptr selects the exact oracle.
  LpBackend lp_backend = nullptr;
  // Elapsed-time source in seconds; defaults to a steady wall clock started
  // at the beginning of the solve.
  std::function<double()> clock;
  // Added to every timestamp in the event log.
  double time_offset = 0.0;
};

struct FoundSolution {
  double objective = 0.0;
  std::vector<double> x;
  double elapsed = 0.0;
};

struct SolveResult {
  std::optional<Assignment> incumbent;
  double primal_bound = kInf;
  double dual_bound = -kInf;
  long node_count = 0;
  SolveStatus status = SolveStatus::kLimit;
  std::vector<BoundEvent> event_log;
  // Every incumbent improvement, in order.
  std::vector<FoundSolution> solutions;
  double elapsed = 0.0;
  std::string policy;
};

// Prune tolerance used when comparing node bounds with the primal bound.
double prune_tolerance(double primal);

SolveResult solve(const MipInstance& instance, BranchingPolicy& policy,
                  const SolveLimits& limits = {}, std::uint64_t seed = 0,
                  const SolveOptions& options = {});

// Policy factory for the names accepted on the command line:
// fsb, fsb-exact, fsb-admm, random, most_fractional, pseudocost.
std::unique_ptr<BranchingPolicy> make_policy(const std::string& name);

// Valid inequalities pool_matrix x <= pool_rhs for the cut-selection expert.
struct CutPool {
  CsrMatrix matrix;
  std::vector<double> rhs;
};

struct CutSelection {
  std::vector<int> selected;
  // LP bound certified by the dual-side MIP.
  double bound = -kInf;
  SolveStatus status = SolveStatus::kLimit;
  bool has_solution = false;
};

// Builds the dual-side selection MIP over (y, gamma, z) for the LP
// relaxation of `instance` written as Ax <= b (finite variable bounds
// included as rows) and solves it with solve().
CutSelection select_cuts_expert(const MipInstance& instance, const CutPool& pool, int k,
                                double big_m = 1e6, const SolveLimits& limits = {});

// LP relaxation bound of `instance` with the given pool rows added.
double lp_bound_with_cuts(const MipInstance& instance, const CutPool& pool,
                          std::span<const int> rows);

}  // namespace neuromip

#endif  // NEUROMIP_BNB_HPP_
