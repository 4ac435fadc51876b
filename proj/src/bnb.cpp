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

#include "neuromip/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace neuromip {

std::vector<int> fractional_candidates(const MipInstance& instance,
                                       std::span<const double> x, double int_tol) {
  if (static_cast<int>(x.size()) != instance.num_vars) {
    throw std::invalid_argument("fractional_candidates: dimension mismatch");
  }
  std::vector<int> out;
  for (int i = 0; i < instance.num_vars; ++i) {
    if (!instance.is_integer(i)) continue;
    const double down = x[i] - std::floor(x[i]);
    const double up = std::ceil(x[i]) - x[i];
    if (std::min(down, up) > int_tol) out.push_back(i);
  }
  return out;
}

std::pair<Node, Node> branch(const Node& node, int var, double x_star_i) {
  if (var < 0 || var >= static_cast<int>(node.lower.size())) {
    throw std::invalid_argument("branch: variable index out of range");
  }
  const double fl = std::floor(x_star_i);
  const double cl = std::ceil(x_star_i);
  if (fl == cl) throw std::invalid_argument("branch: value is integral");
  Node down;
  down.parent = node.id;
  down.depth = node.depth + 1;
  down.lower = node.lower;
  down.upper = node.upper;
  down.dual_bound = node.dual_bound;
  Node up = down;
  down.upper[var] = std::min(down.upper[var], fl);
  up.lower[var] = std::max(up.lower[var], cl);
  down.branch_var = up.branch_var = var;
  down.branch_up = false;
  up.branch_up = true;
  down.branch_distance = x_star_i - fl;
  up.branch_distance = cl - x_star_i;
  return {std::move(down), std::move(up)};
}

std::size_t BranchScores::argmax() const {
  if (scores.empty()) throw std::invalid_argument("argmax: no candidates");
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return best;
}

std::vector<double> expert_distribution(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("expert_distribution: empty candidate set");
  double total = 0.0;
  for (double s : scores) {
    if (!(s >= 0.0)) throw std::invalid_argument("expert_distribution: negative score");
    total += s;
  }
  std::vector<double> p(scores.size());
  for (std::size_t k = 0; k < scores.size(); ++k) {
    p[k] = total > 0.0 ? scores[k] / total : 1.0 / static_cast<double>(scores.size());
  }
  return p;
}

Equilibrated equilibrate(const LpProblem& problem) {
  Equilibrated eq;
  eq.problem = problem;
  LpProblem& p = eq.problem;
  double cmax = 0.0;
  for (double c : p.objective) cmax = std::max(cmax, std::abs(c));
  eq.cost_scale = cmax > 0.0 ? 1.0 / cmax : 1.0;
  for (double& c : p.objective) c *= eq.cost_scale;
  eq.row_scale.assign(p.num_cons, 1.0);
  for (int j = 0; j < p.num_cons; ++j) {
    double ss = 0.0;
    for (int k = p.matrix.row_ptr[j]; k < p.matrix.row_ptr[j + 1]; ++k) {
      ss += p.matrix.values[k] * p.matrix.values[k];
    }
    if (ss <= 0.0) continue;
    const double r = 1.0 / std::sqrt(ss);
    eq.row_scale[j] = r;
    for (int k = p.matrix.row_ptr[j]; k < p.matrix.row_ptr[j + 1]; ++k) p.matrix.values[k] *= r;
    p.row_lower[j] *= r;
    p.row_upper[j] *= r;
  }
  return eq;
}

LpSolution equilibrate_solution(const Equilibrated& eq, const LpSolution& solution) {
  LpSolution s = solution;
  s.objective *= eq.cost_scale;
  for (double& d : s.reduced_costs) d *= eq.cost_scale;
  for (std::size_t j = 0; j < s.row_duals.size(); ++j) {
    s.row_duals[j] *= eq.cost_scale / eq.row_scale[j];
  }
  return s;
}

BranchScores fsb_scores(const LpProblem& node_problem, const LpSolution& node_lp,
                        std::span<const int> candidates, const FsbOptions& options,
                        const KktFactor* factor) {
  BranchScores out;
  const int nc = static_cast<int>(candidates.size());
  out.candidates.assign(candidates.begin(), candidates.end());
  out.parent_opt = node_lp.objective;
  out.opt_up.resize(nc);
  out.opt_down.resize(nc);
  out.flagged_up.assign(nc, 0);
  out.flagged_down.assign(nc, 0);
  out.scores.resize(nc);
  if (nc == 0) return out;
  const double opt = node_lp.objective;
  const double big_delta = std::max(1.0, std::abs(opt)) * 1e3;

  if (options.backend == FsbBackend::kExact) {
    LpProblem work = node_problem;
    for (int k = 0; k < nc; ++k) {
      const int i = candidates[k];
      const double xi = node_lp.x[i];
      for (int dir = 0; dir < 2; ++dir) {
        const double lo0 = work.var_lower[i], hi0 = work.var_upper[i];
        if (dir == 0) work.var_upper[i] = std::floor(xi);
        else work.var_lower[i] = std::ceil(xi);
        const LpSolution s = exact_lp_oracle(work);
        work.var_lower[i] = lo0;
        work.var_upper[i] = hi0;
        const bool ok = s.status == LpStatus::kOptimal;
        (dir == 0 ? out.opt_down : out.opt_up)[k] = ok ? s.objective : opt + big_delta;
        (dir == 0 ? out.flagged_down : out.flagged_up)[k] = ok ? 0 : 1;
      }
    }
  } else {
    std::vector<BoundOverride> variants;
    variants.reserve(2 * nc);
    for (int k = 0; k < nc; ++k) {
      const int i = candidates[k];
      const double xi = node_lp.x[i];
      variants.push_back({i, node_problem.var_lower[i], std::floor(xi)});
      variants.push_back({i, std::ceil(xi), node_problem.var_upper[i]});
    }
    std::optional<Equilibrated> eq;
    const LpProblem* lp = &node_problem;
    double cost_scale = 1.0;
    std::optional<AdmmState> warm;
    if (options.admm_equilibrate) {
      eq = equilibrate(node_problem);
      lp = &eq->problem;
      cost_scale = eq->cost_scale;
      warm = AdmmState::from_optimum(*lp, equilibrate_solution(*eq, node_lp), options.admm.rho);
    } else {
      warm = AdmmState::from_optimum(node_problem, node_lp, options.admm.rho);
    }
    auto sols = admm_solve_batch(*lp, variants, options.admm, warm, factor);
    for (auto& s : sols) s.objective /= cost_scale;
    for (int k = 0; k < nc; ++k) {
      for (int dir = 0; dir < 2; ++dir) {
        const LpSolution& s = sols[2 * k + dir];
        const bool ok = s.status != LpStatus::kUnknown && std::isfinite(s.objective) &&
                        s.primal_residual <= options.admm_infeasible_residual;
        (dir == 0 ? out.opt_down : out.opt_up)[k] = ok ? s.objective : opt + big_delta;
        (dir == 0 ? out.flagged_down : out.flagged_up)[k] = ok ? 0 : 1;
      }
    }
  }
  for (int k = 0; k < nc; ++k) {
    const double du = out.flagged_up[k] ? big_delta : std::max(out.opt_up[k] - opt, 0.0);
    const double dd = out.flagged_down[k] ? big_delta : std::max(out.opt_down[k] - opt, 0.0);
    out.scores[k] = (du + options.epsilon) * (dd + options.epsilon);
  }
  out.expert_dist = expert_distribution(out.scores);
  return out;
}

std::string FsbPolicy::name() const {
  return options_.backend == FsbBackend::kExact ? "fsb-exact" : "fsb-admm";
}

void FsbPolicy::reset(const MipInstance&) { factor_.reset(); }

BranchScores FsbPolicy::scores(const BranchContext& ctx) {
  if (options_.backend == FsbBackend::kAdmm && !factor_) {
    const CsrMatrix matrix = options_.admm_equilibrate ? equilibrate(ctx.root_problem).problem.matrix
                                                       : ctx.root_problem.matrix;
    factor_ = std::make_unique<KktFactor>(matrix, options_.admm.rho,
                                          options_.admm.linear_system_mode,
                                          options_.admm.cg_tol, options_.admm.cg_max_iters);
  }
  return fsb_scores(ctx.node_problem, ctx.node_lp, ctx.candidates, options_, factor_.get());
}

std::size_t FsbPolicy::select(const BranchContext& ctx) { return scores(ctx).argmax(); }

std::size_t RandomPolicy::select(const BranchContext& ctx) {
  std::uniform_int_distribution<std::size_t> pick(0, ctx.candidates.size() - 1);
  return pick(ctx.rng);
}

std::size_t most_fractional_choice(std::span<const int> candidates, std::span<const double> x) {
  std::size_t best = 0;
  double best_frac = -1.0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double v = x[candidates[k]];
    const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
    if (frac > best_frac) {
      best_frac = frac;
      best = k;
    }
  }
  return best;
}

std::size_t MostFractionalPolicy::select(const BranchContext& ctx) {
  return most_fractional_choice(ctx.candidates, ctx.node_lp.x);
}

void PseudocostPolicy::reset(const MipInstance& instance) {
  sum_up_.assign(instance.num_vars, 0.0);
  sum_down_.assign(instance.num_vars, 0.0);
  count_up_.assign(instance.num_vars, 0);
  count_down_.assign(instance.num_vars, 0);
}

void PseudocostPolicy::observe(int var, bool up, double gain_per_unit) {
  if (var < 0 || var >= static_cast<int>(sum_up_.size()) || !std::isfinite(gain_per_unit)) return;
  if (up) {
    sum_up_[var] += gain_per_unit;
    ++count_up_[var];
  } else {
    sum_down_[var] += gain_per_unit;
    ++count_down_[var];
  }
}

std::size_t PseudocostPolicy::select(const BranchContext& ctx) {
  double total_up = 0.0, total_down = 0.0;
  int n_up = 0, n_down = 0;
  for (std::size_t i = 0; i < sum_up_.size(); ++i) {
    total_up += sum_up_[i];
    n_up += count_up_[i];
    total_down += sum_down_[i];
    n_down += count_down_[i];
  }
  if (n_up == 0 && n_down == 0) return most_fractional_choice(ctx.candidates, ctx.node_lp.x);
  // Uninitialized directions use the average over all observations.
  const double mean_up = n_up > 0 ? total_up / n_up : total_down / n_down;
  const double mean_down = n_down > 0 ? total_down / n_down : total_up / n_up;
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t k = 0; k < ctx.candidates.size(); ++k) {
    const int i = ctx.candidates[k];
    const double v = ctx.node_lp.x[i];
    const double pc_up = count_up_[i] > 0 ? sum_up_[i] / count_up_[i] : mean_up;
    const double pc_down = count_down_[i] > 0 ? sum_down_[i] / count_down_[i] : mean_down;
    const double s = (pc_up * (std::ceil(v) - v) + kFsbEpsilon) *
                     (pc_down * (v - std::floor(v)) + kFsbEpsilon);
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  return best;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kGapReached: return "gap_reached";
    case SolveStatus::kLimit: return "limit";
  }
  return "limit";
}

double prune_tolerance(double primal) {
  return 1e-9 * std::max(1.0, std::isfinite(primal) ? std::abs(primal) : 1.0);
}

namespace {

struct QueueItem {
  double bound;
  long id;
};

struct QueueOrder {
  // Lowest bound first, then lowest id (FIFO among ties).
  bool operator()(const QueueItem& a, const QueueItem& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

SolveResult solve(const MipInstance& instance, BranchingPolicy& policy,
                  const SolveLimits& limits, std::uint64_t seed, const SolveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  std::function<double()> clock = options.clock;
  if (!clock) {
    clock = [start] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
  }
  auto now = [&] { return clock() + options.time_offset; };

  SolveResult result;
  result.policy = policy.name();
  policy.reset(instance);
  std::mt19937_64 rng(seed);

  LpProblem root = LpProblem::from_mip(instance);
  LpProblem work = root;
  const double offset = instance.objective_offset;

  std::unordered_map<long, Node> nodes;
  std::priority_queue<QueueItem, std::vector<QueueItem>, QueueOrder> queue;
  long next_id = 0;
  {
    Node r;
    r.id = next_id++;
    r.lower = instance.var_lower;
    r.upper = instance.var_upper;
    queue.push({r.dual_bound, r.id});
    nodes.emplace(r.id, std::move(r));
  }

  double primal = kInf;
  double dual = -kInf;
  auto record = [&] {
    const double t = now();
    if (result.event_log.empty() || result.event_log.back().primal != primal ||
        result.event_log.back().dual != dual) {
      result.event_log.push_back({t, primal, dual, result.node_count});
    }
  };
  auto refresh_dual = [&] {
    double d = queue.empty() ? primal : std::min(queue.top().bound, primal);
    if (d > dual) dual = d;
    if (dual > primal) dual = primal;
  };

  result.status = SolveStatus::kOptimal;
  while (!queue.empty()) {
    if (result.node_count >= limits.max_nodes || clock() >= limits.max_time) {
      result.status = SolveStatus::kLimit;
      break;
    }
    if (std::isfinite(primal) && primal_dual_gap(primal, dual) <= limits.target_gap &&
        limits.target_gap > 0.0) {
      result.status = SolveStatus::kGapReached;
      break;
    }
    const QueueItem item = queue.top();
    queue.pop();
    Node node = std::move(nodes.at(item.id));
    nodes.erase(item.id);
    if (std::isfinite(primal) && node.dual_bound >= primal - prune_tolerance(primal)) {
      refresh_dual();
      record();
      continue;
    }

    work.var_lower = node.lower;
    work.var_upper = node.upper;
    LpSolution lp = options.lp_backend ? options.lp_backend(work) : exact_lp_oracle(work);
    ++result.node_count;

    if (lp.status == LpStatus::kUnbounded) {
      // The relaxation gives no bound; the instance is treated as unbounded.
      dual = -kInf;
      result.status = SolveStatus::kLimit;
      record();
      break;
    }
    if (!lp.solved()) {
      refresh_dual();
      record();
      continue;
    }
    const double obj = lp.objective + offset;
    if (node.branch_var >= 0 && node.branch_distance > 0.0 && std::isfinite(node.dual_bound)) {
      policy.observe(node.branch_var, node.branch_up,
                     std::max(obj - node.dual_bound, 0.0) / node.branch_distance);
    }
    node.dual_bound = std::max(node.dual_bound, obj);
    if (std::isfinite(primal) && node.dual_bound >= primal - prune_tolerance(primal)) {
      refresh_dual();
      record();
      continue;
    }

    const std::vector<int> cands = fractional_candidates(instance, lp.x);
    if (cands.empty()) {
      std::vector<double> x = lp.x;
      for (int i = 0; i < instance.num_vars; ++i) {
        if (instance.is_integer(i)) x[i] = std::round(x[i]);
      }
      if (check_feasible(instance, x)) {
        const double value = objective_value(instance, x);
        if (value < primal) {
          primal = value;
          result.solutions.push_back({value, x, now()});
          Assignment a;
          a.values = x;
          a.objective = value;
          a.feasible = Feasibility::kYes;
          result.incumbent = std::move(a);
        }
      }
      refresh_dual();
      record();
      continue;
    }

    const BranchContext ctx{instance, root, node, work, lp, cands, rng, result.node_count};
    const std::size_t pos = policy.select(ctx);
    if (pos >= cands.size()) throw std::logic_error("branching policy returned invalid position");
    const int var = cands[pos];
    node.lp_solution = std::move(lp);
    auto [down, up] = branch(node, var, node.lp_solution->x[var]);
    down.id = next_id++;
    up.id = next_id++;
    queue.push({down.dual_bound, down.id});
    queue.push({up.dual_bound, up.id});
    nodes.emplace(down.id, std::move(down));
    nodes.emplace(up.id, std::move(up));
    refresh_dual();
    record();
  }
  if (result.status == SolveStatus::kOptimal) {
    dual = primal;
    record();
  }
  result.primal_bound = primal;
  result.dual_bound = dual;
  result.elapsed = now();
  return result;
}

std::unique_ptr<BranchingPolicy> make_policy(const std::string& name) {
  if (name == "fsb" || name == "fsb-exact") return std::make_unique<FsbPolicy>();
  if (name == "fsb-admm") {
    FsbOptions o;
    o.backend = FsbBackend::kAdmm;
    return std::make_unique<FsbPolicy>(o);
  }
  if (name == "random") return std::make_unique<RandomPolicy>();
  if (name == "most_fractional" || name == "most-fractional") {
    return std::make_unique<MostFractionalPolicy>();
  }
  if (name == "pseudocost") return std::make_unique<PseudocostPolicy>();
  throw std::invalid_argument("unknown policy '" + name + "'");
}

namespace {

struct InequalityRow {
  std::vector<std::pair<int, double>> coeffs;
  double rhs;
};

std::vector<InequalityRow> as_less_equal(const MipInstance& instance) {
  std::vector<InequalityRow> rows;
  const CsrMatrix a = instance.matrix();
  for (int j = 0; j < instance.num_cons; ++j) {
    std::vector<std::pair<int, double>> row;
    for (int p = a.row_ptr[j]; p < a.row_ptr[j + 1]; ++p) row.emplace_back(a.col_idx[p], a.values[p]);
    if (std::isfinite(instance.row_upper[j])) rows.push_back({row, instance.row_upper[j]});
    if (std::isfinite(instance.row_lower[j])) {
      auto neg = row;
      for (auto& [c, v] : neg) v = -v;
      rows.push_back({neg, -instance.row_lower[j]});
    }
  }
  for (int i = 0; i < instance.num_vars; ++i) {
    if (std::isfinite(instance.var_upper[i])) rows.push_back({{{i, 1.0}}, instance.var_upper[i]});
    if (std::isfinite(instance.var_lower[i])) rows.push_back({{{i, -1.0}}, -instance.var_lower[i]});
  }
  return rows;
}

}  // namespace

CutSelection select_cuts_expert(const MipInstance& instance, const CutPool& pool, int k,
                                double big_m, const SolveLimits& limits) {
  const int np = pool.matrix.rows;
  if (pool.matrix.cols != instance.num_vars || static_cast<int>(pool.rhs.size()) != np) {
    throw DataError("cut pool dimensions do not match the instance");
  }
  if (k < 0) throw std::invalid_argument("select_cuts_expert: k must be non-negative");
  k = std::min(k, np);
  const auto rows = as_less_equal(instance);
  const int nr = static_cast<int>(rows.size());

  MipBuilder b("cut_selection");
  for (int r = 0; r < nr; ++r) b.add_var(-kInf, 0.0, -rows[r].rhs);
  for (int p = 0; p < np; ++p) b.add_var(-big_m, 0.0, -pool.rhs[p]);
  for (int p = 0; p < np; ++p) b.add_var(0.0, 1.0, 0.0, VarKind::kBinary);
  const int gamma0 = nr, z0 = nr + np;

  std::vector<std::vector<std::pair<int, double>>> dual_rows(instance.num_vars);
  for (int r = 0; r < nr; ++r) {
    for (const auto& [c, v] : rows[r].coeffs) dual_rows[c].emplace_back(r, v);
  }
  for (int p = 0; p < np; ++p) {
    for (int q = pool.matrix.row_ptr[p]; q < pool.matrix.row_ptr[p + 1]; ++q) {
      dual_rows[pool.matrix.col_idx[q]].emplace_back(gamma0 + p, pool.matrix.values[q]);
    }
  }
  for (int i = 0; i < instance.num_vars; ++i) {
    b.add_row(instance.objective[i], instance.objective[i], dual_rows[i]);
  }
  for (int p = 0; p < np; ++p) b.add_row(0.0, kInf, {{gamma0 + p, 1.0}, {z0 + p, big_m}});
  std::vector<std::pair<int, double>> card;
  for (int p = 0; p < np; ++p) card.emplace_back(z0 + p, 1.0);
  if (np > 0) b.add_row(k, k, card);

  const MipInstance dual_mip = b.build();
  MostFractionalPolicy policy;
  const SolveResult r = solve(dual_mip, policy, limits);
  CutSelection out;
  out.status = r.status;
  out.has_solution = r.incumbent.has_value();
  if (r.incumbent) {
    for (int p = 0; p < np; ++p) {
      if (r.incumbent->values[z0 + p] > 0.5) out.selected.push_back(p);
    }
    out.bound = -r.primal_bound + instance.objective_offset;
  }
  return out;
}

double lp_bound_with_cuts(const MipInstance& instance, const CutPool& pool,
                          std::span<const int> rows) {
  MipInstance m = instance;
  for (int p : rows) {
    if (p < 0 || p >= pool.matrix.rows) throw std::out_of_range("cut index out of range");
    const int j = m.num_cons++;
    for (int q = pool.matrix.row_ptr[p]; q < pool.matrix.row_ptr[p + 1]; ++q) {
      m.entries.push_back({j, pool.matrix.col_idx[q], pool.matrix.values[q]});
    }
    m.row_lower.push_back(-kInf);
    m.row_upper.push_back(pool.rhs[p]);
    m.con_names.push_back("cut" + std::to_string(p));
  }
  const LpSolution s = exact_lp_oracle(LpProblem::from_mip(m));
  if (s.status == LpStatus::kInfeasible) return kInf;
  if (s.status != LpStatus::kOptimal) return -kInf;
  return s.objective + m.objective_offset;
}

}  // namespace neuromip
