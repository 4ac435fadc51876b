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

// Dense bounded-variable primal simplex used as the exact LP reference.
//
// The LP  b_l <= A x <= b_u, l <= x <= u  is rewritten with one logical
// variable per row, s = A x, giving the equality system [A  -I] (x, s) = 0.
// Rows whose starting activity violates the row bounds get an artificial
// column; phase one minimizes the artificial sum, phase two the objective.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "neuromip/lp.hpp"

namespace neuromip {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kConverged: return "converged";
    case LpStatus::kMaxIters: return "max_iters";
    case LpStatus::kUnknown: return "unknown";
  }
  return "unknown";
}

LpProblem LpProblem::from_mip(const MipInstance& mip) {
  LpProblem lp;
  lp.num_vars = mip.num_vars;
  lp.num_cons = mip.num_cons;
  lp.objective = mip.objective;
  lp.objective_offset = mip.objective_offset;
  lp.matrix = mip.matrix();
  lp.row_lower = mip.row_lower;
  lp.row_upper = mip.row_upper;
  lp.var_lower = mip.var_lower;
  lp.var_upper = mip.var_upper;
  return lp;
}

LpProblem LpProblem::with_bounds(std::vector<double> lower,
                                 std::vector<double> upper) const {
  LpProblem out = *this;
  out.var_lower = std::move(lower);
  out.var_upper = std::move(upper);
  return out;
}

namespace {

enum class Kind : std::uint8_t { kStructural, kLogical, kArtificial };

class BoundedSimplex {
 public:
  BoundedSimplex(const LpProblem& lp, const ExactLpOptions& opt)
      : lp_(lp), opt_(opt), n_(lp.num_vars), m_(lp.num_cons),
        cols_(lp.matrix.transposed()) {}

  LpSolution run();

 private:
  int total() const { return n_ + 2 * m_; }
  Kind kind(int j) const {
    if (j < n_) return Kind::kStructural;
    if (j < n_ + m_) return Kind::kLogical;
    return Kind::kArtificial;
  }
  // Dense column j of [A -I diag(sigma)].
  void column(int j, std::vector<double>& out) const;
  // pi^T a_j for column j.
  double dot_column(int j, const std::vector<double>& pi) const;
  void refactor();
  void recompute_basic_values();
  // Returns false on pivot limit.
  bool iterate(const std::vector<double>& cost, bool phase_one, LpStatus& status);

  const LpProblem& lp_;
  ExactLpOptions opt_;
  int n_;
  int m_;
  CsrMatrix cols_;  // A^T, so a row of cols_ is a column of A

  std::vector<double> lower_, upper_, value_;
  std::vector<double> sigma_;
  std::vector<int> basis_;       // basis_[r] = column basic in row r
  std::vector<int> basic_pos_;   // -1 if nonbasic
  std::vector<double> binv_;     // m x m row-major
  int pivots_ = 0;
};

void BoundedSimplex::column(int j, std::vector<double>& out) const {
  std::fill(out.begin(), out.end(), 0.0);
  switch (kind(j)) {
    case Kind::kStructural:
      for (int p = cols_.row_ptr[j]; p < cols_.row_ptr[j + 1]; ++p) {
        out[cols_.col_idx[p]] = cols_.values[p];
      }
      break;
    case Kind::kLogical: out[j - n_] = -1.0; break;
    case Kind::kArtificial: out[j - n_ - m_] = sigma_[j - n_ - m_]; break;
  }
}

double BoundedSimplex::dot_column(int j, const std::vector<double>& pi) const {
  switch (kind(j)) {
    case Kind::kStructural: {
      double acc = 0.0;
      for (int p = cols_.row_ptr[j]; p < cols_.row_ptr[j + 1]; ++p) {
        acc += cols_.values[p] * pi[cols_.col_idx[p]];
      }
      return acc;
    }
    case Kind::kLogical: return -pi[j - n_];
    case Kind::kArtificial: return sigma_[j - n_ - m_] * pi[j - n_ - m_];
  }
  return 0.0;
}

void BoundedSimplex::refactor() {
  // Gauss-Jordan with partial pivoting on the dense basis matrix.
  std::vector<double> b(static_cast<std::size_t>(m_) * m_);
  std::vector<double> col(m_);
  for (int r = 0; r < m_; ++r) {
    column(basis_[r], col);
    for (int i = 0; i < m_; ++i) b[i * m_ + r] = col[i];
  }
  binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
  for (int i = 0; i < m_; ++i) binv_[i * m_ + i] = 1.0;
  for (int c = 0; c < m_; ++c) {
    int piv = c;
    for (int i = c + 1; i < m_; ++i) {
      if (std::abs(b[i * m_ + c]) > std::abs(b[piv * m_ + c])) piv = i;
    }
    if (std::abs(b[piv * m_ + c]) < 1e-14) throw std::runtime_error("singular basis");
    if (piv != c) {
      for (int k = 0; k < m_; ++k) {
        std::swap(b[piv * m_ + k], b[c * m_ + k]);
        std::swap(binv_[piv * m_ + k], binv_[c * m_ + k]);
      }
    }
    const double d = b[c * m_ + c];
    for (int k = 0; k < m_; ++k) {
      b[c * m_ + k] /= d;
      binv_[c * m_ + k] /= d;
    }
    for (int i = 0; i < m_; ++i) {
      if (i == c) continue;
      const double f = b[i * m_ + c];
      if (f == 0.0) continue;
      for (int k = 0; k < m_; ++k) {
        b[i * m_ + k] -= f * b[c * m_ + k];
        binv_[i * m_ + k] -= f * binv_[c * m_ + k];
      }
    }
  }
}

void BoundedSimplex::recompute_basic_values() {
  // B x_B = -N x_N
  std::vector<double> rhs(m_, 0.0);
  std::vector<double> col(m_);
  for (int j = 0; j < total(); ++j) {
    if (basic_pos_[j] >= 0 || value_[j] == 0.0) continue;
    column(j, col);
    for (int i = 0; i < m_; ++i) rhs[i] -= col[i] * value_[j];
  }
  for (int r = 0; r < m_; ++r) {
    double acc = 0.0;
    for (int i = 0; i < m_; ++i) acc += binv_[r * m_ + i] * rhs[i];
    value_[basis_[r]] = acc;
  }
}

bool BoundedSimplex::iterate(const std::vector<double>& cost, bool phase_one,
                             LpStatus& status) {
  const double tol = opt_.tol;
  std::vector<double> pi(m_), w(m_), col(m_);
  int degenerate_run = 0;
  int since_refactor = 0;
  while (true) {
    if (++pivots_ > opt_.max_pivots) return false;
    if (since_refactor >= 50) {
      refactor();
      recompute_basic_values();
      since_refactor = 0;
    }
    // pi^T = c_B^T B^{-1}
    std::fill(pi.begin(), pi.end(), 0.0);
    for (int r = 0; r < m_; ++r) {
      const double cb = cost[basis_[r]];
      if (cb == 0.0) continue;
      for (int i = 0; i < m_; ++i) pi[i] += cb * binv_[r * m_ + i];
    }
    const bool bland = degenerate_run > 30;
    int entering = -1;
    int dir = 0;
    double best = 0.0;
    for (int j = 0; j < total(); ++j) {
      if (basic_pos_[j] >= 0 || lower_[j] == upper_[j]) continue;
      const double d = cost[j] - dot_column(j, pi);
      const bool at_lower = std::isfinite(lower_[j]) && value_[j] == lower_[j];
      const bool at_upper = std::isfinite(upper_[j]) && value_[j] == upper_[j];
      int cand_dir = 0;
      if (d < -tol && !at_upper) cand_dir = +1;
      else if (d > tol && !at_lower) cand_dir = -1;
      if (cand_dir == 0) continue;
      if (bland) {
        entering = j;
        dir = cand_dir;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        entering = j;
        dir = cand_dir;
      }
    }
    if (entering < 0) {
      status = LpStatus::kOptimal;
      return true;
    }
    column(entering, col);
    for (int r = 0; r < m_; ++r) {
      double acc = 0.0;
      for (int i = 0; i < m_; ++i) acc += binv_[r * m_ + i] * col[i];
      w[r] = acc;
    }
    // Ratio test. Basic variable r moves by -dir * w[r] per unit step.
    double step = upper_[entering] - lower_[entering];  // bound flip
    int leave = -1;
    double leave_pivot = 0.0;
    for (int r = 0; r < m_; ++r) {
      const double delta = -dir * w[r];
      if (std::abs(delta) < 1e-11) continue;
      const int b = basis_[r];
      double limit = kInf;
      if (delta < 0 && std::isfinite(lower_[b])) {
        limit = std::max(0.0, (value_[b] - lower_[b]) / -delta);
      } else if (delta > 0 && std::isfinite(upper_[b])) {
        limit = std::max(0.0, (upper_[b] - value_[b]) / delta);
      }
      if (!std::isfinite(limit)) continue;
      const bool better =
          limit < step - 1e-12 ||
          (limit <= step + 1e-12 && leave >= 0 &&
           (bland ? b < basis_[leave] : std::abs(delta) > leave_pivot));
      if (better || (leave < 0 && limit <= step)) {
        step = limit;
        leave = r;
        leave_pivot = std::abs(delta);
      }
    }
    if (!std::isfinite(step)) {
      status = phase_one ? LpStatus::kUnknown : LpStatus::kUnbounded;
      return true;
    }
    degenerate_run = step < 1e-12 ? degenerate_run + 1 : 0;
    value_[entering] += dir * step;
    for (int r = 0; r < m_; ++r) value_[basis_[r]] -= dir * step * w[r];
    if (leave < 0) {
      // Bound flip: snap to the opposite bound.
      value_[entering] = dir > 0 ? upper_[entering] : lower_[entering];
      continue;
    }
    const int out = basis_[leave];
    const double delta = -dir * w[leave];
    value_[out] = delta < 0 ? lower_[out] : upper_[out];
    basic_pos_[out] = -1;
    basis_[leave] = entering;
    basic_pos_[entering] = leave;
    // Product-form update of B^{-1}.
    const double piv = w[leave];
    for (int i = 0; i < m_; ++i) binv_[leave * m_ + i] /= piv;
    for (int r = 0; r < m_; ++r) {
      if (r == leave || w[r] == 0.0) continue;
      const double f = w[r];
      for (int i = 0; i < m_; ++i) binv_[r * m_ + i] -= f * binv_[leave * m_ + i];
    }
    ++since_refactor;
  }
}

LpSolution BoundedSimplex::run() {
  LpSolution sol;
  const int t = total();
  lower_.assign(t, 0.0);
  upper_.assign(t, 0.0);
  value_.assign(t, 0.0);
  sigma_.assign(m_, 1.0);
  for (int i = 0; i < n_; ++i) {
    lower_[i] = lp_.var_lower[i];
    upper_[i] = lp_.var_upper[i];
  }
  for (int j = 0; j < m_; ++j) {
    lower_[n_ + j] = lp_.row_lower[j];
    upper_[n_ + j] = lp_.row_upper[j];
  }
  auto start_value = [&](int j) {
    if (std::isfinite(lower_[j])) return lower_[j];
    if (std::isfinite(upper_[j])) return upper_[j];
    return 0.0;
  };
  for (int i = 0; i < n_; ++i) value_[i] = start_value(i);
  std::vector<double> activity(m_, 0.0);
  lp_.matrix.multiply(std::span<const double>(value_.data(), n_), activity);

  basis_.assign(m_, -1);
  basic_pos_.assign(t, -1);
  bool need_phase_one = false;
  for (int j = 0; j < m_; ++j) {
    const int s = n_ + j;
    const int a = n_ + m_ + j;
    lower_[a] = 0.0;
    if (activity[j] >= lower_[s] && activity[j] <= upper_[s]) {
      // Logical variable is basic at the row activity; artificial unused.
      value_[s] = activity[j];
      basis_[j] = s;
      upper_[a] = 0.0;
    } else {
      value_[s] = start_value(s);
      const double resid = activity[j] - value_[s];
      sigma_[j] = resid <= 0.0 ? 1.0 : -1.0;
      value_[a] = std::abs(resid);
      upper_[a] = kInf;
      basis_[j] = a;
      need_phase_one = true;
    }
    basic_pos_[basis_[j]] = j;
  }
  refactor();

  LpStatus status = LpStatus::kOptimal;
  if (need_phase_one) {
    std::vector<double> cost(t, 0.0);
    for (int j = 0; j < m_; ++j) cost[n_ + m_ + j] = 1.0;
    if (!iterate(cost, true, status) || status != LpStatus::kOptimal) {
      sol.status = LpStatus::kUnknown;
      return sol;
    }
    double infeas = 0.0;
    double scale = 1.0;
    for (int j = 0; j < m_; ++j) {
      infeas += value_[n_ + m_ + j];
      if (std::isfinite(lp_.row_lower[j])) scale = std::max(scale, std::abs(lp_.row_lower[j]));
      if (std::isfinite(lp_.row_upper[j])) scale = std::max(scale, std::abs(lp_.row_upper[j]));
    }
    if (infeas > 1e-7 * scale) {
      sol.status = LpStatus::kInfeasible;
      sol.iters_used = pivots_;
      return sol;
    }
    for (int j = 0; j < m_; ++j) {
      const int a = n_ + m_ + j;
      upper_[a] = 0.0;
      if (basic_pos_[a] < 0) value_[a] = 0.0;
    }
  }
  std::vector<double> cost(t, 0.0);
  for (int i = 0; i < n_; ++i) cost[i] = lp_.objective[i];
  if (!iterate(cost, false, status)) {
    sol.status = LpStatus::kUnknown;
    return sol;
  }
  sol.iters_used = pivots_;
  if (status != LpStatus::kOptimal) {
    sol.status = status;
    return sol;
  }
  refactor();
  recompute_basic_values();
  sol.status = LpStatus::kOptimal;
  sol.x.assign(value_.begin(), value_.begin() + n_);
  for (int i = 0; i < n_; ++i) {
    sol.x[i] = std::clamp(sol.x[i], lp_.var_lower[i], lp_.var_upper[i]);
  }
  double obj = 0.0;
  for (int i = 0; i < n_; ++i) obj += lp_.objective[i] * sol.x[i];
  sol.objective = obj;
  // Duals from the final basis.
  std::vector<double> pi(m_, 0.0);
  for (int r = 0; r < m_; ++r) {
    const double cb = cost[basis_[r]];
    if (cb == 0.0) continue;
    for (int i = 0; i < m_; ++i) pi[i] += cb * binv_[r * m_ + i];
  }
  sol.row_duals = pi;
  sol.reduced_costs.resize(n_);
  for (int i = 0; i < n_; ++i) sol.reduced_costs[i] = lp_.objective[i] - dot_column(i, pi);
  std::vector<double> ax(m_, 0.0);
  lp_.matrix.multiply(sol.x, ax);
  double resid = 0.0;
  for (int j = 0; j < m_; ++j) {
    resid = std::max({resid, lp_.row_lower[j] - ax[j], ax[j] - lp_.row_upper[j]});
  }
  sol.primal_residual = resid;
  return sol;
}

}  // namespace

LpSolution exact_lp_oracle(const LpProblem& problem, const ExactLpOptions& options) {
  if (problem.num_vars + problem.num_cons > options.max_size) {
    throw DataError("exact LP oracle: problem too large for the dense method");
  }
  for (int i = 0; i < problem.num_vars; ++i) {
    if (problem.var_lower[i] > problem.var_upper[i]) {
      throw DataError("exact LP oracle: lower bound exceeds upper bound for var " +
                      std::to_string(i));
    }
  }
  for (int j = 0; j < problem.num_cons; ++j) {
    if (problem.row_lower[j] > problem.row_upper[j]) {
      LpSolution sol;
      sol.status = LpStatus::kInfeasible;
      return sol;
    }
  }
  try {
    BoundedSimplex simplex(problem, options);
    return simplex.run();
  } catch (const std::runtime_error&) {
    LpSolution sol;
    sol.status = LpStatus::kUnknown;
    return sol;
  }
}

LpSolution exact_lp_oracle(const LpProblem& problem) {
  return exact_lp_oracle(problem, ExactLpOptions{});
}

}  // namespace neuromip
