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

#include "neuromip/admm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "kkt_direct.hpp"

namespace neuromip {

void AdmmConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("admm: rho must be positive");
  }
  if (max_iters < 1) throw std::invalid_argument("admm: max_iters must be at least 1");
  if (cg_max_iters < 1) throw std::invalid_argument("admm: cg_max_iters must be at least 1");
}

AdmmState AdmmState::zeros(int num_vars, int num_cons) {
  AdmmState s;
  s.x.assign(num_vars, 0.0);
  s.x_tilde.assign(num_vars, 0.0);
  s.y.assign(num_cons, 0.0);
  s.y_tilde.assign(num_cons, 0.0);
  s.lambda.assign(num_vars + num_cons, 0.0);
  return s;
}

AdmmState AdmmState::from_optimum(const LpProblem& problem, const LpSolution& exact,
                                  double rho) {
  const int n = problem.num_vars;
  const int m = problem.num_cons;
  if (static_cast<int>(exact.x.size()) != n ||
      static_cast<int>(exact.row_duals.size()) != m ||
      static_cast<int>(exact.reduced_costs.size()) != n) {
    throw std::invalid_argument("from_optimum: solution lacks primal or dual values");
  }
  AdmmState s = zeros(n, m);
  s.x = exact.x;
  s.x_tilde = exact.x;
  problem.matrix.multiply(exact.x, s.y);
  for (int j = 0; j < m; ++j) {
    s.y[j] = std::clamp(s.y[j], problem.row_lower[j], problem.row_upper[j]);
  }
  s.y_tilde = s.y;
  for (int i = 0; i < n; ++i) s.lambda[i] = exact.reduced_costs[i] / rho;
  for (int j = 0; j < m; ++j) s.lambda[n + j] = exact.row_duals[j] / rho;
  return s;
}

KktFactor::KktFactor(const CsrMatrix& matrix, double rho, LinearSystemMode mode,
                     double cg_tol, int cg_max_iters)
    : n_(matrix.cols),
      m_(matrix.rows),
      rho_(rho),
      mode_(mode),
      cg_tol_(cg_tol),
      cg_max_iters_(cg_max_iters),
      a_(matrix),
      at_(matrix.transposed()) {
  if (!(rho > 0.0)) throw std::invalid_argument("factorize: rho must be positive");
  if (mode_ == LinearSystemMode::kIndirectCg) return;

  const int size = n_ + m_;
  using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  std::vector<Eigen::Triplet<double, int>> trips;
  trips.reserve(size + 2 * matrix.nnz());
  for (int i = 0; i < n_; ++i) trips.emplace_back(i, i, 1.0);
  for (int j = 0; j < m_; ++j) trips.emplace_back(n_ + j, n_ + j, -1.0);
  for (int r = 0; r < m_; ++r) {
    for (int p = matrix.row_ptr[r]; p < matrix.row_ptr[r + 1]; ++p) {
      // Lower triangle only: row n + r, column col.
      trips.emplace_back(n_ + r, matrix.col_idx[p], matrix.values[p]);
    }
  }
  SpMat kkt(size, size);
  kkt.setFromTriplets(trips.begin(), trips.end());

  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;
  ldlt.compute(kkt);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("factorize: KKT factorization failed");
  }
  direct_ = std::make_unique<Direct>();
  const SpMat& l = ldlt.matrixL().nestedExpression();
  direct_->col_ptr.assign(l.outerIndexPtr(), l.outerIndexPtr() + size + 1);
  const int nnz = direct_->col_ptr[size];
  direct_->row_idx.assign(l.innerIndexPtr(), l.innerIndexPtr() + nnz);
  direct_->values.assign(l.valuePtr(), l.valuePtr() + nnz);
  direct_->diag.resize(size);
  direct_->perm.resize(size);
  for (int i = 0; i < size; ++i) {
    direct_->diag[i] = ldlt.vectorD()(i);
    direct_->perm[i] = size > 0 ? ldlt.permutationP().indices()(i) : i;
    if (!std::isfinite(direct_->diag[i]) || direct_->diag[i] == 0.0) {
      throw std::runtime_error("factorize: numerically singular KKT pivot");
    }
  }
}

KktFactor::~KktFactor() = default;
KktFactor::KktFactor(KktFactor&&) noexcept = default;
KktFactor& KktFactor::operator=(KktFactor&&) noexcept = default;

long KktFactor::factor_nnz() const {
  return direct_ ? static_cast<long>(direct_->values.size()) : 0L;
}

// Scalar reference path: permute, forward solve, diagonal, backward solve,
// inverse permute.
bool KktFactor::solve(std::span<double> rhs) const {
  if (static_cast<int>(rhs.size()) != size()) {
    throw std::invalid_argument("KktFactor::solve: right-hand side length mismatch");
  }
  if (mode_ == LinearSystemMode::kIndirectCg) return cg_solve(rhs);
  const Direct& f = *direct_;
  const int size = n_ + m_;
  std::vector<double> w(size);
  for (int i = 0; i < size; ++i) w[f.perm[i]] = rhs[i];
  for (int j = 0; j < size; ++j) {
    const double wj = w[j];
    for (int p = f.col_ptr[j]; p < f.col_ptr[j + 1]; ++p) w[f.row_idx[p]] -= f.values[p] * wj;
  }
  for (int j = 0; j < size; ++j) w[j] /= f.diag[j];
  for (int j = size - 1; j >= 0; --j) {
    double acc = w[j];
    for (int p = f.col_ptr[j]; p < f.col_ptr[j + 1]; ++p) acc -= f.values[p] * w[f.row_idx[p]];
    w[j] = acc;
  }
  for (int i = 0; i < size; ++i) rhs[i] = w[f.perm[i]];
  return true;
}

bool KktFactor::cg_solve(std::span<double> rhs) const {
  // (I + A^T A) x = r1 + A^T r2, then y^ = A x - r2.
  const int n = n_;
  const int m = m_;
  std::vector<double> r2(rhs.begin() + n, rhs.end());
  std::vector<double> b(n), tmp_n(n), tmp_m(m);
  at_.multiply(r2, tmp_n);
  for (int i = 0; i < n; ++i) b[i] = rhs[i] + tmp_n[i];
  auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    a_.multiply(v, tmp_m);
    at_.multiply(tmp_m, out);
    for (int i = 0; i < n; ++i) out[i] += v[i];
  };
  auto dot = [](const std::vector<double>& u, const std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
    return acc;
  };
  std::vector<double> x(n, 0.0), r = b, p = b, ap(n);
  const double bnorm = std::sqrt(dot(b, b));
  const double target = cg_tol_ * std::max(1.0, bnorm);
  double rr = dot(r, r);
  bool ok = std::sqrt(rr) <= target;
  for (int it = 0; it < cg_max_iters_ && !ok; ++it) {
    apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_new = dot(r, r);
    ok = std::sqrt(rr_new) <= target;
    const double beta = rr_new / rr;
    rr = rr_new;
    for (int i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  a_.multiply(x, tmp_m);
  for (int i = 0; i < n; ++i) rhs[i] = x[i];
  for (int j = 0; j < m; ++j) rhs[n + j] = tmp_m[j] - r2[j];
  return ok;
}

KktFactor factorize(const CsrMatrix& matrix, double rho, LinearSystemMode mode) {
  return KktFactor(matrix, rho, mode);
}

namespace {

void check_dims(const LpProblem& problem, const AdmmState& s) {
  const auto n = static_cast<std::size_t>(problem.num_vars);
  const auto m = static_cast<std::size_t>(problem.num_cons);
  if (s.x.size() != n || s.x_tilde.size() != n || s.y.size() != m ||
      s.y_tilde.size() != m || s.lambda.size() != n + m) {
    throw std::invalid_argument("admm: state dimensions do not match the problem");
  }
}

void check_factor(const LpProblem& problem, const KktFactor& factor, const AdmmConfig& config) {
  if (factor.num_vars() != problem.num_vars || factor.num_cons() != problem.num_cons) {
    throw std::invalid_argument("admm: factor dimensions do not match the problem");
  }
  if (factor.rho() != config.rho) {
    throw std::invalid_argument("admm: factor was built for a different rho");
  }
}

struct StepInfo {
  double primal = 0.0;
  double dual = 0.0;
  bool linear_ok = true;
};

// Reference iteration on one state. The batched kernels in admm_batch.cpp
// must reproduce this arithmetic operation by operation.
StepInfo step_in_place(const LpProblem& problem, AdmmState& s, const KktFactor& factor,
                       const AdmmConfig& config, std::vector<double>& buf) {
  const int n = problem.num_vars;
  const int m = problem.num_cons;
  const double rho = config.rho;
  buf.resize(n + m);
  for (int i = 0; i < n; ++i) buf[i] = s.x_tilde[i] + s.lambda[i] - problem.objective[i] / rho;
  for (int j = 0; j < m; ++j) buf[n + j] = s.y_tilde[j] + s.lambda[n + j];
  StepInfo info;
  info.linear_ok = factor.solve(buf);
  double dmax = 0.0;
  for (int i = 0; i < n; ++i) {
    const double xi = buf[i];
    const double xt = std::clamp(xi - s.lambda[i], problem.var_lower[i], problem.var_upper[i]);
    info.primal = std::max(info.primal, std::abs(xi - xt));
    dmax = std::max(dmax, std::abs(xt - s.x_tilde[i]));
    s.lambda[i] -= xi - xt;
    s.x[i] = xi;
    s.x_tilde[i] = xt;
  }
  for (int j = 0; j < m; ++j) {
    const double ry = s.y_tilde[j] + s.lambda[n + j];
    const double yj = buf[n + j] + ry;
    const double yt = std::clamp(yj - s.lambda[n + j], problem.row_lower[j], problem.row_upper[j]);
    info.primal = std::max(info.primal, std::abs(yj - yt));
    dmax = std::max(dmax, std::abs(yt - s.y_tilde[j]));
    s.lambda[n + j] -= yj - yt;
    s.y[j] = yj;
    s.y_tilde[j] = yt;
  }
  info.dual = rho * dmax;
  return info;
}

}  // namespace

AdmmState admm_step(const LpProblem& problem, const AdmmState& state,
                    const KktFactor& factor, const AdmmConfig& config) {
  config.validate();
  check_dims(problem, state);
  check_factor(problem, factor, config);
  AdmmState next = state;
  std::vector<double> buf;
  step_in_place(problem, next, factor, config, buf);
  return next;
}

LpSolution admm_solve(const LpProblem& problem, const AdmmConfig& config,
                      const std::optional<AdmmState>& warm, const KktFactor* factor,
                      AdmmState* final_state) {
  config.validate();
  std::optional<KktFactor> own;
  if (factor == nullptr) {
    own.emplace(problem.matrix, config.rho, config.linear_system_mode, config.cg_tol,
                config.cg_max_iters);
    factor = &*own;
  }
  check_factor(problem, *factor, config);
  AdmmState s = warm ? *warm : AdmmState::zeros(problem.num_vars, problem.num_cons);
  check_dims(problem, s);

  LpSolution out;
  out.status = LpStatus::kMaxIters;
  std::vector<double> buf;
  for (int k = 1; k <= config.max_iters; ++k) {
    const StepInfo info = step_in_place(problem, s, *factor, config, buf);
    out.iters_used = k;
    out.primal_residual = info.primal;
    out.dual_residual = info.dual;
    if (!info.linear_ok || !std::isfinite(info.primal) || !std::isfinite(info.dual)) {
      out.status = LpStatus::kUnknown;
      break;
    }
    if (info.primal <= config.eps_primal && info.dual <= config.eps_dual) {
      out.status = LpStatus::kConverged;
      break;
    }
  }
  out.x = s.x_tilde;
  double obj = 0.0;
  for (int i = 0; i < problem.num_vars; ++i) obj += problem.objective[i] * out.x[i];
  out.objective = obj;
  if (final_state) *final_state = std::move(s);
  return out;
}

double speedup_factor(int n_lps, double t_single, double t_batch) {
  if (!(t_batch > 0.0)) throw std::invalid_argument("speedup_factor: t_batch must be positive");
  if (n_lps < 1) throw std::invalid_argument("speedup_factor: n_lps must be positive");
  return static_cast<double>(n_lps) * t_single / t_batch;
}

}  // namespace neuromip
