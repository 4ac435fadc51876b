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

// Batched ADMM: the state of every bound variant is one column of a
// row-major block, and each iteration performs one multi-right-hand-side
// triangular solve. Column chunks are independent, so they are distributed
// over OpenMP threads; within a column the arithmetic is exactly that of the
// scalar path in admm.cpp, which keeps the results bit-identical.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kkt_direct.hpp"
#include "neuromip/admm.hpp"

namespace neuromip {

namespace {

constexpr int kChunk = 16;

}  // namespace

bool KktFactor::solve_block(double* block, int cols, int ld, bool parallel,
                            char* column_ok) const {
  if (cols <= 0) return true;
  if (ld < cols) throw std::invalid_argument("solve_block: leading dimension too small");
  const int size = n_ + m_;
  const int chunks = (cols + kChunk - 1) / kChunk;
  int failures = 0;

  if (mode_ == LinearSystemMode::kIndirectCg) {
#pragma omp parallel for schedule(static) if (parallel) reduction(+ : failures)
    for (int b = 0; b < cols; ++b) {
      std::vector<double> v(size);
      for (int i = 0; i < size; ++i) v[i] = block[static_cast<long>(i) * ld + b];
      const bool ok = cg_solve(v);
      if (!ok) ++failures;
      if (column_ok) column_ok[b] = ok ? 1 : 0;
      for (int i = 0; i < size; ++i) block[static_cast<long>(i) * ld + b] = v[i];
    }
    return failures == 0;
  }

  if (column_ok) std::fill(column_ok, column_ok + cols, 1);
  const Direct& f = *direct_;
#pragma omp parallel for schedule(static) if (parallel)
  for (int c = 0; c < chunks; ++c) {
    const int b0 = c * kChunk;
    const int w = std::min(kChunk, cols - b0);
    std::vector<double> work(static_cast<std::size_t>(size) * w);
    double acc[kChunk];
    for (int i = 0; i < size; ++i) {
      const double* src = block + static_cast<long>(i) * ld + b0;
      double* dst = work.data() + static_cast<long>(f.perm[i]) * w;
      for (int b = 0; b < w; ++b) dst[b] = src[b];
    }
    for (int j = 0; j < size; ++j) {
      const double* wj = work.data() + static_cast<long>(j) * w;
      for (int p = f.col_ptr[j]; p < f.col_ptr[j + 1]; ++p) {
        const double l = f.values[p];
        double* wi = work.data() + static_cast<long>(f.row_idx[p]) * w;
        for (int b = 0; b < w; ++b) wi[b] -= l * wj[b];
      }
    }
    for (int j = 0; j < size; ++j) {
      double* wj = work.data() + static_cast<long>(j) * w;
      const double d = f.diag[j];
      for (int b = 0; b < w; ++b) wj[b] /= d;
    }
    for (int j = size - 1; j >= 0; --j) {
      double* wj = work.data() + static_cast<long>(j) * w;
      for (int b = 0; b < w; ++b) acc[b] = wj[b];
      for (int p = f.col_ptr[j]; p < f.col_ptr[j + 1]; ++p) {
        const double l = f.values[p];
        const double* wi = work.data() + static_cast<long>(f.row_idx[p]) * w;
        for (int b = 0; b < w; ++b) acc[b] -= l * wi[b];
      }
      for (int b = 0; b < w; ++b) wj[b] = acc[b];
    }
    for (int i = 0; i < size; ++i) {
      const double* src = work.data() + static_cast<long>(f.perm[i]) * w;
      double* dst = block + static_cast<long>(i) * ld + b0;
      for (int b = 0; b < w; ++b) dst[b] = src[b];
    }
  }
  return true;
}

std::vector<LpSolution> admm_solve_batch(const LpProblem& base,
                                         std::span<const BoundOverride> variants,
                                         const AdmmConfig& config,
                                         const std::optional<AdmmState>& shared_warm,
                                         const KktFactor* factor) {
  config.validate();
  const int n = base.num_vars;
  const int m = base.num_cons;
  const int nb = static_cast<int>(variants.size());
  for (const auto& v : variants) {
    if (v.var_index < 0 || v.var_index >= n) {
      throw std::out_of_range("admm_solve_batch: variant index " +
                              std::to_string(v.var_index) + " out of range");
    }
    if (v.new_lb > v.new_ub) {
      throw std::invalid_argument("admm_solve_batch: variant has lower > upper bound");
    }
  }
  std::vector<LpSolution> results(nb);
  if (nb == 0) return results;

  std::optional<KktFactor> own;
  if (factor == nullptr) {
    own.emplace(base.matrix, config.rho, config.linear_system_mode, config.cg_tol,
                config.cg_max_iters);
    factor = &*own;
  }
  if (factor->num_vars() != n || factor->num_cons() != m || factor->rho() != config.rho) {
    throw std::invalid_argument("admm_solve_batch: factor does not match problem/config");
  }

  const AdmmState init = shared_warm ? *shared_warm : AdmmState::zeros(n, m);
  if (static_cast<int>(init.x.size()) != n || static_cast<int>(init.y.size()) != m ||
      static_cast<int>(init.x_tilde.size()) != n ||
      static_cast<int>(init.y_tilde.size()) != m ||
      static_cast<int>(init.lambda.size()) != n + m) {
    throw std::invalid_argument("admm_solve_batch: warm state dimensions mismatch");
  }

  // Column-major per variant: v_tilde/lambda hold (x, y) stacked, length n+m.
  const int size = n + m;
  std::vector<std::vector<double>> vt(nb), lam(nb), v(nb);
  for (int b = 0; b < nb; ++b) {
    vt[b].resize(size);
    lam[b] = init.lambda;
    v[b].resize(size);
    std::copy(init.x_tilde.begin(), init.x_tilde.end(), vt[b].begin());
    std::copy(init.y_tilde.begin(), init.y_tilde.end(), vt[b].begin() + n);
    std::copy(init.x.begin(), init.x.end(), v[b].begin());
    std::copy(init.y.begin(), init.y.end(), v[b].begin() + n);
  }

  std::vector<int> active(nb);
  for (int b = 0; b < nb; ++b) {
    active[b] = b;
    results[b].status = LpStatus::kMaxIters;
  }
  std::vector<double> rhs;
  std::vector<char> column_ok;
  std::vector<char> done(nb, 0);
  const double rho = config.rho;

  for (int k = 1; k <= config.max_iters && !active.empty(); ++k) {
    const int na = static_cast<int>(active.size());
    rhs.assign(static_cast<std::size_t>(size) * na, 0.0);
#pragma omp parallel for schedule(static) if (config.parallel)
    for (int a = 0; a < na; ++a) {
      const int b = active[a];
      for (int i = 0; i < n; ++i) {
        rhs[static_cast<long>(i) * na + a] = vt[b][i] + lam[b][i] - base.objective[i] / rho;
      }
      for (int j = 0; j < m; ++j) {
        rhs[static_cast<long>(n + j) * na + a] = vt[b][n + j] + lam[b][n + j];
      }
    }
    column_ok.assign(na, 1);
    factor->solve_block(rhs.data(), na, na, config.parallel, column_ok.data());

#pragma omp parallel for schedule(static) if (config.parallel)
    for (int a = 0; a < na; ++a) {
      const int b = active[a];
      const BoundOverride& ov = variants[b];
      double primal = 0.0;
      double dmax = 0.0;
      for (int i = 0; i < n; ++i) {
        const double lo = i == ov.var_index ? ov.new_lb : base.var_lower[i];
        const double hi = i == ov.var_index ? ov.new_ub : base.var_upper[i];
        const double xi = rhs[static_cast<long>(i) * na + a];
        const double xt = std::clamp(xi - lam[b][i], lo, hi);
        primal = std::max(primal, std::abs(xi - xt));
        dmax = std::max(dmax, std::abs(xt - vt[b][i]));
        lam[b][i] -= xi - xt;
        v[b][i] = xi;
        vt[b][i] = xt;
      }
      for (int j = 0; j < m; ++j) {
        const double ry = vt[b][n + j] + lam[b][n + j];
        const double yj = rhs[static_cast<long>(n + j) * na + a] + ry;
        const double yt = std::clamp(yj - lam[b][n + j], base.row_lower[j], base.row_upper[j]);
        primal = std::max(primal, std::abs(yj - yt));
        dmax = std::max(dmax, std::abs(yt - vt[b][n + j]));
        lam[b][n + j] -= yj - yt;
        v[b][n + j] = yj;
        vt[b][n + j] = yt;
      }
      const double dual = rho * dmax;
      LpSolution& r = results[b];
      r.iters_used = k;
      r.primal_residual = primal;
      r.dual_residual = dual;
      if (!column_ok[a] || !std::isfinite(primal) || !std::isfinite(dual)) {
        r.status = LpStatus::kUnknown;
        done[b] = 1;
      } else if (primal <= config.eps_primal && dual <= config.eps_dual) {
        r.status = LpStatus::kConverged;
        done[b] = 1;
      }
    }
    std::erase_if(active, [&](int b) { return done[b] != 0; });
  }

  for (int b = 0; b < nb; ++b) {
    LpSolution& r = results[b];
    r.x.assign(vt[b].begin(), vt[b].begin() + n);
    double obj = 0.0;
    for (int i = 0; i < n; ++i) obj += base.objective[i] * r.x[i];
    r.objective = obj;
  }
  return results;
}

}  // namespace neuromip
