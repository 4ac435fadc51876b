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

// First-order LP solver based on ADMM over the splitting
//
//   minimize  c^T x + I{Ax = y}(x, y) + I[b_l, b_u](y~) + I[l, u](x~)
//   s.t.      x = x~,  y = y~
//
// Each iteration solves one linear system with the fixed quasi-definite KKT
// matrix [[I, A^T], [A, -I]]; the factorization is computed once and shared
// by every iteration and every member of a batch of bound variants.
//
// Iteration (rho > 0, r = (x~ + lambda_x, y~ + lambda_y)):
//   (x, y - r_y) = K^{-1} (r_x - c / rho, r_y)
//   x~ = clamp(x - lambda_x, l, u)
//   y~ = clamp(y - lambda_y, b_l, b_u)
//   lambda = lambda - ((x, y) - (x~, y~))
//
// The multiplier update subtracts the primal residual so that lambda acts as
// the scaled dual of the constraint (x, y) = (x~, y~) under the "+ lambda"
// convention of the first two steps; adding it instead makes the iteration
// diverge. At a fixed point lambda_x = d / rho and lambda_y = pi / rho, where
// d and pi are the reduced costs and row duals of an optimal basis.

#ifndef NEUROMIP_ADMM_HPP_
#define NEUROMIP_ADMM_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "neuromip/lp.hpp"

namespace neuromip {

enum class LinearSystemMode : std::uint8_t { kDirectLdl, kIndirectCg };

struct AdmmConfig {
  double rho = 1.0;
  int max_iters = 100;
  double eps_primal = 1e-4;
  double eps_dual = 1e-4;
  LinearSystemMode linear_system_mode = LinearSystemMode::kDirectLdl;
  double cg_tol = 1e-10;
  int cg_max_iters = 1000;
  // Advance batch columns on OpenMP threads; results do not depend on it.
  bool parallel = true;

  void validate() const;
};

struct AdmmState {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> x_tilde;
  std::vector<double> y_tilde;
  // lambda_x followed by lambda_y.
  std::vector<double> lambda;

  static AdmmState zeros(int num_vars, int num_cons);
  // Fixed point of the iteration built from an exact primal-dual optimum.
  static AdmmState from_optimum(const LpProblem& problem, const LpSolution& exact,
                                double rho);

  std::span<double> lambda_x() { return {lambda.data(), x.size()}; }
  std::span<double> lambda_y() { return {lambda.data() + x.size(), y.size()}; }
  std::span<const double> lambda_x() const { return {lambda.data(), x.size()}; }
  std::span<const double> lambda_y() const { return {lambda.data() + x.size(), y.size()}; }

  friend bool operator==(const AdmmState&, const AdmmState&) = default;
};

// Reusable solver for [[I, A^T], [A, -I]] v = r.
class KktFactor {
 public:
  KktFactor(const CsrMatrix& matrix, double rho, LinearSystemMode mode,
            double cg_tol = 1e-10, int cg_max_iters = 1000);
  ~KktFactor();
  KktFactor(KktFactor&&) noexcept;
  KktFactor& operator=(KktFactor&&) noexcept;
  KktFactor(const KktFactor&) = delete;
  KktFactor& operator=(const KktFactor&) = delete;

  int num_vars() const { return n_; }
  int num_cons() const { return m_; }
  int size() const { return n_ + m_; }
  double rho() const { return rho_; }
  LinearSystemMode mode() const { return mode_; }

  // In-place solve of one right-hand side. Returns false if conjugate
  // gradients did not reach cg_tol (indirect mode only).
  bool solve(std::span<double> rhs) const;
  // In-place solve of `cols` right-hand sides stored row-major with leading
  // dimension `ld` (entry (i, b) at block[i * ld + b]). Each column is
  // processed with exactly the arithmetic of solve(). `column_ok`, when
  // given, receives one flag per column.
  bool solve_block(double* block, int cols, int ld, bool parallel = true,
                   char* column_ok = nullptr) const;

  // Number of nonzeros in the LDL^T factor (direct mode).
  long factor_nnz() const;

 private:
  struct Direct;
  int n_;
  int m_;
  double rho_;
  LinearSystemMode mode_;
  double cg_tol_;
  int cg_max_iters_;
  CsrMatrix a_;
  CsrMatrix at_;
  std::unique_ptr<Direct> direct_;

  bool cg_solve(std::span<double> rhs) const;
};

KktFactor factorize(const CsrMatrix& matrix, double rho,
                    LinearSystemMode mode = LinearSystemMode::kDirectLdl);

// One iteration; `factor` must come from problem.matrix and config.rho.
AdmmState admm_step(const LpProblem& problem, const AdmmState& state,
                    const KktFactor& factor, const AdmmConfig& config);

// Runs iterations until both residuals are within tolerance or max_iters.
// Reported x is the projected iterate x~. `final_state`, when given,
// receives the last iterate.
LpSolution admm_solve(const LpProblem& problem, const AdmmConfig& config,
                      const std::optional<AdmmState>& warm = std::nullopt,
                      const KktFactor* factor = nullptr,
                      AdmmState* final_state = nullptr);

struct BoundOverride {
  int var_index = 0;
  double new_lb = 0.0;
  double new_ub = 0.0;
};

// Solves every bound variant of `base` in lockstep using one factorization.
// The k-th result is bit-identical to admm_solve on the k-th variant in
// direct mode.
std::vector<LpSolution> admm_solve_batch(const LpProblem& base,
                                         std::span<const BoundOverride> variants,
                                         const AdmmConfig& config,
                                         const std::optional<AdmmState>& shared_warm = std::nullopt,
                                         const KktFactor* factor = nullptr);

// n * t_single / t_batch with fixed costs already subtracted by the caller.
double speedup_factor(int n_lps, double t_single, double t_batch);

}  // namespace neuromip

#endif  // NEUROMIP_ADMM_HPP_
