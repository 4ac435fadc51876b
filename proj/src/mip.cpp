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

#include "neuromip/mip.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "neuromip/lp.hpp"

namespace neuromip {

const char* to_string(VarKind kind) {
  switch (kind) {
    case VarKind::kContinuous: return "continuous";
    case VarKind::kInteger: return "integer";
    case VarKind::kBinary: return "binary";
  }
  return "continuous";
}

VarKind var_kind_from_string(const std::string& s) {
  if (s == "continuous") return VarKind::kContinuous;
  if (s == "integer") return VarKind::kInteger;
  if (s == "binary") return VarKind::kBinary;
  throw DataError("unknown variable kind '" + s + "'");
}

CsrMatrix CsrMatrix::from_entries(int rows, int cols,
                                  std::span<const SparseEntry> entries) {
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
      throw DataError("matrix entry out of range");
    }
    ++m.row_ptr[e.row + 1];
  }
  std::partial_sum(m.row_ptr.begin(), m.row_ptr.end(), m.row_ptr.begin());
  std::vector<int> fill(m.row_ptr.begin(), m.row_ptr.end() - 1);
  m.col_idx.resize(entries.size());
  m.values.resize(entries.size());
  for (const auto& e : entries) {
    const int p = fill[e.row]++;
    m.col_idx[p] = e.col;
    m.values[p] = e.value;
  }
  for (int r = 0; r < rows; ++r) {
    std::vector<std::pair<int, double>> row;
    for (int p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p) {
      row.emplace_back(m.col_idx[p], m.values[p]);
    }
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < row.size(); ++k) {
      m.col_idx[m.row_ptr[r] + k] = row[k].first;
      m.values[m.row_ptr[r] + k] = row[k].second;
    }
  }
  return m;
}

CsrMatrix CsrMatrix::transposed() const {
  std::vector<SparseEntry> t;
  t.reserve(values.size());
  for (int r = 0; r < rows; ++r) {
    for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      t.push_back({col_idx[p], r, values[p]});
    }
  }
  return from_entries(cols, rows, t);
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p) acc += values[p] * x[col_idx[p]];
    y[r] = acc;
  }
}

void CsrMatrix::multiply_transposed(std::span<const double> x,
                                    std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p) y[col_idx[p]] += values[p] * x[r];
  }
}

std::vector<int> MipInstance::integer_set() const {
  std::vector<int> out;
  for (int i = 0; i < num_vars; ++i) {
    if (is_integer(i)) out.push_back(i);
  }
  return out;
}

bool MipInstance::pure_integer() const {
  return std::all_of(var_kind.begin(), var_kind.end(),
                     [](VarKind k) { return k != VarKind::kContinuous; });
}

int MipBuilder::add_var(double lower, double upper, double cost, VarKind kind,
                        std::string name) {
  const int id = mip_.num_vars++;
  mip_.var_lower.push_back(lower);
  mip_.var_upper.push_back(upper);
  mip_.objective.push_back(cost);
  mip_.var_kind.push_back(kind);
  mip_.var_names.push_back(name.empty() ? "x" + std::to_string(id) : std::move(name));
  return id;
}

int MipBuilder::add_row(double lower, double upper,
                        std::span<const std::pair<int, double>> coeffs,
                        std::string name) {
  const int id = mip_.num_cons++;
  mip_.row_lower.push_back(lower);
  mip_.row_upper.push_back(upper);
  for (const auto& [col, value] : coeffs) mip_.entries.push_back({id, col, value});
  mip_.con_names.push_back(name.empty() ? "c" + std::to_string(id) : std::move(name));
  return id;
}

ValidationReport validate(const MipInstance& mip) {
  ValidationReport report;
  auto add = [&](std::string msg) { report.violations.push_back(std::move(msg)); };
  const auto n = static_cast<std::size_t>(mip.num_vars);
  const auto m = static_cast<std::size_t>(mip.num_cons);
  if (mip.objective.size() != n || mip.var_lower.size() != n ||
      mip.var_upper.size() != n || mip.var_kind.size() != n) {
    add("variable vector length mismatch");
    return report;
  }
  if (mip.row_lower.size() != m || mip.row_upper.size() != m) {
    add("row vector length mismatch");
    return report;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(mip.var_lower[i]) || std::isnan(mip.var_upper[i]) ||
        !std::isfinite(mip.objective[i])) {
      add("non-numeric data var " + std::to_string(i));
    }
    if (mip.var_lower[i] > mip.var_upper[i]) add("bound order var " + std::to_string(i));
    if (mip.var_kind[i] == VarKind::kBinary &&
        (mip.var_lower[i] < 0.0 || mip.var_upper[i] > 1.0)) {
      add("binary bound var " + std::to_string(i));
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (mip.row_lower[j] > mip.row_upper[j]) add("row bound order row " + std::to_string(j));
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& e : mip.entries) {
    if (e.row < 0 || e.row >= mip.num_cons || e.col < 0 || e.col >= mip.num_vars) {
      add("entry out of range (" + std::to_string(e.row) + "," + std::to_string(e.col) + ")");
      continue;
    }
    if (!std::isfinite(e.value)) add("non-finite coefficient");
    if (!seen.emplace(e.row, e.col).second) {
      add("duplicate entry (" + std::to_string(e.row) + "," + std::to_string(e.col) + ")");
    }
  }
  return report;
}

namespace {

void require_dim(const MipInstance& mip, std::size_t size) {
  if (size != static_cast<std::size_t>(mip.num_vars)) {
    throw std::invalid_argument("assignment has " + std::to_string(size) +
                                " values, instance has " +
                                std::to_string(mip.num_vars) + " variables");
  }
}

}  // namespace

bool check_feasible(const MipInstance& mip, std::span<const double> x,
                    double feas_tol, double int_tol) {
  require_dim(mip, x.size());
  for (int i = 0; i < mip.num_vars; ++i) {
    if (!std::isfinite(x[i])) return false;
    if (x[i] < mip.var_lower[i] - feas_tol || x[i] > mip.var_upper[i] + feas_tol) return false;
    if (mip.is_integer(i) && std::abs(x[i] - std::round(x[i])) > int_tol) return false;
  }
  std::vector<double> activity(mip.num_cons, 0.0);
  for (const auto& e : mip.entries) activity[e.row] += e.value * x[e.col];
  for (int j = 0; j < mip.num_cons; ++j) {
    if (activity[j] < mip.row_lower[j] - feas_tol ||
        activity[j] > mip.row_upper[j] + feas_tol) {
      return false;
    }
  }
  return true;
}

double objective_value(const MipInstance& mip, std::span<const double> x) {
  require_dim(mip, x.size());
  double acc = 0.0;
  for (int i = 0; i < mip.num_vars; ++i) acc += mip.objective[i] * x[i];
  return acc + mip.objective_offset;
}

double energy(const MipInstance& mip, const std::map<int, double>& x_int,
              LpBackend backend) {
  for (int i : mip.integer_set()) {
    if (!x_int.contains(i)) {
      throw std::invalid_argument("energy: integer variable " + std::to_string(i) +
                                  " is unassigned");
    }
  }
  if (mip.pure_integer()) {
    std::vector<double> x(mip.num_vars, 0.0);
    for (const auto& [i, v] : x_int) x[i] = v;
    return check_feasible(mip, x) ? objective_value(mip, x) : kInf;
  }
  // Integrality and bounds of the fixed part are checked before the LP.
  std::vector<double> lower = mip.var_lower;
  std::vector<double> upper = mip.var_upper;
  for (const auto& [i, v] : x_int) {
    if (v < mip.var_lower[i] - kDefaultFeasTol || v > mip.var_upper[i] + kDefaultFeasTol ||
        std::abs(v - std::round(v)) > kDefaultIntTol) {
      return kInf;
    }
    lower[i] = upper[i] = v;
  }
  const LpProblem lp = LpProblem::from_mip(mip).with_bounds(lower, upper);
  const LpSolution sol = backend ? backend(lp) : exact_lp_oracle(lp);
  switch (sol.status) {
    case LpStatus::kOptimal:
    case LpStatus::kConverged:
      return sol.objective + mip.objective_offset;
    case LpStatus::kInfeasible:
      return kInf;
    case LpStatus::kUnbounded:
      return -kInf;
    default:
      throw LpBackendError(std::string("energy: LP backend returned status ") +
                           to_string(sol.status));
  }
}

void check_submip(const MipInstance& mip, const SubMipSpec& spec) {
  for (const auto& [i, v] : spec.fixings) {
    if (i < 0 || i >= mip.num_vars) throw DataError("fixing index out of range");
    if (spec.tightenings.contains(i)) {
      throw DataError("variable " + std::to_string(i) + " both fixed and tightened");
    }
    if (v < mip.var_lower[i] || v > mip.var_upper[i]) {
      throw DataError("fixing of var " + std::to_string(i) + " violates its bounds");
    }
    if (mip.is_integer(i) && v != std::round(v)) {
      throw DataError("fixing of var " + std::to_string(i) + " is not integral");
    }
  }
  for (const auto& [i, b] : spec.tightenings) {
    if (i < 0 || i >= mip.num_vars) throw DataError("tightening index out of range");
    if (b.first > b.second || b.first < mip.var_lower[i] || b.second > mip.var_upper[i]) {
      throw DataError("tightening of var " + std::to_string(i) +
                      " is not a sub-interval of its bounds");
    }
  }
}

MipInstance apply_submip(const MipInstance& mip, const SubMipSpec& spec) {
  check_submip(mip, spec);
  MipInstance out = mip;
  for (const auto& [i, v] : spec.fixings) out.var_lower[i] = out.var_upper[i] = v;
  for (const auto& [i, b] : spec.tightenings) {
    out.var_lower[i] = b.first;
    out.var_upper[i] = b.second;
  }
  return out;
}

double canonical_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

}  // namespace neuromip
