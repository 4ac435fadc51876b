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

#ifndef NEUROMIP_MIP_HPP_
#define NEUROMIP_MIP_HPP_

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace neuromip {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultFeasTol = 1e-6;
inline constexpr double kDefaultIntTol = 1e-6;

// Raised for malformed or inconsistent input data (exit code 2 in the CLI).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class VarKind : std::uint8_t { kContinuous, kInteger, kBinary };

const char* to_string(VarKind kind);
VarKind var_kind_from_string(const std::string& s);

struct SparseEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Compressed row storage built from coordinate entries. Entries inside a row
// are sorted by column.
struct CsrMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<double> values;

  static CsrMatrix from_entries(int rows, int cols,
                                std::span<const SparseEntry> entries);
  CsrMatrix transposed() const;
  int nnz() const { return static_cast<int>(values.size()); }

  // y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  // y = A^T x
  void multiply_transposed(std::span<const double> x, std::span<double> y) const;
};

// Canonical MIP:
//   minimize    c^T x + objective_offset
//   subject to  row_lower <= A x <= row_upper
//               var_lower <= x <= var_upper
//               x_i integral for var_kind[i] != kContinuous
struct MipInstance {
  std::string name;
  int num_vars = 0;
  int num_cons = 0;
  std::vector<double> objective;
  double objective_offset = 0.0;
  std::vector<SparseEntry> entries;
  std::vector<double> row_lower;
  std::vector<double> row_upper;
  std::vector<double> var_lower;
  std::vector<double> var_upper;
  std::vector<VarKind> var_kind;
  std::vector<std::string> var_names;
  std::vector<std::string> con_names;

  bool is_integer(int i) const { return var_kind[i] != VarKind::kContinuous; }
  std::vector<int> integer_set() const;
  bool pure_integer() const;
  CsrMatrix matrix() const { return CsrMatrix::from_entries(num_cons, num_vars, entries); }

  friend bool operator==(const MipInstance&, const MipInstance&) = default;
};

// Incremental builder used by the generators and tests.
class MipBuilder {
 public:
  explicit MipBuilder(std::string name = "mip") { mip_.name = std::move(name); }

  int add_var(double lower, double upper, double cost,
              VarKind kind = VarKind::kContinuous, std::string name = {});
  int add_row(double lower, double upper,
              std::span<const std::pair<int, double>> coeffs, std::string name = {});
  int add_row(double lower, double upper,
              std::initializer_list<std::pair<int, double>> coeffs, std::string name = {}) {
    std::vector<std::pair<int, double>> v(coeffs);
    return add_row(lower, upper, v, std::move(name));
  }
  void set_offset(double offset) { mip_.objective_offset = offset; }
  MipInstance build() const { return mip_; }

 private:
  MipInstance mip_;
};

enum class Feasibility : std::uint8_t { kUnknown, kYes, kNo };

struct Assignment {
  std::vector<double> values;
  std::optional<double> objective;
  Feasibility feasible = Feasibility::kUnknown;
};

struct SubMipSpec {
  std::map<int, double> fixings;
  std::map<int, std::pair<double, double>> tightenings;

  bool empty() const { return fixings.empty() && tightenings.empty(); }
  friend bool operator==(const SubMipSpec&, const SubMipSpec&) = default;
  friend auto operator<=>(const SubMipSpec&, const SubMipSpec&) = default;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const MipInstance& instance);

bool check_feasible(const MipInstance& instance, std::span<const double> x,
                    double feas_tol = kDefaultFeasTol,
                    double int_tol = kDefaultIntTol);

double objective_value(const MipInstance& instance, std::span<const double> x);

// Thrown by energy() when the continuous completion LP cannot be decided.
class LpBackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LpProblem;
struct LpSolution;

// LP backend signature shared by the energy evaluation and branch-and-bound.
using LpBackend = LpSolution (*)(const LpProblem&);

// E(x; M): objective of the best completion of the integer part, +inf when
// infeasible. `x_int` maps every integer index to its value.
double energy(const MipInstance& instance, const std::map<int, double>& x_int,
              LpBackend backend = nullptr);

// Checks a sub-MIP spec against the instance; throws DataError on violation.
void check_submip(const MipInstance& instance, const SubMipSpec& spec);

MipInstance apply_submip(const MipInstance& instance, const SubMipSpec& spec);

// Sum whose result does not depend on the order of `terms`.
double canonical_sum(std::vector<double> terms);

}  // namespace neuromip

#endif  // NEUROMIP_MIP_HPP_
