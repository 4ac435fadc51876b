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

// Bipartite variable/constraint graph of a MIP or a branch-and-bound node.
//
// Feature layout (12 slots per node). Variable node i:
//   0  slog((c_i / ||c||) / ||column i||), column of the row-normalized
//      matrix; c_i / ||c|| for an empty column
//   1  continuous flag      2  general-integer flag   3  binary flag
//   4  lower bound finite   5  slog(lower) or 0
//   6  upper bound finite   7  slog(upper) or 0
//   8  slog(LP value)       9  LP value - floor(LP value)
//   10 1 (variable)         11 0
// Constraint node j (row a_j):
//   0  cos(a_j, c)
//   1  b_l finite           2  slog(b_l / ||a_j||) or 0
//   3  b_u finite           4  slog(b_u / ||a_j||) or 0
//   5  log1p(||a_j||)
//   6  slog(a_j x / ||a_j||)  7  1 if a_j x is at a finite side, else 0
//   8, 9, 10 0              11 1 (constraint)
// slog(v) = sign(v) log1p(|v|). LP slots are zero when no LP solution is
// supplied. Node order: variables 0..n-1, then constraints 0..m-1.
// Adjacency: entry (var i, cons j) = a_ji / ||a_j||, diagonal 1, symmetric.

#ifndef NEUROMIP_GRAPH_HPP_
#define NEUROMIP_GRAPH_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "neuromip/mip.hpp"

namespace neuromip {

inline constexpr int kFeatureDim = 12;
inline constexpr const char* kFeatureSchema = "bipartite-v1";
// Relative tolerance of the constraint tightness flag.
inline constexpr double kTightTol = 1e-6;

struct BipartiteGraph {
  int n_var = 0;
  int n_cons = 0;
  int dim = kFeatureDim;
  // Row-major (n_var + n_cons) x dim.
  std::vector<double> features;
  CsrMatrix adjacency;
  bool has_lp_features = false;
  std::string schema = kFeatureSchema;

  int num_nodes() const { return n_var + n_cons; }
  double feature(int node, int slot) const { return features[node * dim + slot]; }

  friend bool operator==(const BipartiteGraph& a, const BipartiteGraph& b) {
    return a.n_var == b.n_var && a.n_cons == b.n_cons && a.dim == b.dim &&
           a.features == b.features && a.adjacency.row_ptr == b.adjacency.row_ptr &&
           a.adjacency.col_idx == b.adjacency.col_idx &&
           a.adjacency.values == b.adjacency.values &&
           a.has_lp_features == b.has_lp_features && a.schema == b.schema;
  }
};

// Encodes the instance with its own bounds.
BipartiteGraph encode(const MipInstance& instance,
                      std::optional<std::span<const double>> lp_x = std::nullopt);

// Encodes a branch-and-bound node: same instance with local bounds.
BipartiteGraph encode(const MipInstance& instance, std::span<const double> lower,
                      std::span<const double> upper,
                      std::optional<std::span<const double>> lp_x);

nlohmann::json to_json(const BipartiteGraph& graph);
BipartiteGraph graph_from_json(const nlohmann::json& doc);

}  // namespace neuromip

#endif  // NEUROMIP_GRAPH_HPP_
