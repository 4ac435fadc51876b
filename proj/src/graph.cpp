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

#include "neuromip/graph.hpp"

#include <cmath>
#include <stdexcept>

#include "neuromip/mps_io.hpp"

namespace neuromip {

namespace {

double slog(double v) { return std::copysign(std::log1p(std::abs(v)), v); }

// Sums are order-independent so that permuting the instance permutes the
// features exactly.
double norm2(const std::vector<double>& v) {
  std::vector<double> sq;
  sq.reserve(v.size());
  for (double x : v) sq.push_back(x * x);
  return std::sqrt(canonical_sum(std::move(sq)));
}

}  // namespace

BipartiteGraph encode(const MipInstance& instance,
                      std::optional<std::span<const double>> lp_x) {
  return encode(instance, instance.var_lower, instance.var_upper, lp_x);
}

BipartiteGraph encode(const MipInstance& instance, std::span<const double> lower,
                      std::span<const double> upper,
                      std::optional<std::span<const double>> lp_x) {
  const int n = instance.num_vars;
  const int m = instance.num_cons;
  if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n ||
      (lp_x && static_cast<int>(lp_x->size()) != n)) {
    throw std::invalid_argument("encode: vector length does not match the instance");
  }
  BipartiteGraph g;
  g.n_var = n;
  g.n_cons = m;
  g.has_lp_features = lp_x.has_value();
  g.features.assign(static_cast<std::size_t>(n + m) * kFeatureDim, 0.0);
  const CsrMatrix a = instance.matrix();

  const double c_norm = norm2(instance.objective);
  // Objective per unit column norm of the row-normalized matrix.
  std::vector<std::vector<double>> col_sq(n);
  for (int j = 0; j < m; ++j) {
    std::vector<double> vals(a.values.begin() + a.row_ptr[j], a.values.begin() + a.row_ptr[j + 1]);
    const double rn = norm2(vals);
    if (rn == 0.0) continue;
    for (int p = a.row_ptr[j]; p < a.row_ptr[j + 1]; ++p) {
      const double v = a.values[p] / rn;
      col_sq[a.col_idx[p]].push_back(v * v);
    }
  }
  for (int i = 0; i < n; ++i) {
    double* f = &g.features[static_cast<std::size_t>(i) * kFeatureDim];
    const double cn = std::sqrt(canonical_sum(std::move(col_sq[i])));
    const double ci = c_norm > 0.0 ? instance.objective[i] / c_norm : 0.0;
    f[0] = cn > 0.0 ? slog(ci / cn) : ci;
    f[1] = instance.var_kind[i] == VarKind::kContinuous ? 1.0 : 0.0;
    f[2] = instance.var_kind[i] == VarKind::kInteger ? 1.0 : 0.0;
    f[3] = instance.var_kind[i] == VarKind::kBinary ? 1.0 : 0.0;
    if (std::isfinite(lower[i])) {
      f[4] = 1.0;
      f[5] = slog(lower[i]);
    }
    if (std::isfinite(upper[i])) {
      f[6] = 1.0;
      f[7] = slog(upper[i]);
    }
    if (lp_x) {
      const double v = (*lp_x)[i];
      f[8] = slog(v);
      f[9] = v - std::floor(v);
    }
    f[10] = 1.0;
  }

  std::vector<double> row_norm(m, 0.0);
  for (int j = 0; j < m; ++j) {
    std::vector<double> vals(a.values.begin() + a.row_ptr[j], a.values.begin() + a.row_ptr[j + 1]);
    row_norm[j] = norm2(vals);
    std::vector<double> dots;
    for (int p = a.row_ptr[j]; p < a.row_ptr[j + 1]; ++p) {
      dots.push_back(a.values[p] * instance.objective[a.col_idx[p]]);
    }
    const double dot = canonical_sum(std::move(dots));
    double* f = &g.features[static_cast<std::size_t>(n + j) * kFeatureDim];
    const double rn = row_norm[j];
    f[0] = rn > 0.0 && c_norm > 0.0 ? dot / (rn * c_norm) : 0.0;
    if (std::isfinite(instance.row_lower[j])) {
      f[1] = 1.0;
      f[2] = rn > 0.0 ? slog(instance.row_lower[j] / rn) : 0.0;
    }
    if (std::isfinite(instance.row_upper[j])) {
      f[3] = 1.0;
      f[4] = rn > 0.0 ? slog(instance.row_upper[j] / rn) : 0.0;
    }
    f[5] = std::log1p(rn);
    if (lp_x) {
      std::vector<double> terms;
      for (int p = a.row_ptr[j]; p < a.row_ptr[j + 1]; ++p) {
        terms.push_back(a.values[p] * (*lp_x)[a.col_idx[p]]);
      }
      const double act = canonical_sum(std::move(terms));
      f[6] = rn > 0.0 ? slog(act / rn) : 0.0;
      const double lo = instance.row_lower[j], hi = instance.row_upper[j];
      const bool tight = (std::isfinite(lo) && act - lo <= kTightTol * std::max(1.0, std::abs(lo))) ||
                         (std::isfinite(hi) && hi - act <= kTightTol * std::max(1.0, std::abs(hi)));
      f[7] = tight ? 1.0 : 0.0;
    }
    f[11] = 1.0;
  }

  std::vector<SparseEntry> adj;
  adj.reserve(n + m + 2 * a.nnz());
  for (int k = 0; k < n + m; ++k) adj.push_back({k, k, 1.0});
  for (int j = 0; j < m; ++j) {
    for (int p = a.row_ptr[j]; p < a.row_ptr[j + 1]; ++p) {
      const double v = row_norm[j] > 0.0 ? a.values[p] / row_norm[j] : 0.0;
      adj.push_back({a.col_idx[p], n + j, v});
      adj.push_back({n + j, a.col_idx[p], v});
    }
  }
  g.adjacency = CsrMatrix::from_entries(n + m, n + m, adj);
  return g;
}

nlohmann::json to_json(const BipartiteGraph& g) {
  nlohmann::json doc;
  doc["schema"] = g.schema;
  doc["n_var"] = g.n_var;
  doc["n_cons"] = g.n_cons;
  doc["dim"] = g.dim;
  doc["has_lp_features"] = g.has_lp_features;
  doc["features"] = g.features;
  doc["adj_row_ptr"] = g.adjacency.row_ptr;
  doc["adj_col_idx"] = g.adjacency.col_idx;
  doc["adj_values"] = g.adjacency.values;
  return doc;
}

BipartiteGraph graph_from_json(const nlohmann::json& doc) {
  try {
    BipartiteGraph g;
    g.schema = doc.at("schema").get<std::string>();
    g.n_var = doc.at("n_var").get<int>();
    g.n_cons = doc.at("n_cons").get<int>();
    g.dim = doc.at("dim").get<int>();
    g.has_lp_features = doc.at("has_lp_features").get<bool>();
    g.features = doc.at("features").get<std::vector<double>>();
    g.adjacency.rows = g.adjacency.cols = g.num_nodes();
    g.adjacency.row_ptr = doc.at("adj_row_ptr").get<std::vector<int>>();
    g.adjacency.col_idx = doc.at("adj_col_idx").get<std::vector<int>>();
    g.adjacency.values = doc.at("adj_values").get<std::vector<double>>();
    if (g.schema != kFeatureSchema || g.dim != kFeatureDim) {
      throw DataError("graph feature schema mismatch: '" + g.schema + "'");
    }
    if (static_cast<int>(g.features.size()) != g.num_nodes() * g.dim ||
        static_cast<int>(g.adjacency.row_ptr.size()) != g.num_nodes() + 1) {
      throw DataError("graph arrays have inconsistent sizes");
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed graph record: ") + e.what());
  }
}

}  // namespace neuromip
