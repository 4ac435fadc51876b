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

// Graph-network test helpers: random instances with general integers,
// joint permutations, and a central finite-difference gradient oracle.

#ifndef NEUROMIP_TESTS_GCN_UTIL_HPP_
#define NEUROMIP_TESTS_GCN_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "neuromip/gcn.hpp"

namespace neuromip::testing {

inline MipInstance random_mixed_mip(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> coef(-4, 4);
  MipBuilder b("mixed");
  for (int i = 0; i < n; ++i) {
    const double r = unit(rng);
    const double c = coef(rng);
    if (r < 0.4) {
      b.add_var(0.0, 1.0, c, VarKind::kBinary);
    } else if (r < 0.7) {
      b.add_var(-1.0, 1.0 + std::floor(6.0 * unit(rng)), c, VarKind::kInteger);
    } else {
      b.add_var(0.0, r < 0.85 ? kInf : 3.5, c);
    }
  }
  for (int j = 0; j < m; ++j) {
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < n; ++i) {
      if (unit(rng) < 0.4) {
        const int v = coef(rng);
        if (v != 0) row.emplace_back(i, v);
      }
    }
    if (row.empty()) row.emplace_back(static_cast<int>(rng() % n), 1.0);
    const double lo = unit(rng) < 0.5 ? -kInf : -2.0;
    b.add_row(lo, 5.0 + std::floor(5.0 * unit(rng)), row);
  }
  return b.build();
}

inline std::vector<double> random_point(std::mt19937_64& rng, const MipInstance& mip) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(mip.num_vars);
  for (int i = 0; i < mip.num_vars; ++i) {
    const double hi = std::isfinite(mip.var_upper[i]) ? mip.var_upper[i] : mip.var_lower[i] + 4.0;
    x[i] = mip.var_lower[i] + (hi - mip.var_lower[i]) * unit(rng);
  }
  return x;
}

// New variable i' = var_perm[i], new constraint j' = con_perm[j].
inline MipInstance permute_instance(const MipInstance& mip, const std::vector<int>& var_perm,
                                    const std::vector<int>& con_perm) {
  MipInstance out = mip;
  for (int i = 0; i < mip.num_vars; ++i) {
    const int k = var_perm[i];
    out.objective[k] = mip.objective[i];
    out.var_lower[k] = mip.var_lower[i];
    out.var_upper[k] = mip.var_upper[i];
    out.var_kind[k] = mip.var_kind[i];
    if (!mip.var_names.empty()) out.var_names[k] = mip.var_names[i];
  }
  for (int j = 0; j < mip.num_cons; ++j) {
    const int k = con_perm[j];
    out.row_lower[k] = mip.row_lower[j];
    out.row_upper[k] = mip.row_upper[j];
    if (!mip.con_names.empty()) out.con_names[k] = mip.con_names[j];
  }
  for (auto& e : out.entries) {
    e.row = con_perm[e.row];
    e.col = var_perm[e.col];
  }
  // Same entry set written in a fresh order exercises order independence.
  std::sort(out.entries.begin(), out.entries.end(), [](const SparseEntry& a, const SparseEntry& b) {
    return a.row != b.row ? a.row > b.row : a.col > b.col;
  });
  return out;
}

inline std::vector<int> random_permutation(std::mt19937_64& rng, int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

inline TrainingExample branching_example(const BipartiteGraph& g, std::mt19937_64& rng) {
  TrainingExample ex;
  ex.kind = ExampleKind::kBranching;
  ex.graph = g;
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  double total = 0.0;
  for (int i = 0; i < g.n_var; ++i) {
    if (i % 3 != 2 || ex.candidates.empty()) {
      ex.candidates.push_back(i);
      ex.expert.push_back(unit(rng));
      total += ex.expert.back();
    }
  }
  for (double& p : ex.expert) p /= total;
  return ex;
}

inline TrainingExample diving_example(const MipInstance& mip, const BipartiteGraph& g,
                                      std::mt19937_64& rng) {
  TrainingExample ex;
  ex.kind = ExampleKind::kDiving;
  ex.graph = g;
  ex.weight = 0.7;
  for (int i = 0; i < mip.num_vars; ++i) {
    if (!mip.is_integer(i)) continue;
    ex.int_vars.push_back(i);
    ex.is_binary.push_back(mip.var_kind[i] == VarKind::kBinary);
    ex.lower.push_back(mip.var_lower[i]);
    ex.upper.push_back(mip.var_upper[i]);
    std::uniform_int_distribution<int> v(static_cast<int>(mip.var_lower[i]),
                                         static_cast<int>(mip.var_upper[i]));
    ex.values.push_back(v(rng));
  }
  return ex;
}

// Sign pattern of every ReLU input touched by the loss of `ex`.
inline std::vector<char> relu_pattern(const GcnModel& model, const TrainingExample& ex,
                                      const LossConfig& cfg) {
  const ForwardCache cache = forward(model, ex.graph, false);
  std::vector<char> pat;
  for (const auto& l : cache.layers) {
    for (double v : l.pre) pat.push_back(v > 1e-9 ? 1 : (v < -1e-9 ? 0 : 2));
  }
  std::vector<HeadQuery> q;
  std::vector<const Mlp*> heads;
  if (cfg.kind == LossKind::kBranching) {
    for (int c : ex.candidates) q.push_back({c, 0.0});
    heads = {&model.branching_head};
  } else {
    for (const auto& u : diving_units(ex, cfg.bit_budget)) q.push_back({u.var, u.bit});
    heads = {&model.diving_head, &model.selective_head};
  }
  for (const Mlp* h : heads) {
    const int in = h->first.in;
    for (const auto& qq : q) {
      auto row = cache.row(qq.node);
      for (int o = 0; o < h->first.out; ++o) {
        double acc = h->first.bias[o];
        for (int i = 0; i < cache.width; ++i) acc += h->first.weight[o * in + i] * row[i];
        if (in == cache.width + 1) acc += h->first.weight[o * in + cache.width] * qq.bit;
        pat.push_back(acc > 1e-9 ? 1 : (acc < -1e-9 ? 0 : 2));
      }
    }
  }
  return pat;
}

struct GradCheck {
  std::map<std::string, double> group_error;  // max relative error per group
  double max_error = 0.0;
  long checked = 0;
  long kink_skipped = 0;
};

// |g - fd| / max(|g|, |fd|, floor). A parameter whose perturbation crosses a
// ReLU kink at every step size tried is counted in kink_skipped.
inline GradCheck finite_difference_check(const GcnModel& model, const TrainingExample& ex,
                                         const LossConfig& cfg, double h = 1e-4,
                                         double floor = 1e-6) {
  GcnModel grad = model.zeros_like();
  example_loss(model, ex, cfg, &grad, false);
  GcnModel probe = model;
  const auto base_pattern = relu_pattern(model, ex, cfg);
  auto params = probe.parameters();
  auto grads = grad.parameters();
  GradCheck out;
  for (std::size_t g = 0; g < params.size(); ++g) {
    double worst = 0.0;
    auto& vals = *params[g].values;
    for (std::size_t k = 0; k < vals.size(); ++k) {
      const double orig = vals[k];
      double step = h;
      bool ok = false;
      double fd = 0.0;
      for (int attempt = 0; attempt < 4 && !ok; ++attempt, step /= 10.0) {
        vals[k] = orig + step;
        const bool same_up = relu_pattern(probe, ex, cfg) == base_pattern;
        const double lp = example_loss(probe, ex, cfg, nullptr, false);
        vals[k] = orig - step;
        const bool same_dn = relu_pattern(probe, ex, cfg) == base_pattern;
        const double lm = example_loss(probe, ex, cfg, nullptr, false);
        vals[k] = orig;
        fd = (lp - lm) / (2.0 * step);
        ok = same_up && same_dn;
      }
      if (!ok) {
        ++out.kink_skipped;
        continue;
      }
      const double an = (*grads[g].values)[k];
      const double err = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), floor});
      worst = std::max(worst, err);
      ++out.checked;
    }
    out.group_error[params[g].name] = std::max(out.group_error[params[g].name], worst);
    out.max_error = std::max(out.max_error, worst);
  }
  return out;
}

}  // namespace neuromip::testing

#endif  // NEUROMIP_TESTS_GCN_UTIL_HPP_
