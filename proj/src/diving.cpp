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

#include "neuromip/diving.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "neuromip/mps_io.hpp"

namespace neuromip {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

// Decisions needed to pin an integer in [lo, hi] by halving.
int bits_needed(double lo, double hi) {
  int k = 0;
  for (double w = hi - lo; w > 0.0; w = std::floor(w / 2.0)) ++k;
  return k;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return mix_seed(a, b); }

struct Incumbent {
  double elapsed;
  int task;
  double objective;
  std::vector<double> x;
  long nodes;
};

// Solutions of one sub-solve that are feasible for the original instance,
// with the node count of the event that reported each.
std::vector<Incumbent> verified(const MipInstance& instance, const SolveResult& r, int task,
                                long node_base) {
  std::vector<Incumbent> out;
  for (const auto& s : r.solutions) {
    if (!check_feasible(instance, s.x)) continue;
    long nodes = r.node_count;
    for (const auto& e : r.event_log) {
      if (e.primal == s.objective) {
        nodes = e.nodes;
        break;
      }
    }
    out.push_back({s.elapsed, task, objective_value(instance, s.x), s.x, node_base + nodes});
  }
  return out;
}

void accept(SolveResult& r, const Incumbent& inc) {
  if (inc.objective >= r.primal_bound) return;
  r.primal_bound = inc.objective;
  Assignment a;
  a.values = inc.x;
  a.objective = inc.objective;
  a.feasible = Feasibility::kYes;
  r.incumbent = std::move(a);
  r.solutions.push_back({inc.objective, inc.x, inc.elapsed});
  r.event_log.push_back({inc.elapsed, r.primal_bound, r.dual_bound, inc.nodes});
}

}  // namespace

BipartiteGraph encode_for_diving(const MipInstance& instance) {
  const LpSolution lp = exact_lp_oracle(LpProblem::from_mip(instance));
  if (lp.solved()) return encode(instance, std::span<const double>(lp.x));
  return encode(instance);
}

std::vector<VariablePrediction> ModelPredictor::predict(const MipInstance& instance,
                                                        int bit_budget) const {
  const BipartiteGraph g = encode_for_diving(instance);
  const ForwardCache cache = forward(model_, g, false);
  std::vector<VariablePrediction> out;
  std::vector<HeadQuery> q;
  for (int i = 0; i < instance.num_vars; ++i) {
    if (!instance.is_integer(i)) continue;
    VariablePrediction p;
    p.var = i;
    p.binary = instance.var_kind[i] == VarKind::kBinary;
    int k = 1;
    if (!p.binary) {
      const double lo = std::ceil(instance.var_lower[i]);
      const double hi = std::floor(instance.var_upper[i]);
      if (!std::isfinite(lo) || !std::isfinite(hi)) continue;
      k = std::min(bit_budget, bits_needed(lo, hi));
    }
    for (int j = 0; j < k; ++j) q.push_back({i, p.binary ? 0.0 : bit_input(j, bit_budget)});
    p.mu.resize(k);
    p.select.resize(k);
    out.push_back(std::move(p));
  }
  const auto t = head_logits(model_, HeadKind::kDiving, cache, q);
  const auto s = head_logits(model_, HeadKind::kSelective, cache, q);
  std::size_t pos = 0;
  for (auto& p : out) {
    for (std::size_t j = 0; j < p.mu.size(); ++j, ++pos) {
      p.mu[j] = sigmoid(t[pos]);
      p.select[j] = sigmoid(s[pos]);
    }
  }
  return out;
}

std::vector<VariablePrediction> OraclePredictor::predict(const MipInstance& instance,
                                                         int bit_budget) const {
  if (static_cast<int>(x_.size()) != instance.num_vars) {
    throw std::invalid_argument("oracle assignment length does not match the instance");
  }
  std::vector<VariablePrediction> out;
  for (int i = 0; i < instance.num_vars; ++i) {
    if (!instance.is_integer(i)) continue;
    VariablePrediction p;
    p.var = i;
    p.binary = instance.var_kind[i] == VarKind::kBinary;
    if (p.binary) {
      p.mu = {x_[i] >= 0.5 ? 1.0 : 0.0};
    } else {
      const double lo = std::ceil(instance.var_lower[i]);
      const double hi = std::floor(instance.var_upper[i]);
      for (int b : integer_bits(std::round(x_[i]), lo, hi, bit_budget)) p.mu.push_back(b);
      if (p.mu.empty()) continue;
    }
    p.select.assign(p.mu.size(), coverage_);
    out.push_back(std::move(p));
  }
  return out;
}

SubMipSpec sample_partial_assignment(const MipInstance& instance,
                                     const std::vector<VariablePrediction>& predictions,
                                     std::uint64_t seed, const SampleOptions& options) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto value_bit = [&](double mu) {
    if (options.value_mode == ValueMode::kSample) return unit(rng) < mu ? 1 : 0;
    return std::round(mu) >= 1.0 ? 1 : 0;
  };
  SubMipSpec spec;
  for (const auto& p : predictions) {
    const int i = p.var;
    const double lb = std::ceil(instance.var_lower[i]);
    const double ub = std::floor(instance.var_upper[i]);
    if (p.binary) {
      if (p.mu.empty() || !(unit(rng) < p.select[0])) continue;
      const double v = std::clamp<double>(value_bit(p.mu[0]), lb, ub);
      spec.fixings[i] = v;
      continue;
    }
    // No midpoint walk on an unbounded domain.
    if (!std::isfinite(lb) || !std::isfinite(ub)) continue;
    double lo = lb, hi = ub;
    const int limit = std::min<int>(options.bit_budget, static_cast<int>(p.mu.size()));
    for (int j = 0; j < limit && hi > lo; ++j) {
      if (!(unit(rng) < p.select[j])) break;
      const double w = hi - lo;
      if (value_bit(p.mu[j]) == 1) {
        lo += std::ceil(w / 2.0);
      } else {
        hi = lo + std::floor(w / 2.0);
      }
    }
    if (lo == hi) {
      spec.fixings[i] = lo;
    } else if (lo != lb || hi != ub) {
      spec.tightenings[i] = {lo, hi};
    }
  }
  return spec;
}

SubMipSpec sample_partial_assignment(const DivingPredictor& predictor, const MipInstance& instance,
                                     std::uint64_t seed, const SampleOptions& options) {
  return sample_partial_assignment(instance, predictor.predict(instance, options.bit_budget), seed,
                                   options);
}

void DivingConfig::validate() const {
  if (max_submips < 1) throw std::invalid_argument("max_submips must be at least 1");
  if (samples_per_model < 1 || sub_seeds < 1) {
    throw std::invalid_argument("samples_per_model and sub_seeds must be at least 1");
  }
}

std::vector<SubMipSpec> generate_submips(const std::vector<const DivingPredictor*>& models,
                                         const MipInstance& instance, const DivingConfig& config) {
  config.validate();
  if (models.empty()) throw std::invalid_argument("generate_submips needs at least one model");
  std::vector<SubMipSpec> out;
  std::set<SubMipSpec> seen;
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto pred = models[k]->predict(instance, config.sample.bit_budget);
    for (int s = 0; s < config.sub_seeds; ++s) {
      for (int j = 0; j < config.samples_per_model; ++j) {
        if (static_cast<int>(out.size()) >= config.max_submips) return out;
        const std::uint64_t seed = mix(mix(mix(config.seed, k), s), j);
        SubMipSpec spec = sample_partial_assignment(instance, pred, seed, config.sample);
        if (seen.insert(spec).second) out.push_back(std::move(spec));
      }
    }
  }
  return out;
}

DiveResult dive_sequential(const MipInstance& instance, const std::vector<SubMipSpec>& specs,
                           const SolveLimits& limits, std::uint64_t seed,
                           const DiveOptions& options) {
  DiveResult out;
  SolveResult& r = out.result;
  if (specs.empty()) {
    auto policy = make_policy(options.policy);
    r = solve(instance, *policy, limits, seed, options.solve);
    r.policy = "dive:" + options.policy;
    return out;
  }
  const auto start = std::chrono::steady_clock::now();
  std::function<double()> elapsed = options.solve.clock;
  if (!elapsed) {
    elapsed = [start] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
  }
  const double base = options.solve.time_offset;
  r.policy = "dive:" + options.policy;
  r.status = SolveStatus::kLimit;

  out.order.resize(specs.size());
  std::iota(out.order.begin(), out.order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(out.order.begin(), out.order.end(), rng);

  const double t0 = elapsed();
  long nodes_left = limits.max_nodes;
  bool proven = false;
  for (std::size_t k = 0; k < out.order.size(); ++k) {
    const int idx = out.order[k];
    const double used = elapsed() - t0;
    const double time_left = limits.max_time - used;
    if (nodes_left <= 0 || time_left <= 0.0) {
      out.sub_objective.push_back(kInf);
      out.sub_error.push_back("budget exhausted");
      continue;
    }
    const long share = static_cast<long>(out.order.size() - k);
    SolveLimits sub_limits;
    sub_limits.max_nodes = nodes_left == std::numeric_limits<long>::max()
                               ? nodes_left
                               : std::max(1L, nodes_left / share);
    sub_limits.max_time = std::isfinite(time_left) ? time_left / share : kInf;
    const double sub_start = elapsed();
    SolveOptions so = options.solve;
    so.clock = [&elapsed, sub_start] { return elapsed() - sub_start; };
    so.time_offset = base + sub_start - t0;
    try {
      const MipInstance sub = apply_submip(instance, specs[idx]);
      auto policy = make_policy(options.policy);
      const SolveResult sr = solve(sub, *policy, sub_limits, mix(seed, idx), so);
      for (const auto& inc : verified(instance, sr, idx, r.node_count)) accept(r, inc);
      r.node_count += sr.node_count;
      if (nodes_left != std::numeric_limits<long>::max()) nodes_left -= sr.node_count;
      out.sub_objective.push_back(sr.primal_bound);
      out.sub_error.emplace_back();
      if (specs[idx].empty() && sr.status == SolveStatus::kOptimal) {
        proven = true;
        break;
      }
    } catch (const std::exception& e) {
      out.sub_objective.push_back(kInf);
      out.sub_error.emplace_back(e.what());
    }
  }
  out.order.resize(out.sub_objective.size());
  if (proven) {
    r.status = SolveStatus::kOptimal;
    r.dual_bound = r.primal_bound;
    r.event_log.push_back({base + elapsed() - t0, r.primal_bound, r.dual_bound, r.node_count});
  }
  r.elapsed = base + elapsed() - t0;
  return out;
}

DiveResult dive_parallel(const MipInstance& instance, const std::vector<SubMipSpec>& specs,
                         const SolveLimits& limits, std::uint64_t seed, const DiveOptions& options) {
  if (specs.empty()) return dive_sequential(instance, specs, limits, seed, options);
  const int n = static_cast<int>(specs.size());
  std::vector<SolveResult> results(n);
  std::vector<std::string> errors(n);
  std::vector<char> ok(n, 0);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k) {
    try {
      const MipInstance sub = apply_submip(instance, specs[k]);
      auto policy = make_policy(options.policy);
      SolveOptions so;
      so.lp_backend = options.solve.lp_backend;
      so.time_offset = options.solve.time_offset;
      results[k] = solve(sub, *policy, limits, mix(seed, k), so);
      ok[k] = 1;
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  DiveResult out;
  SolveResult& r = out.result;
  r.policy = "dive-par:" + options.policy;
  r.status = SolveStatus::kLimit;
  std::vector<Incumbent> all;
  bool proven = false;
  for (int k = 0; k < n; ++k) {
    out.order.push_back(k);
    out.sub_error.push_back(errors[k]);
    out.sub_objective.push_back(ok[k] ? results[k].primal_bound : kInf);
    if (!ok[k]) continue;
    for (auto& inc : verified(instance, results[k], k, 0)) all.push_back(std::move(inc));
    r.node_count += results[k].node_count;
    r.elapsed = std::max(r.elapsed, results[k].elapsed);
    proven = proven || (specs[k].empty() && results[k].status == SolveStatus::kOptimal);
  }
  std::sort(all.begin(), all.end(), [](const Incumbent& a, const Incumbent& b) {
    return a.elapsed != b.elapsed ? a.elapsed < b.elapsed : a.task < b.task;
  });
  for (const auto& inc : all) accept(r, inc);
  if (proven) {
    r.status = SolveStatus::kOptimal;
    r.dual_bound = r.primal_bound;
    r.event_log.push_back({r.elapsed, r.primal_bound, r.dual_bound, r.node_count});
  }
  return out;
}

nlohmann::json to_json(const SolveResult& r) {
  nlohmann::json doc;
  doc["format"] = "neuromip.result";
  doc["version"] = 1;
  doc["policy"] = r.policy;
  doc["status"] = to_string(r.status);
  doc["primal_bound"] = encode_real(r.primal_bound);
  doc["dual_bound"] = encode_real(r.dual_bound);
  doc["node_count"] = r.node_count;
  doc["elapsed"] = r.elapsed;
  doc["incumbent"] = r.incumbent ? nlohmann::json(r.incumbent->values) : nlohmann::json();
  nlohmann::json log = nlohmann::json::array();
  for (const auto& e : r.event_log) {
    log.push_back({e.elapsed, encode_real(e.primal), encode_real(e.dual), e.nodes});
  }
  doc["event_log"] = std::move(log);
  return doc;
}

SolveResult solve_result_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "neuromip.result") {
      throw DataError("not a neuromip.result document");
    }
    SolveResult r;
    r.policy = doc.at("policy").get<std::string>();
    const auto status = doc.at("status").get<std::string>();
    r.status = status == "optimal"        ? SolveStatus::kOptimal
               : status == "gap_reached" ? SolveStatus::kGapReached
                                          : SolveStatus::kLimit;
    r.primal_bound = decode_real(doc.at("primal_bound"));
    r.dual_bound = decode_real(doc.at("dual_bound"));
    r.node_count = doc.at("node_count").get<long>();
    r.elapsed = doc.at("elapsed").get<double>();
    if (!doc.at("incumbent").is_null()) {
      Assignment a;
      a.values = doc.at("incumbent").get<std::vector<double>>();
      a.objective = r.primal_bound;
      r.incumbent = std::move(a);
    }
    for (const auto& e : doc.at("event_log")) {
      r.event_log.push_back({e.at(0).get<double>(), decode_real(e.at(1)), decode_real(e.at(2)),
                             e.at(3).get<long>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed result document: ") + e.what());
  }
}

std::string event_log_csv(const std::vector<BoundEvent>& log) {
  std::ostringstream os;
  os.precision(17);
  os << "elapsed,primal,dual,nodes\n";
  for (const auto& e : log) {
    os << e.elapsed << ',' << e.primal << ',' << e.dual << ',' << e.nodes << '\n';
  }
  return os.str();
}

}  // namespace neuromip
