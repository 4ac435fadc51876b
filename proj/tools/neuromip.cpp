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

// neuromip command-line suite. Every command writes its output files and
// prints one JSON line {"command": ..., "result": <path>} on stdout.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "neuromip/admm.hpp"
#include "neuromip/bnb.hpp"
#include "neuromip/calibration.hpp"
#include "neuromip/diving.hpp"
#include "neuromip/evaluation.hpp"
#include "neuromip/gcn.hpp"
#include "neuromip/imitation.hpp"
#include "neuromip/mps_io.hpp"
#include "neuromip/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace neuromip;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// Bad flag values found after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Global {
  int jobs = 1;
};

void report(const std::string& command, const fs::path& result, json extra = json::object()) {
  extra["command"] = command;
  extra["result"] = fs::absolute(result).lexically_normal().string();
  std::cout << extra.dump() << std::endl;
}

void write_json(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text_file(path, doc.dump(2) + "\n");
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// In directory scans, JSON files other than instances (results, reports
// written next to them) are skipped.
bool is_instance_file(const fs::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".mps" || ext == ".MPS") return true;
  if (ext != ".json") return false;
  try {
    const json doc = json::parse(read_text_file(p));
    return doc.is_object() && doc.value("format", "") == "neuromip.mip";
  } catch (const json::exception&) {
    return false;
  }
}

// Files given directly, plus instance files of given directories (sorted).
std::vector<fs::path> collect_instances(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && is_instance_file(e.path())) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      out.push_back(p);
    } else {
      throw DataError(in + ": no such file or directory");
    }
  }
  if (out.empty()) throw DataError("no instance files (.mps, .json) found in the inputs");
  return out;
}

std::vector<MipInstance> load_all(const std::vector<fs::path>& paths) {
  std::vector<MipInstance> out;
  for (const auto& p : paths) {
    try {
      MipInstance m = load_instance(p);
      if (m.name.empty()) m.name = p.stem().string();
      out.push_back(std::move(m));
    } catch (const ParseError& e) {
      throw DataError(p.string() + ": " + e.what());
    }
  }
  return out;
}

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names = {"fsb",    "fsb-exact",       "fsb-admm",
                                                 "random", "most_fractional", "pseudocost",
                                                 "learned"};
  return names;
}

std::unique_ptr<BranchingPolicy> policy_from_flags(const std::string& name,
                                                   const std::string& model_path) {
  if (std::find(policy_names().begin(), policy_names().end(), name) == policy_names().end()) {
    throw UsageError("unknown --policy '" + name +
                     "' (fsb, fsb-exact, fsb-admm, random, most_fractional, pseudocost, learned)");
  }
  if (name == "learned") {
    if (model_path.empty()) throw UsageError("--policy=learned needs --model");
    return std::make_unique<LearnedBranchingPolicy>(load_model(model_path));
  }
  return make_policy(name);
}

SolveLimits limits_from(double max_time, long max_nodes, double target_gap) {
  SolveLimits l;
  l.max_time = max_time > 0.0 ? max_time : kInf;
  if (max_nodes > 0) l.max_nodes = max_nodes;
  if (target_gap < 0.0) throw UsageError("--target-gap must be non-negative");
  l.target_gap = target_gap;
  return l;
}

json result_doc(const SolveResult& r, const std::string& instance) {
  json doc = to_json(r);
  doc["instance"] = instance;
  return doc;
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + " is empty");
  return out;
}

std::string coverage_tag(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "c%.2f", c);
  return buf;
}

// ---------------------------------------------------------------- convert

struct ConvertArgs {
  std::string input;
  std::string out;
};

int run_convert(const ConvertArgs& a) {
  MipInstance m = load_all({fs::path(a.input)}).front();
  const fs::path out = a.out.empty() ? fs::path(a.input).replace_extension(".json") : fs::path(a.out);
  if (fs::absolute(out) == fs::absolute(a.input)) {
    throw UsageError("--out would overwrite the input; choose another path");
  }
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_canonical(m, out);
  report("convert", out, {{"name", m.name}, {"vars", m.num_vars}, {"cons", m.num_cons}});
  return kExitOk;
}

// --------------------------------------------------------------- validate

struct ValidateArgs {
  std::string input;
  std::string assignment;
  std::string out;
};

int run_validate(const ValidateArgs& a) {
  const MipInstance m = load_all({fs::path(a.input)}).front();
  const ValidationReport rep = validate(m);
  json doc = {{"instance", m.name}, {"ok", rep.ok()}, {"violations", rep.violations}};
  bool ok = rep.ok();
  if (!a.assignment.empty()) {
    const Assignment x = assignment_from_json(read_json(a.assignment));
    if (static_cast<int>(x.values.size()) != m.num_vars) {
      throw DataError(a.assignment + ": assignment has " + std::to_string(x.values.size()) +
                      " values, instance has " + std::to_string(m.num_vars) + " variables");
    }
    const bool feasible = check_feasible(m, x.values);
    doc["assignment_feasible"] = feasible;
    doc["assignment_objective"] = encode_real(objective_value(m, x.values));
    ok = ok && feasible;
  }
  const fs::path out =
      a.out.empty() ? fs::path(a.input).replace_extension(".validation.json") : fs::path(a.out);
  write_json(out, doc);
  report("validate", out, {{"ok", ok}});
  return ok ? kExitOk : kExitData;
}

// ------------------------------------------------------------------ solve

struct SolveArgs {
  std::string input;
  std::string policy = "pseudocost";
  std::string model;
  std::uint64_t seed = 0;
  long max_nodes = 0;
  double max_time = 0.0;
  double target_gap = 0.0;
  bool calibrated = false;
  std::string out;
};

int run_solve(const SolveArgs& a) {
  const MipInstance m = load_all({fs::path(a.input)}).front();
  auto policy = policy_from_flags(a.policy, a.model);
  SolveOptions so;
  std::unique_ptr<CalibratedClock> clock;
  if (a.calibrated) {
    clock = std::make_unique<CalibratedClock>();
    so.clock = clock->as_function();
  }
  const SolveResult r =
      solve(m, *policy, limits_from(a.max_time, a.max_nodes, a.target_gap), a.seed, so);
  json doc = result_doc(r, m.name);
  doc["seed"] = a.seed;
  doc["time_unit"] = a.calibrated ? "calibrated" : "wall";
  const fs::path out =
      a.out.empty() ? fs::path(a.input).replace_extension(".result.json") : fs::path(a.out);
  write_json(out, doc);
  report("solve", out,
         {{"status", to_string(r.status)}, {"primal_bound", encode_real(r.primal_bound)},
          {"nodes", r.node_count}});
  return kExitOk;
}

// --------------------------------------------------------------- lp-bench

struct LpBenchArgs {
  std::vector<std::string> inputs;
  int batch_size = 64;
  int iters = 100;
  double rho = 10.0;
  std::string out = "lp_bench.csv";
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_lp_bench(const LpBenchArgs& a) {
  if (a.batch_size < 1 || a.iters < 1) throw UsageError("--batch-size and --iters must be >= 1");
  const auto instances = load_all(collect_instances(a.inputs));
  std::ostringstream csv;
  csv.precision(10);
  csv << "instance,batch_size,iters,t_single,t_batch,speedup\n";
  AdmmConfig cfg;
  cfg.rho = a.rho;
  cfg.max_iters = a.iters;
  // Fixed iteration count: both paths do the same work.
  cfg.eps_primal = 0.0;
  cfg.eps_dual = 0.0;
  for (const auto& m : instances) {
    const LpProblem lp = LpProblem::from_mip(m);
    if (lp.num_vars == 0) continue;
    // Up/down variants on fractional root variables, then on any variable.
    const LpSolution root = exact_lp_oracle(lp);
    std::vector<int> vars;
    if (root.status == LpStatus::kOptimal) vars = fractional_candidates(m, root.x);
    for (int i = 0; i < lp.num_vars && static_cast<int>(vars.size()) < a.batch_size; ++i) {
      if (std::find(vars.begin(), vars.end(), i) == vars.end()) vars.push_back(i);
    }
    std::vector<BoundOverride> variants;
    for (int k = 0; static_cast<int>(variants.size()) < a.batch_size; ++k) {
      const int i = vars[k % vars.size()];
      const double lo = lp.var_lower[i], hi = lp.var_upper[i];
      const double mid = root.status == LpStatus::kOptimal ? root.x[i] : 0.0;
      const bool up = (k / static_cast<int>(vars.size())) % 2 == 1;
      double nl = lo, nu = hi;
      if (up) nl = std::min(hi, std::ceil(mid));
      else nu = std::max(lo, std::floor(mid));
      variants.push_back({i, nl, nu});
    }
    const KktFactor factor = factorize(lp.matrix, cfg.rho, cfg.linear_system_mode);
    auto t0 = std::chrono::steady_clock::now();
    for (const auto& v : variants) {
      std::vector<double> lo = lp.var_lower, hi = lp.var_upper;
      lo[v.var_index] = v.new_lb;
      hi[v.var_index] = v.new_ub;
      (void)admm_solve(lp.with_bounds(lo, hi), cfg, std::nullopt, &factor);
    }
    const double t_single = seconds_since(t0) / static_cast<double>(variants.size());
    t0 = std::chrono::steady_clock::now();
    (void)admm_solve_batch(lp, variants, cfg, std::nullopt, &factor);
    const double t_batch = seconds_since(t0);
    csv << m.name << ',' << variants.size() << ',' << a.iters << ',' << t_single << ',' << t_batch
        << ',' << speedup_factor(static_cast<int>(variants.size()), t_single, t_batch) << '\n';
  }
  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_text_file(out, csv.str());
  report("lp-bench", out, {{"instances", instances.size()}});
  return kExitOk;
}

// --------------------------------------------------------------- gen-data

struct GenDataArgs {
  std::vector<std::string> inputs;
  std::string kind = "branching";
  // Synthetic instances.
  std::string family = "knapsack";
  int count = 10;
  int num_vars = 30;
  int num_cons = 5;
  double density = 0.08;
  // Expert data.
  std::string expert = "fsb-exact";
  double random_prob = 0.1;
  int repeats = 5;
  long node_limit = 1000;
  std::string label_policy = "pseudocost";
  long max_nodes = 0;
  std::uint64_t seed = 0;
  std::string out;
};

FsbOptions expert_options(const std::string& name) {
  FsbOptions o;
  if (name == "fsb" || name == "fsb-exact") {
    o.backend = FsbBackend::kExact;
  } else if (name == "fsb-admm") {
    o.backend = FsbBackend::kAdmm;
  } else {
    throw UsageError("unknown --expert '" + name + "' (fsb-exact, fsb-admm)");
  }
  return o;
}

fs::path write_branching_dataset(const std::vector<MipInstance>& instances, const GenDataArgs& a,
                                 int jobs, const fs::path& out, long* count) {
  BranchingDataOptions o;
  o.expert = expert_options(a.expert);
  o.random_prob = a.random_prob;
  o.repeats = a.repeats;
  o.node_limit = a.node_limit;
  o.seed = a.seed;
  o.jobs = jobs;
  if (!(o.random_prob >= 0.0 && o.random_prob <= 1.0)) {
    throw UsageError("--random-prob must be in [0, 1]");
  }
  const auto data = generate_branching_data(instances, o);
  write_dataset(out, data);
  *count = static_cast<long>(data.size());
  return out;
}

fs::path write_diving_dataset(const std::vector<MipInstance>& instances, const GenDataArgs& a,
                              int jobs, const fs::path& out, long* count,
                              std::vector<std::string>* dropped) {
  if (std::find(policy_names().begin(), policy_names().end(), a.label_policy) ==
          policy_names().end() ||
      a.label_policy == "learned") {
    throw UsageError("unknown --label-policy '" + a.label_policy + "'");
  }
  const auto labels =
      collect_diving_labels(instances, limits_from(0.0, a.max_nodes, 0.0), a.seed, a.label_policy,
                            dropped, jobs);
  std::map<std::string, const MipInstance*> by_name;
  for (const auto& m : instances) by_name[m.name] = &m;
  std::vector<TrainingExample> data;
  for (const auto& l : labels) {
    const auto ex = diving_examples(*by_name.at(l.instance), l);
    data.insert(data.end(), ex.begin(), ex.end());
  }
  write_dataset(out, data);
  *count = static_cast<long>(data.size());
  return out;
}

int run_gen_data(const GenDataArgs& a, const Global& g) {
  if (a.out.empty()) throw UsageError("gen-data needs --out");
  const fs::path out(a.out);
  if (a.kind == "instances") {
    if (a.count < 1) throw UsageError("--count must be >= 1");
    FamilyParams p;
    try {
      p.family = parse_family(a.family);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    p.num_vars = a.num_vars;
    p.num_cons = a.num_cons;
    p.density = a.density;
    fs::create_directories(out);
    const auto instances = generate_family(p, a.count, a.seed);
    for (const auto& m : instances) save_canonical(m, out / (m.name + ".json"));
    report("gen-data", out, {{"kind", a.kind}, {"count", instances.size()}});
    return kExitOk;
  }
  if (a.inputs.empty()) throw UsageError("gen-data --kind=" + a.kind + " needs instance inputs");
  const auto instances = load_all(collect_instances(a.inputs));
  long count = 0;
  if (a.kind == "branching") {
    write_branching_dataset(instances, a, g.jobs, out, &count);
    report("gen-data", out, {{"kind", a.kind}, {"examples", count}});
  } else if (a.kind == "diving") {
    std::vector<std::string> dropped;
    write_diving_dataset(instances, a, g.jobs, out, &count, &dropped);
    report("gen-data", out, {{"kind", a.kind}, {"examples", count}, {"dropped", dropped}});
  } else {
    throw UsageError("unknown --kind '" + a.kind + "' (instances, branching, diving)");
  }
  return kExitOk;
}

// ------------------------------------------------------------------ train

struct TrainArgs {
  std::string dataset;
  std::string kind = "branching";
  std::string coverage = "0.5";
  double lambda = 32.0;
  long steps = 1000;
  double lr = 1e-3;
  int batch_size = 8;
  int layers = 2;
  int hidden = 32;
  int bit_budget = 8;
  std::uint64_t seed = 0;
  std::string out;
};

// Trains one model per coverage (diving) or one branching model into `dir`.
std::vector<fs::path> train_models(const std::vector<TrainingExample>& all, const TrainArgs& a,
                                   const fs::path& dir) {
  const bool branching = a.kind == "branching";
  if (!branching && a.kind != "diving") {
    throw UsageError("unknown --kind '" + a.kind + "' (branching, diving)");
  }
  std::vector<TrainingExample> data;
  for (const auto& ex : all) {
    if ((ex.kind == ExampleKind::kBranching) == branching) data.push_back(ex);
  }
  if (data.empty()) throw DataError("dataset has no " + a.kind + " examples");
  if (a.steps < 1 || a.batch_size < 1 || !(a.lr > 0.0)) {
    throw UsageError("--steps, --batch-size and --lr must be positive");
  }
  GcnConfig gc;
  gc.layers = a.layers;
  gc.hidden = a.hidden;
  gc.head_hidden = a.hidden;
  try {
    gc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  TrainConfig tc;
  tc.steps = a.steps;
  tc.adam.lr = a.lr;
  tc.batch_size = a.batch_size;
  tc.seed = a.seed;
  tc.loss.bit_budget = a.bit_budget;
  tc.loss.lambda = a.lambda;
  fs::create_directories(dir);
  std::vector<fs::path> written;
  const std::vector<double> coverages =
      branching ? std::vector<double>{0.0} : parse_list(a.coverage, "--coverage");
  for (double c : coverages) {
    if (!branching && !(c > 0.0 && c <= 1.0)) throw UsageError("--coverage values must be in (0, 1]");
    tc.loss.kind = branching ? LossKind::kBranching : LossKind::kSelective;
    tc.loss.coverage = c;
    const GcnModel init = GcnModel::init(gc, a.seed);
    std::vector<double> curve;
    const GcnModel model = train(data, init, tc, &curve);
    const std::string stem = branching ? "branching" : "diving_" + coverage_tag(c);
    save_model(model, (dir / (stem + ".json")).string());
    write_text_file(dir / (stem + "_loss.csv"), loss_curve_csv(curve));
    written.push_back(dir / (stem + ".json"));
  }
  return written;
}

int run_train(const TrainArgs& a) {
  if (a.out.empty()) throw UsageError("train needs --out (a directory)");
  const auto data = read_dataset(a.dataset);
  const auto models = train_models(data, a, a.out);
  json files = json::array();
  for (const auto& p : models) files.push_back(p.string());
  report("train", a.out, {{"kind", a.kind}, {"models", files}});
  return kExitOk;
}

// ------------------------------------------------------------------- dive

struct DiveArgs {
  std::string input;
  std::vector<std::string> models;
  int samples = 1;
  int sub_seeds = 1;
  int max_submips = 100;
  int bit_budget = 8;
  long max_nodes = 0;
  double max_time = 0.0;
  std::string mode = "sequential";
  std::string sub_policy = "pseudocost";
  std::uint64_t seed = 0;
  std::string out;
};

DiveResult dive_instance(const MipInstance& m, const std::vector<GcnModel>& models,
                         const DiveArgs& a) {
  std::vector<ModelPredictor> preds;
  for (std::size_t k = 0; k < models.size(); ++k) {
    preds.emplace_back(models[k], "model" + std::to_string(k));
  }
  std::vector<const DivingPredictor*> ptrs;
  for (const auto& p : preds) ptrs.push_back(&p);
  DivingConfig dc;
  dc.samples_per_model = a.samples;
  dc.sub_seeds = a.sub_seeds;
  dc.max_submips = a.max_submips;
  dc.sample.bit_budget = a.bit_budget;
  dc.seed = a.seed;
  try {
    dc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto specs = generate_submips(ptrs, m, dc);
  DiveOptions o;
  o.policy = a.sub_policy;
  const SolveLimits lim = limits_from(a.max_time, a.max_nodes, 0.0);
  if (a.mode == "sequential") return dive_sequential(m, specs, lim, a.seed, o);
  if (a.mode == "parallel") return dive_parallel(m, specs, lim, a.seed, o);
  throw UsageError("unknown --mode '" + a.mode + "' (sequential, parallel)");
}

int run_dive(const DiveArgs& a) {
  if (a.models.empty()) throw UsageError("dive needs at least one --model");
  const MipInstance m = load_all({fs::path(a.input)}).front();
  std::vector<GcnModel> models;
  for (const auto& p : a.models) models.push_back(load_model(p));
  const DiveResult d = dive_instance(m, models, a);
  json doc = result_doc(d.result, m.name);
  doc["submips"] = d.order.size();
  json subs = json::array();
  for (std::size_t k = 0; k < d.order.size(); ++k) {
    subs.push_back({{"spec", d.order[k]},
                    {"objective", encode_real(d.sub_objective[k])},
                    {"error", d.sub_error[k]}});
  }
  doc["subs"] = std::move(subs);
  const fs::path out =
      a.out.empty() ? fs::path(a.input).replace_extension(".dive.json") : fs::path(a.out);
  write_json(out, doc);
  report("dive", out, {{"primal_bound", encode_real(d.result.primal_bound)}});
  return kExitOk;
}

// ------------------------------------------------------------- cut-select

struct CutArgs {
  std::string input;
  std::string pool;
  int k = 1;
  double big_m = 1e6;
  std::string out;
};

// {"rows": [{"coefficients": [[var, value], ...], "rhs": b}, ...]} for rows
// sum_i value_i x_var <= b.
CutPool read_pool(const fs::path& path, int num_vars) {
  const json doc = read_json(path);
  std::vector<SparseEntry> entries;
  CutPool pool;
  try {
    int row = 0;
    for (const auto& r : doc.at("rows")) {
      for (const auto& e : r.at("coefficients")) {
        const int j = e.at(0).get<int>();
        if (j < 0 || j >= num_vars) {
          throw DataError(path.string() + ": cut coefficient on variable " + std::to_string(j) +
                          " outside [0, " + std::to_string(num_vars) + ")");
        }
        entries.push_back({row, j, e.at(1).get<double>()});
      }
      pool.rhs.push_back(decode_real(r.at("rhs")));
      ++row;
    }
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  pool.matrix = CsrMatrix::from_entries(static_cast<int>(pool.rhs.size()), num_vars, entries);
  return pool;
}

int run_cut_select(const CutArgs& a) {
  const MipInstance m = load_all({fs::path(a.input)}).front();
  const CutPool pool = read_pool(a.pool, m.num_vars);
  if (a.k < 1) throw UsageError("--k must be >= 1");
  const CutSelection sel = select_cuts_expert(m, pool, a.k, a.big_m);
  std::vector<int> all(pool.rhs.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  json doc = {{"instance", m.name},
              {"k", a.k},
              {"status", to_string(sel.status)},
              {"has_solution", sel.has_solution},
              {"selected", sel.selected},
              {"bound", encode_real(sel.bound)},
              {"lp_bound_none", encode_real(lp_bound_with_cuts(m, pool, {}))},
              {"lp_bound_all", encode_real(lp_bound_with_cuts(m, pool, all))}};
  if (sel.has_solution) {
    doc["lp_bound_selected"] = encode_real(lp_bound_with_cuts(m, pool, sel.selected));
  }
  const fs::path out =
      a.out.empty() ? fs::path(a.input).replace_extension(".cuts.json") : fs::path(a.out);
  write_json(out, doc);
  report("cut-select", out, {{"selected", sel.selected}});
  return kExitOk;
}

// ------------------------------------------------------------------- eval

struct EvalArgs {
  std::string run;
  double target_gap = 0.0;
  double time_limit = 0.0;
  double par = 10.0;
  std::string out;
};

struct Run {
  std::string solver;
  std::string instance;
  SolveResult result;
};

// results/<solver>/*.json under the run directory.
std::vector<Run> read_runs(const fs::path& run) {
  const fs::path dir = run / "results";
  if (!fs::is_directory(dir)) throw DataError(dir.string() + ": no results directory");
  std::vector<fs::path> solvers;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) solvers.push_back(e.path());
  }
  std::sort(solvers.begin(), solvers.end());
  std::vector<Run> out;
  for (const auto& s : solvers) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(s)) {
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const json doc = read_json(f);
      Run r;
      r.solver = s.filename().string();
      r.instance = doc.value("instance", f.stem().string());
      try {
        r.result = solve_result_from_json(doc);
      } catch (const json::exception& e) {
        throw DataError(f.string() + ": " + e.what());
      }
      out.push_back(std::move(r));
    }
  }
  if (out.empty()) throw DataError(dir.string() + ": no result files");
  return out;
}

fs::path evaluate_run(const EvalArgs& a, json* summary_out) {
  const fs::path run(a.run);
  const auto runs = read_runs(run);
  const fs::path out = a.out.empty() ? run / "eval" : fs::path(a.out);
  fs::create_directories(out);

  // p* per instance: best primal bound over every run (retroactive).
  std::map<std::string, double> p_star;
  double max_elapsed = 0.0;
  for (const auto& r : runs) {
    auto [it, fresh] = p_star.emplace(r.instance, r.result.primal_bound);
    if (!fresh) it->second = std::min(it->second, r.result.primal_bound);
    max_elapsed = std::max(max_elapsed, r.result.elapsed);
  }
  const double time_limit = a.time_limit > 0.0 ? a.time_limit : std::max(max_elapsed, 1e-9);

  std::map<std::string, std::vector<GapCurve>> primal, pd;
  std::map<std::string, std::vector<double>> ttt;
  for (const auto& r : runs) {
    const double ps = p_star.at(r.instance);
    primal[r.solver].push_back(build_gap_curve(r.result.event_log, ps, GapKind::kPrimal));
    const GapCurve c = build_gap_curve(r.result.event_log, ps, GapKind::kPrimalDual);
    ttt[r.solver].push_back(time_to_target(c, a.target_gap));
    pd[r.solver].push_back(c);
  }

  json summary = {{"target_gap", a.target_gap}, {"time_limit", time_limit}, {"par_k", a.par}};
  json solvers = json::object();
  std::ostringstream table;
  table << "solver,instances,solved,par" << a.par << ",mean_final_primal_gap\n";
  std::vector<PlotSeries> surv_series, gap_series;
  for (const auto& [solver, curves] : pd) {
    const auto surv = survival(curves, a.target_gap);
    const double par = par_k(ttt.at(solver), time_limit, a.par);
    long solved = 0;
    for (double t : ttt.at(solver)) solved += std::isfinite(t) && t <= time_limit;
    double final_gap = 0.0;
    for (const auto& c : primal.at(solver)) final_gap += c.points.back().value;
    final_gap /= static_cast<double>(curves.size());
    const GapCurve mean_primal = average_curve(primal.at(solver));
    write_text_file(out / ("survival_" + solver + ".csv"), curve_csv(surv, "solved_fraction"));
    write_text_file(out / ("primal_gap_" + solver + ".csv"),
                    curve_csv(mean_primal.points, "mean_primal_gap"));
    solvers[solver] = {{"instances", curves.size()},
                       {"solved", solved},
                       {"par", encode_real(par)},
                       {"mean_final_primal_gap", final_gap}};
    table << solver << ',' << curves.size() << ',' << solved << ',' << par << ',' << final_gap
          << '\n';
    surv_series.push_back({solver, surv});
    gap_series.push_back({solver, mean_primal.points});
  }
  summary["solvers"] = solvers;
  write_text_file(out / "table.csv", table.str());
  write_text_file(out / "survival.svg",
                  render_svg_plot(surv_series, "Solved fraction", "time (s)", "fraction", false,
                                  false));
  write_text_file(out / "primal_gap.svg",
                  render_svg_plot(gap_series, "Mean primal gap", "time (s)", "gap", false, false));
  write_json(out / "summary.json", summary);
  if (summary_out != nullptr) *summary_out = summary;
  return out / "summary.json";
}

int run_eval(const EvalArgs& a) {
  json summary;
  const fs::path out = evaluate_run(a, &summary);
  report("eval", out, {{"solvers", summary["solvers"]}});
  return kExitOk;
}

// --------------------------------------------------------------- pipeline

struct PipelineArgs {
  std::string input;
  std::string out;
  double train_fraction = 0.5;
  GenDataArgs data;
  TrainArgs branching;
  TrainArgs diving;
  DiveArgs dive;
  long max_nodes = 2000;
  double max_time = 0.0;
  std::uint64_t seed = 0;
};

int run_pipeline(PipelineArgs a, const Global& g) {
  if (a.out.empty()) throw UsageError("pipeline needs --out");
  if (!(a.train_fraction > 0.0 && a.train_fraction < 1.0)) {
    throw UsageError("--train-fraction must be in (0, 1)");
  }
  const fs::path run(a.out);
  const auto paths = collect_instances({a.input});
  const auto instances = load_all(paths);
  if (instances.size() < 2) throw DataError("pipeline needs at least two instances");
  const std::size_t n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(a.train_fraction * instances.size())), 1,
      instances.size() - 1);
  const std::vector<MipInstance> train_set(instances.begin(), instances.begin() + n_train);
  const std::vector<MipInstance> test_set(instances.begin() + n_train, instances.end());
  json split = {{"train", json::array()}, {"test", json::array()}};
  for (const auto& m : train_set) split["train"].push_back(m.name);
  for (const auto& m : test_set) split["test"].push_back(m.name);
  write_json(run / "split.json", split);

  a.data.seed = a.seed;
  long n_branch = 0, n_dive = 0;
  std::vector<std::string> dropped;
  write_branching_dataset(train_set, a.data, g.jobs, run / "datasets" / "branching", &n_branch);
  write_diving_dataset(train_set, a.data, g.jobs, run / "datasets" / "diving", &n_dive, &dropped);

  a.branching.kind = "branching";
  a.branching.seed = a.seed;
  const auto bmodel = train_models(read_dataset(run / "datasets" / "branching"), a.branching,
                                   run / "models");
  std::vector<fs::path> dmodels;
  if (n_dive > 0) {
    a.diving.kind = "diving";
    a.diving.seed = a.seed;
    dmodels = train_models(read_dataset(run / "datasets" / "diving"), a.diving, run / "models");
  }
  const GcnModel branch_model = load_model(bmodel.front().string());
  std::vector<GcnModel> dive_models;
  for (const auto& p : dmodels) dive_models.push_back(load_model(p.string()));

  const SolveLimits lim = limits_from(a.max_time, a.max_nodes, 0.0);
  a.dive.max_nodes = a.max_nodes;
  a.dive.max_time = a.max_time;
  a.dive.seed = a.seed;
  const int n = static_cast<int>(test_set.size());
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, g.jobs))
  for (int k = 0; k < n; ++k) {
    try {
      const MipInstance& m = test_set[k];
      const std::string file = m.name + ".json";
      for (const std::string solver : {"pseudocost", "random"}) {
        auto p = make_policy(solver);
        write_json(run / "results" / solver / file, result_doc(solve(m, *p, lim, a.seed), m.name));
      }
      LearnedBranchingPolicy learned(branch_model);
      write_json(run / "results" / "learned_branching" / file,
                 result_doc(solve(m, learned, lim, a.seed), m.name));
      if (!dive_models.empty()) {
        const DiveResult d = dive_instance(m, dive_models, a.dive);
        write_json(run / "results" / "neural_diving" / file, result_doc(d.result, m.name));
      }
    } catch (const std::exception& e) {
      errors[k] = test_set[k].name + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error("pipeline solve failed: " + e);
  }

  EvalArgs ea;
  ea.run = run.string();
  json summary;
  evaluate_run(ea, &summary);
  json doc = {{"instances", instances.size()},
              {"train", train_set.size()},
              {"test", test_set.size()},
              {"branching_examples", n_branch},
              {"diving_examples", n_dive},
              {"diving_dropped", dropped},
              {"evaluation", summary}};
  write_json(run / "pipeline.json", doc);
  report("pipeline", run, {{"summary", (run / "pipeline.json").string()}});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neuromip: learned branching and diving for mixed-integer programs"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags win");
  Global g;
  app.add_option("-j,--jobs", g.jobs, "Worker threads for instance-level parallelism")
      ->check(CLI::PositiveNumber);

  ConvertArgs conv;
  auto* c_conv = app.add_subcommand("convert", "MPS or JSON instance to canonical JSON");
  c_conv->add_option("input", conv.input, "Instance file")->required();
  c_conv->add_option("--out", conv.out, "Output path (default: input with .json)");

  ValidateArgs val;
  auto* c_val = app.add_subcommand("validate", "Check an instance and optionally an assignment");
  c_val->add_option("input", val.input, "Instance file")->required();
  c_val->add_option("--assignment", val.assignment, "Assignment JSON to check");
  c_val->add_option("--out", val.out, "Report path");

  SolveArgs sol;
  auto* c_sol = app.add_subcommand("solve", "Branch-and-bound solve");
  c_sol->add_option("input", sol.input, "Instance file")->required();
  c_sol->add_option("--policy", sol.policy, "Branching policy");
  c_sol->add_option("--model", sol.model, "Branching model for --policy=learned");
  c_sol->add_option("--seed", sol.seed);
  c_sol->add_option("--max-nodes", sol.max_nodes, "Node limit (0: none)");
  c_sol->add_option("--max-time", sol.max_time, "Time limit in seconds (0: none)");
  c_sol->add_option("--target-gap", sol.target_gap, "Stop at this primal-dual gap");
  c_sol->add_flag("--calibrated", sol.calibrated, "Report calibrated instead of wall time");
  c_sol->add_option("--out", sol.out, "Result path");

  LpBenchArgs lpb;
  auto* c_lpb = app.add_subcommand("lp-bench", "Sequential vs batched ADMM timing");
  c_lpb->add_option("inputs", lpb.inputs, "Instance files or directories")->required();
  c_lpb->add_option("--batch-size", lpb.batch_size);
  c_lpb->add_option("--iters", lpb.iters);
  c_lpb->add_option("--rho", lpb.rho);
  c_lpb->add_option("--out", lpb.out, "CSV path");

  GenDataArgs gen;
  auto* c_gen = app.add_subcommand("gen-data", "Synthetic instances or expert datasets");
  c_gen->add_option("inputs", gen.inputs, "Instance files or directories");
  c_gen->add_option("--kind", gen.kind, "instances, branching or diving");
  c_gen->add_option("--family", gen.family, "knapsack or setcover");
  c_gen->add_option("--count", gen.count);
  c_gen->add_option("--num-vars", gen.num_vars);
  c_gen->add_option("--num-cons", gen.num_cons);
  c_gen->add_option("--density", gen.density);
  c_gen->add_option("--expert", gen.expert, "fsb-exact or fsb-admm");
  c_gen->add_option("--random-prob", gen.random_prob);
  c_gen->add_option("--repeats", gen.repeats);
  c_gen->add_option("--node-limit", gen.node_limit);
  c_gen->add_option("--label-policy", gen.label_policy, "Policy finding diving labels");
  c_gen->add_option("--max-nodes", gen.max_nodes, "Node limit for diving labels (0: none)");
  c_gen->add_option("--seed", gen.seed);
  c_gen->add_option("--out", gen.out, "Output directory")->required();

  TrainArgs trn;
  auto add_train_flags = [](CLI::App* c, TrainArgs& t, const std::string& prefix) {
    c->add_option("--" + prefix + "coverage", t.coverage, "Comma-separated coverage targets");
    c->add_option("--" + prefix + "lambda", t.lambda, "Coverage penalty weight");
    c->add_option("--" + prefix + "steps", t.steps);
    c->add_option("--" + prefix + "lr", t.lr);
    c->add_option("--" + prefix + "batch-size", t.batch_size);
    c->add_option("--" + prefix + "layers", t.layers);
    c->add_option("--" + prefix + "hidden", t.hidden);
    c->add_option("--" + prefix + "bit-budget", t.bit_budget);
  };
  auto* c_trn = app.add_subcommand("train", "Train branching or diving models");
  c_trn->add_option("dataset", trn.dataset, "Dataset directory or examples.jsonl")->required();
  c_trn->add_option("--kind", trn.kind, "branching or diving");
  add_train_flags(c_trn, trn, "");
  c_trn->add_option("--seed", trn.seed);
  c_trn->add_option("--out", trn.out, "Model directory")->required();

  DiveArgs dv;
  auto add_dive_flags = [](CLI::App* c, DiveArgs& d) {
    c->add_option("--samples", d.samples, "Samples per model");
    c->add_option("--sub-seeds", d.sub_seeds);
    c->add_option("--max-submips", d.max_submips);
    c->add_option("--bit-budget", d.bit_budget);
    c->add_option("--mode", d.mode, "sequential or parallel");
    c->add_option("--sub-policy", d.sub_policy, "Branching rule inside sub-MIPs");
  };
  auto* c_dv = app.add_subcommand("dive", "Neural diving with trained models");
  c_dv->add_option("input", dv.input, "Instance file")->required();
  c_dv->add_option("--model", dv.models, "Diving model (repeatable)");
  add_dive_flags(c_dv, dv);
  c_dv->add_option("--max-nodes", dv.max_nodes, "Total node budget (0: none)");
  c_dv->add_option("--max-time", dv.max_time);
  c_dv->add_option("--seed", dv.seed);
  c_dv->add_option("--out", dv.out, "Result path");

  CutArgs cut;
  auto* c_cut = app.add_subcommand("cut-select", "Expert selection of k cuts from a pool");
  c_cut->add_option("input", cut.input, "Instance file")->required();
  c_cut->add_option("--pool", cut.pool, "Cut pool JSON")->required();
  c_cut->add_option("--k", cut.k);
  c_cut->add_option("--big-m", cut.big_m);
  c_cut->add_option("--out", cut.out, "Result path");

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "Survival, PAR-k and gap curves of a run directory");
  c_ev->add_option("run", ev.run, "Run directory with results/<solver>/*.json")->required();
  c_ev->add_option("--target-gap", ev.target_gap);
  c_ev->add_option("--time-limit", ev.time_limit, "PAR time limit (0: slowest run)");
  c_ev->add_option("--par", ev.par, "Penalty factor k of PAR-k");
  c_ev->add_option("--out", ev.out, "Output directory (default: <run>/eval)");

  PipelineArgs pl;
  pl.diving.coverage = "0.3,0.6,0.9";
  auto* c_pl = app.add_subcommand("pipeline", "gen-data, train, solve, dive and eval end to end");
  c_pl->add_option("input", pl.input, "Instance directory")->required();
  c_pl->add_option("--out", pl.out, "Run directory")->required();
  c_pl->add_option("--train-fraction", pl.train_fraction);
  c_pl->add_option("--max-nodes", pl.max_nodes, "Node limit per solve and per dive");
  c_pl->add_option("--max-time", pl.max_time);
  c_pl->add_option("--seed", pl.seed);
  c_pl->add_option("--random-prob", pl.data.random_prob);
  c_pl->add_option("--repeats", pl.data.repeats);
  c_pl->add_option("--node-limit", pl.data.node_limit);
  c_pl->add_option("--expert", pl.data.expert);
  add_train_flags(c_pl, pl.branching, "branching-");
  add_train_flags(c_pl, pl.diving, "diving-");
  add_dive_flags(c_pl, pl.dive);

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

#ifdef _OPENMP
  omp_set_num_threads(g.jobs);
#endif
  try {
    if (*c_conv) return run_convert(conv);
    if (*c_val) return run_validate(val);
    if (*c_sol) return run_solve(sol);
    if (*c_lpb) return run_lp_bench(lpb);
    if (*c_gen) return run_gen_data(gen, g);
    if (*c_trn) return run_train(trn);
    if (*c_dv) return run_dive(dv);
    if (*c_cut) return run_cut_select(cut);
    if (*c_ev) return run_eval(ev);
    if (*c_pl) return run_pipeline(pl, g);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
