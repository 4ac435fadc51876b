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

#include "neuromip/imitation.hpp"

#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "neuromip/diving.hpp"
#include "neuromip/mps_io.hpp"

namespace neuromip {

namespace {

// Labels every node with the expert distribution; the executed move comes
// from the expert, a learned policy, or a uniform random draw.
class RecordingPolicy : public BranchingPolicy {
 public:
  RecordingPolicy(const BranchingDataOptions& options, const GcnModel* learner,
                  std::string instance, std::vector<TrainingExample>& out)
      : options_(options), expert_(options.expert), instance_(std::move(instance)), out_(out) {
    if (learner != nullptr) learner_.emplace(*learner);
  }

  std::string name() const override { return learner_ ? "dagger" : "expert"; }

  void reset(const MipInstance& instance) override { expert_.reset(instance); }

  std::size_t select(const BranchContext& ctx) override {
    const BranchScores s = expert_.scores(ctx);
    bool random = false;
    if (options_.random_prob > 0.0) {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      random = unit(ctx.rng) < options_.random_prob;
    }
    std::size_t pos;
    if (random) {
      std::uniform_int_distribution<std::size_t> pick(0, ctx.candidates.size() - 1);
      pos = pick(ctx.rng);
    } else if (learner_) {
      pos = learner_->select(ctx);
    } else {
      pos = s.argmax();
    }
    if (!random || options_.log_random_nodes) {
      TrainingExample ex;
      ex.kind = ExampleKind::kBranching;
      ex.graph = encode(ctx.instance, ctx.node.lower, ctx.node.upper,
                        std::span<const double>(ctx.node_lp.x));
      ex.instance = instance_;
      ex.node = ctx.node_number;
      ex.lower = ctx.node.lower;
      ex.upper = ctx.node.upper;
      ex.candidates.assign(ctx.candidates.begin(), ctx.candidates.end());
      ex.expert = s.expert_dist;
      out_.push_back(std::move(ex));
    }
    return pos;
  }

 private:
  const BranchingDataOptions& options_;
  FsbPolicy expert_;
  std::optional<LearnedBranchingPolicy> learner_;
  std::string instance_;
  std::vector<TrainingExample>& out_;
};

std::uint64_t task_seed(std::uint64_t seed, std::size_t instance, int repeat) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(instance), static_cast<std::uint32_t>(repeat)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<TrainingExample> run_trajectories(const std::vector<MipInstance>& instances,
                                              const BranchingDataOptions& options,
                                              const GcnModel* learner, int repeats) {
  const int tasks = static_cast<int>(instances.size()) * repeats;
  std::vector<std::vector<TrainingExample>> per_task(tasks);
  std::vector<std::string> errors(tasks);
  SolveLimits limits;
  limits.max_nodes = options.node_limit;
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, options.jobs))
  for (int t = 0; t < tasks; ++t) {
    const std::size_t i = static_cast<std::size_t>(t / repeats);
    const int r = t % repeats;
    try {
      const std::string name =
          instances[i].name.empty() ? "instance" + std::to_string(i) : instances[i].name;
      RecordingPolicy policy(options, learner, name, per_task[t]);
      solve(instances[i], policy, limits, task_seed(options.seed, i, r));
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error("expert data generation failed: " + e);
  }
  std::vector<TrainingExample> out;
  for (auto& v : per_task) {
    for (auto& ex : v) out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

std::vector<TrainingExample> generate_branching_data(const std::vector<MipInstance>& instances,
                                                     const BranchingDataOptions& options) {
  if (options.repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  return run_trajectories(instances, options, nullptr, options.repeats);
}

std::vector<TrainingExample> dagger_round(const GcnModel& policy,
                                          const std::vector<MipInstance>& instances,
                                          const BranchingDataOptions& options) {
  BranchingDataOptions o = options;
  o.random_prob = 0.0;
  return run_trajectories(instances, o, &policy, 1);
}

std::vector<DivingLabels> collect_diving_labels(const std::vector<MipInstance>& instances,
                                                const SolveLimits& limits, std::uint64_t seed,
                                                const std::string& policy_name,
                                                std::vector<std::string>* dropped, int jobs) {
  const int n = static_cast<int>(instances.size());
  std::vector<DivingLabels> per(n);
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
  for (int i = 0; i < n; ++i) {
    try {
      auto policy = make_policy(policy_name);
      const SolveResult r = solve(instances[i], *policy, limits, task_seed(seed, i, 0));
      DivingLabels& l = per[i];
      l.instance = instances[i].name;
      std::set<std::vector<double>> seen;
      for (const auto& s : r.solutions) {
        if (!seen.insert(s.x).second) continue;
        l.assignments.push_back(s.x);
        l.objectives.push_back(s.objective);
      }
      if (!l.objectives.empty()) l.weights = importance_weights(l.objectives);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  std::vector<DivingLabels> out;
  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty()) throw std::runtime_error("diving label collection failed: " + errors[i]);
    if (per[i].assignments.empty()) {
      if (dropped != nullptr) dropped->push_back(instances[i].name);
      continue;
    }
    out.push_back(std::move(per[i]));
  }
  return out;
}

std::vector<TrainingExample> diving_examples(const MipInstance& instance,
                                             const DivingLabels& labels) {
  const BipartiteGraph g = encode_for_diving(instance);
  std::vector<TrainingExample> out;
  for (std::size_t k = 0; k < labels.assignments.size(); ++k) {
    TrainingExample ex;
    ex.kind = ExampleKind::kDiving;
    ex.graph = g;
    ex.instance = labels.instance;
    ex.weight = labels.weights[k];
    for (int i = 0; i < instance.num_vars; ++i) {
      if (!instance.is_integer(i)) continue;
      ex.int_vars.push_back(i);
      ex.values.push_back(std::round(labels.assignments[k][i]));
      ex.lower.push_back(instance.var_lower[i]);
      ex.upper.push_back(instance.var_upper[i]);
      ex.is_binary.push_back(instance.var_kind[i] == VarKind::kBinary);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

bool topk_hit(std::span<const double> predicted, std::span<const double> expert, int k) {
  if (predicted.size() != expert.size() || expert.empty()) {
    throw std::invalid_argument("topk_hit: predicted and expert sizes differ or are empty");
  }
  std::size_t e = 0;
  for (std::size_t c = 1; c < expert.size(); ++c) {
    if (expert[c] > expert[e]) e = c;
  }
  std::size_t rank = 0;
  for (std::size_t c = 0; c < predicted.size(); ++c) {
    if (predicted[c] > predicted[e] || (predicted[c] == predicted[e] && c < e)) ++rank;
  }
  const std::size_t kk = std::min<std::size_t>(std::max(k, 1), predicted.size());
  return rank < kk;
}

std::vector<double> topk_accuracy(const GcnModel& model, std::span<const TrainingExample> dataset,
                                  std::span<const int> ks) {
  std::vector<double> hits(ks.size(), 0.0);
  long count = 0;
  for (const auto& ex : dataset) {
    if (ex.kind != ExampleKind::kBranching) {
      throw std::invalid_argument("topk_accuracy needs branching examples");
    }
    const auto p = branching_distribution(model, forward(model, ex.graph, false), ex.candidates);
    for (std::size_t j = 0; j < ks.size(); ++j) hits[j] += topk_hit(p, ex.expert, ks[j]);
    ++count;
  }
  for (double& h : hits) h = count > 0 ? h / count : 0.0;
  return hits;
}

void write_dataset(const std::filesystem::path& dir, std::span<const TrainingExample> examples) {
  std::filesystem::create_directories(dir);
  std::string body;
  long diving = 0;
  for (const auto& ex : examples) {
    body += to_json(ex).dump();
    body += '\n';
    diving += ex.kind == ExampleKind::kDiving;
  }
  write_text_file(dir / "examples.jsonl", body);
  nlohmann::json index;
  index["format"] = "neuromip.dataset";
  index["version"] = 1;
  index["feature_schema"] = kFeatureSchema;
  index["file"] = "examples.jsonl";
  index["count"] = examples.size();
  index["diving"] = diving;
  index["branching"] = static_cast<long>(examples.size()) - diving;
  write_text_file(dir / "index.json", index.dump(2) + "\n");
}

std::vector<TrainingExample> read_dataset(const std::filesystem::path& dir_or_file) {
  std::filesystem::path file = dir_or_file;
  if (std::filesystem::is_directory(dir_or_file)) {
    nlohmann::json index;
    try {
      index = nlohmann::json::parse(read_text_file(dir_or_file / "index.json"));
    } catch (const nlohmann::json::exception& e) {
      throw DataError((dir_or_file / "index.json").string() + ": " + e.what());
    }
    if (index.value("format", std::string()) != "neuromip.dataset") {
      throw DataError(dir_or_file.string() + ": index.json is not a neuromip.dataset index");
    }
    if (index.value("feature_schema", std::string()) != kFeatureSchema) {
      throw DataError(dir_or_file.string() + ": dataset feature schema does not match '" +
                      std::string(kFeatureSchema) + "'");
    }
    file = dir_or_file / index.value("file", std::string("examples.jsonl"));
  }
  std::istringstream in(read_text_file(file));
  std::vector<TrainingExample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(example_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, file.string() + ": " + e.what());
    } catch (const DataError& e) {
      throw ParseError(lineno, file.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace neuromip
