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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "neuromip/imitation.hpp"
#include "neuromip/mps_io.hpp"
#include "neuromip/synth.hpp"

using namespace neuromip;

namespace {

std::vector<MipInstance> small_family(int count, std::uint64_t seed) {
  return generate_family(FamilyParams{Family::kKnapsack, 12, 2}, count, seed);
}

GcnModel small_model(std::uint64_t seed) {
  GcnConfig c;
  c.layers = 1;
  c.hidden = 8;
  c.head_hidden = 8;
  return GcnModel::init(c, seed);
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("neuromip_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("expert data without random moves follows the expert") {
  const auto instances = small_family(3, 40);
  BranchingDataOptions o;
  o.random_prob = 0.0;
  o.repeats = 1;
  const auto data = generate_branching_data(instances, o);
  REQUIRE_FALSE(data.empty());

  // One example per branching node of a plain expert solve.
  long nodes_with_branching = 0;
  for (const auto& m : instances) {
    std::vector<TrainingExample> only;
    for (const auto& ex : data) {
      if (ex.instance == m.name) only.push_back(ex);
    }
    FsbPolicy expert;
    const SolveResult r = solve(m, expert);
    CHECK(static_cast<long>(only.size()) <= r.node_count);
    nodes_with_branching += static_cast<long>(only.size());
  }
  CHECK(nodes_with_branching == static_cast<long>(data.size()));

  for (const auto& ex : data) {
    CHECK(ex.kind == ExampleKind::kBranching);
    CHECK(ex.expert.size() == ex.candidates.size());
    CHECK(std::accumulate(ex.expert.begin(), ex.expert.end(), 0.0) == doctest::Approx(1.0));
    CHECK(ex.graph.has_lp_features);
  }
}

TEST_CASE("stored expert distributions are reproducible from the stored node") {
  const auto instances = small_family(2, 50);
  BranchingDataOptions o;
  o.repeats = 1;
  const auto data = generate_branching_data(instances, o);
  REQUIRE_FALSE(data.empty());
  for (const auto& ex : data) {
    const MipInstance& m = ex.instance == instances[0].name ? instances[0] : instances[1];
    const LpProblem node = LpProblem::from_mip(m).with_bounds(ex.lower, ex.upper);
    const LpSolution lp = exact_lp_oracle(node);
    const BranchScores s = fsb_scores(node, lp, ex.candidates, FsbOptions{});
    CHECK(s.expert_dist == ex.expert);
  }
}

TEST_CASE("repeats, node limit and determinism") {
  const auto instances = small_family(2, 60);
  BranchingDataOptions o;
  o.repeats = 1;
  o.random_prob = 0.5;
  const auto one = generate_branching_data(instances, o);
  CHECK(one == generate_branching_data(instances, o));
  o.jobs = 2;
  CHECK(one == generate_branching_data(instances, o));

  o.repeats = 3;
  const auto three = generate_branching_data(instances, o);
  CHECK(three.size() > one.size());

  o.node_limit = 1;
  const auto root_only = generate_branching_data(instances, o);
  CHECK(root_only.size() <= 6);
  for (const auto& ex : root_only) CHECK(ex.node == 1);

  o.repeats = 0;
  CHECK_THROWS_AS(generate_branching_data(instances, o), std::invalid_argument);
}

TEST_CASE("random nodes are dropped when not logged") {
  const auto instances = small_family(2, 70);
  BranchingDataOptions o;
  o.repeats = 1;
  o.random_prob = 1.0;
  o.log_random_nodes = false;
  CHECK(generate_branching_data(instances, o).empty());
  o.log_random_nodes = true;
  CHECK_FALSE(generate_branching_data(instances, o).empty());
}

TEST_CASE("a DAgger round labels the learner's own trajectory") {
  const auto instances = small_family(3, 80);
  BranchingDataOptions o;
  o.random_prob = 0.0;
  o.repeats = 1;
  const auto expert = generate_branching_data(instances, o);
  const auto dagger = dagger_round(small_model(1), instances, o);
  REQUIRE_FALSE(dagger.empty());
  for (const auto& ex : dagger) {
    CHECK(std::accumulate(ex.expert.begin(), ex.expert.end(), 0.0) == doctest::Approx(1.0));
  }
  // An untrained learner wanders off the expert's tree somewhere.
  bool differs = dagger.size() != expert.size();
  for (std::size_t k = 0; !differs && k < dagger.size(); ++k) {
    differs = dagger[k].lower != expert[k].lower || dagger[k].upper != expert[k].upper;
  }
  CHECK(differs);
}

TEST_CASE("diving labels and importance weights") {
  // Two optimal assignments with equal objective: min -x0 - x1, x0 + x1 <= 1.
  MipBuilder b("tie");
  b.add_var(0, 1, -1.0, VarKind::kBinary);
  b.add_var(0, 1, -1.0, VarKind::kBinary);
  b.add_row(-kInf, 1.0, {{0, 1.0}, {1, 1.0}});
  const MipInstance tie = b.build();
  const auto w = importance_weights(std::vector<double>{-1.0, -1.0});
  CHECK(w[0] == 0.5);
  CHECK(w[1] == 0.5);

  // Solved at the root: one assignment with weight 1.
  MipBuilder r("root");
  r.add_var(0, 1, -1.0, VarKind::kBinary);
  r.add_var(0, 1, 2.0, VarKind::kBinary);
  const MipInstance root = r.build();

  // Infeasible (binary x0 >= 2): dropped.
  MipBuilder f("infeasible");
  f.add_var(0, 1, 1.0, VarKind::kBinary);
  f.add_row(2.0, kInf, {{0, 1.0}});
  const MipInstance infeasible = f.build();

  std::vector<std::string> dropped;
  const auto labels =
      collect_diving_labels({tie, root, infeasible}, SolveLimits{}, 3, "pseudocost", &dropped);
  REQUIRE(labels.size() == 2);
  CHECK(dropped == std::vector<std::string>{"infeasible"});
  for (const auto& l : labels) {
    CHECK(std::accumulate(l.weights.begin(), l.weights.end(), 0.0) == doctest::Approx(1.0));
  }
  CHECK(labels[1].instance == "root");
  REQUIRE(labels[1].assignments.size() == 1);
  CHECK(labels[1].weights[0] == 1.0);
  CHECK(labels[1].assignments[0] == std::vector<double>{1.0, 0.0});

  const auto ex = diving_examples(root, labels[1]);
  REQUIRE(ex.size() == 1);
  CHECK(ex[0].kind == ExampleKind::kDiving);
  CHECK(ex[0].int_vars == std::vector<int>{0, 1});
  CHECK(ex[0].values == std::vector<double>{1.0, 0.0});
  CHECK(ex[0].weight == 1.0);
}

TEST_CASE("top-k hits") {
  const std::vector<double> expert = {0.1, 0.6, 0.3};
  CHECK(topk_hit(std::vector<double>{0.2, 0.5, 0.3}, expert, 1));
  CHECK_FALSE(topk_hit(std::vector<double>{0.5, 0.2, 0.3}, expert, 1));
  CHECK_FALSE(topk_hit(std::vector<double>{0.5, 0.2, 0.3}, expert, 2));
  CHECK(topk_hit(std::vector<double>{0.5, 0.2, 0.3}, expert, 3));
  // k beyond the candidate count is clamped: always a hit.
  CHECK(topk_hit(std::vector<double>{0.5, 0.2, 0.3}, expert, 10));
  // k below one behaves as one.
  CHECK_FALSE(topk_hit(std::vector<double>{0.5, 0.2, 0.3}, expert, 0));
  // Predicted ties go to the lower index.
  CHECK_FALSE(topk_hit(std::vector<double>{0.4, 0.4, 0.2}, expert, 1));
  CHECK(topk_hit(std::vector<double>{0.4, 0.4, 0.2}, std::vector<double>{0.5, 0.5, 0.0}, 1));
  CHECK_THROWS_AS(topk_hit(std::vector<double>{0.5}, expert, 1), std::invalid_argument);
}

TEST_CASE("top-k accuracy of the expert itself is one") {
  const auto data = generate_branching_data(small_family(2, 90), BranchingDataOptions{});
  REQUIRE_FALSE(data.empty());
  for (const auto& ex : data) CHECK(topk_hit(ex.expert, ex.expert, 1));
  const int ks[] = {1, 3, 100};
  const auto acc = topk_accuracy(small_model(2), data, ks);
  REQUIRE(acc.size() == 3);
  CHECK(acc[0] <= acc[1]);
  CHECK(acc[2] == 1.0);
}

TEST_CASE("dataset directory round trip") {
  const auto instances = small_family(1, 100);
  BranchingDataOptions o;
  o.repeats = 1;
  auto data = generate_branching_data(instances, o);
  const auto labels = collect_diving_labels(instances, SolveLimits{}, 1);
  REQUIRE(labels.size() == 1);
  const auto dive = diving_examples(instances[0], labels[0]);
  data.insert(data.end(), dive.begin(), dive.end());

  const auto dir = temp_dir("dataset");
  write_dataset(dir, data);
  CHECK(std::filesystem::exists(dir / "index.json"));
  CHECK(read_dataset(dir) == data);
  CHECK(read_dataset(dir / "examples.jsonl") == data);

  // A corrupt record reports its line.
  {
    std::ofstream out(dir / "examples.jsonl", std::ios::app);
    out << "{not json\n";
  }
  try {
    read_dataset(dir);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == static_cast<int>(data.size()) + 1);
  }

  // Schema mismatch is a data error.
  {
    std::ofstream out(dir / "index.json");
    out << R"({"format": "neuromip.dataset", "version": 1, "feature_schema": "other"})";
  }
  CHECK_THROWS_AS(read_dataset(dir), DataError);
  std::filesystem::remove_all(dir);
}
