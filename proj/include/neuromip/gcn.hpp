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

// Graph convolutional network over the bipartite MIP graph.
//
//   Z(0) = U
//   Z(l+1) = LayerNorm(A f_l(Zc(l)))      f_l: Linear -> ReLU -> Linear
//   Zc(l+1) = [Z(l+1), Zc(l)]             concatenation skip
//
// An embedding row of the final Zc(L) is laid out [Z(L), ..., Z(1), U], so
// Zc(l) is always the trailing (input_dim + l * hidden) columns. Three
// scalar heads (Linear -> ReLU -> Linear) read embedding rows: diving and
// selective heads take one extra input (bit position), the branching head
// none. Gradients are computed by hand.

#ifndef NEUROMIP_GCN_HPP_
#define NEUROMIP_GCN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "neuromip/bnb.hpp"
#include "neuromip/graph.hpp"

namespace neuromip {

struct GcnConfig {
  int input_dim = kFeatureDim;
  int layers = 4;
  int hidden = 64;
  int head_hidden = 64;
  bool layer_norm = true;
  double ln_eps = 1e-5;

  int embedding_dim() const { return input_dim + layers * hidden; }
  void validate() const;
  friend bool operator==(const GcnConfig&, const GcnConfig&) = default;
};

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weight;  // out x in, row-major
  std::vector<double> bias;
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// second(relu(first(x))).
struct Mlp {
  DenseLayer first;
  DenseLayer second;
  friend bool operator==(const Mlp&, const Mlp&) = default;
};

struct LayerNormParams {
  std::vector<double> gamma;
  std::vector<double> beta;
  friend bool operator==(const LayerNormParams&, const LayerNormParams&) = default;
};

struct ParamRef {
  std::string name;
  std::vector<double>* values;
};

struct GcnModel {
  GcnConfig config;
  std::vector<Mlp> layers;
  std::vector<LayerNormParams> norms;
  Mlp diving_head;
  Mlp selective_head;
  Mlp branching_head;

  // Seeded uniform fan-in initialization; layer-norm gain 1, shift 0.
  static GcnModel init(const GcnConfig& config, std::uint64_t seed);
  // Same shapes, every parameter zero (used as a gradient accumulator).
  GcnModel zeros_like() const;

  std::vector<ParamRef> parameters();
  std::size_t num_parameters() const;
  friend bool operator==(const GcnModel&, const GcnModel&) = default;
};

// Activations kept for the backward pass.
struct LayerCache {
  std::vector<double> pre;     // N x H first-linear output
  std::vector<double> act;     // relu(pre)
  std::vector<double> mlp;     // N x H MLP output
  std::vector<double> agg;     // A * mlp
  std::vector<double> xhat;    // normalized agg
  std::vector<double> rstd;    // N
};

struct ForwardCache {
  int num_nodes = 0;
  int width = 0;                  // embedding_dim
  std::vector<double> embeddings; // N x width
  std::vector<LayerCache> layers;

  std::span<const double> row(int node) const {
    return {embeddings.data() + static_cast<std::size_t>(node) * width,
            static_cast<std::size_t>(width)};
  }
};

// Throws std::invalid_argument on a schema or width mismatch.
ForwardCache forward(const GcnModel& model, const BipartiteGraph& graph, bool parallel = true);

enum class HeadKind : std::uint8_t { kDiving, kSelective, kBranching };

// One head evaluation: embedding row `node` plus the bit-position input
// (ignored by the branching head).
struct HeadQuery {
  int node = 0;
  double bit = 0.0;
};

std::vector<double> head_logits(const GcnModel& model, HeadKind head, const ForwardCache& cache,
                                std::span<const HeadQuery> queries);

double sigmoid(double t);

// p_c = exp(-t_c) / sum exp(-t_c'), max-shifted. Throws on empty input.
std::vector<double> softmax_neg(std::span<const double> t);

// Branching distribution over node indices `candidates` (variable indices).
std::vector<double> branching_distribution(const GcnModel& model, const ForwardCache& cache,
                                           std::span<const int> candidates);

// w_j = exp(-obj_j) / sum_k exp(-obj_k) via log-sum-exp. Throws on empty.
std::vector<double> importance_weights(std::span<const double> objectives);

// Bit targets of integer value v in [lo, hi] walking midpoints most
// significant first: 1 -> lo += ceil(w/2), 0 -> hi = lo + floor(w/2).
// Stops when the interval is a single point or after max_bits.
std::vector<int> integer_bits(double value, double lo, double hi, int max_bits);

// Head input for bit j of a general integer; binaries use 0.
double bit_input(int j, int max_bits);

enum class ExampleKind : std::uint8_t { kDiving, kBranching };

struct TrainingExample {
  ExampleKind kind = ExampleKind::kBranching;
  BipartiteGraph graph;
  std::string instance;
  long node = -1;
  // Diving: bounds of int_vars. Branching: node bounds of every variable.
  std::vector<double> lower;
  std::vector<double> upper;
  // Diving: integer variables with their assigned values.
  std::vector<int> int_vars;
  std::vector<double> values;
  std::vector<char> is_binary;
  double weight = 1.0;
  // Branching: candidate variable indices and the expert distribution.
  std::vector<int> candidates;
  std::vector<double> expert;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

nlohmann::json to_json(const TrainingExample& example);
TrainingExample example_from_json(const nlohmann::json& doc);

// A predicted binary decision of a diving example.
struct DivingUnit {
  int var = 0;
  double bit = 0.0;
  int target = 0;
};
std::vector<DivingUnit> diving_units(const TrainingExample& example, int max_bits);

enum class LossKind : std::uint8_t { kDiving, kSelective, kBranching };

struct LossConfig {
  LossKind kind = LossKind::kBranching;
  double coverage = 0.5;
  // Weight of the coverage penalty; small values let coverage collapse.
  double lambda = 32.0;
  int bit_budget = 8;
};

inline constexpr double kCoverageFloor = 1e-6;

// Loss of one example. When `grad` is non-null the gradient is added to it.
double example_loss(const GcnModel& model, const TrainingExample& example,
                    const LossConfig& config, GcnModel* grad = nullptr, bool parallel = true);

// Mean example loss over a batch; gradient of the mean added to `grad`.
double batch_loss(const GcnModel& model, std::span<const TrainingExample> batch,
                  const LossConfig& config, GcnModel* grad = nullptr, bool parallel = true);

double loss_diving(const GcnModel& model, std::span<const TrainingExample> batch, int bit_budget = 8);
double loss_selective(const GcnModel& model, std::span<const TrainingExample> batch,
                      double coverage, double lambda, int bit_budget = 8);
double loss_branching(const GcnModel& model, std::span<const TrainingExample> batch);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One Adam update of a flat parameter vector; t is the 1-based step.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, long t, const AdamConfig& config);

class AdamOptimizer {
 public:
  AdamOptimizer(const GcnModel& model, AdamConfig config);
  // Throws std::runtime_error naming the group if a gradient is non-finite.
  void step(GcnModel& model, GcnModel& grad);
  long steps() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

struct TrainConfig {
  LossConfig loss;
  AdamConfig adam;
  int batch_size = 8;
  long steps = 1000;
  std::uint64_t seed = 0;
  bool parallel = true;
};

// Uniformly sampled batches; deterministic given the seed. Loss per step is
// appended to `loss_curve` when non-null. Throws DataError on schema mismatch
// or an empty dataset.
GcnModel train(const std::vector<TrainingExample>& dataset, const GcnModel& initial,
               const TrainConfig& config, std::vector<double>* loss_curve = nullptr);

std::string loss_curve_csv(std::span<const double> losses);

// Hash of the feature schema and architecture, stored in checkpoints.
std::string schema_hash(const GcnConfig& config);

nlohmann::json to_json(const GcnModel& model);
GcnModel model_from_json(const nlohmann::json& doc);
void save_model(const GcnModel& model, const std::string& path);
GcnModel load_model(const std::string& path);

// Picks the candidate with the largest p_phi, lowest position on ties.
class LearnedBranchingPolicy : public BranchingPolicy {
 public:
  explicit LearnedBranchingPolicy(GcnModel model) : model_(std::move(model)) {}
  std::string name() const override { return "learned"; }
  std::size_t select(const BranchContext& ctx) override;
  const GcnModel& model() const { return model_; }

 private:
  GcnModel model_;
};

}  // namespace neuromip

#endif  // NEUROMIP_GCN_HPP_
