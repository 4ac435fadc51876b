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

#include "neuromip/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

#include "neuromip/mps_io.hpp"

namespace neuromip {

namespace {

std::size_t sz(long a, long b) { return static_cast<std::size_t>(a) * static_cast<std::size_t>(b); }

DenseLayer make_dense(int in, int out, std::mt19937_64& rng) {
  DenseLayer d;
  d.in = in;
  d.out = out;
  d.weight.resize(sz(in, out));
  d.bias.assign(out, 0.0);
  const double a = std::sqrt(6.0 / (in + out));
  std::uniform_real_distribution<double> u(-a, a);
  for (double& w : d.weight) w = u(rng);
  return d;
}

Mlp make_mlp(int in, int hidden, int out, std::mt19937_64& rng) {
  Mlp m;
  m.first = make_dense(in, hidden, rng);
  m.second = make_dense(hidden, out, rng);
  return m;
}

void zero(DenseLayer& d) {
  std::fill(d.weight.begin(), d.weight.end(), 0.0);
  std::fill(d.bias.begin(), d.bias.end(), 0.0);
}

void zero(Mlp& m) {
  zero(m.first);
  zero(m.second);
}

// y (rows x out) = x W^T + b; x has row stride ldx.
void dense_forward(const DenseLayer& layer, const double* x, int ldx, int rows, double* y,
                   bool parallel) {
#pragma omp parallel for schedule(static) if (parallel)
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + sz(r, ldx);
    double* yr = y + sz(r, layer.out);
    for (int o = 0; o < layer.out; ++o) {
      const double* w = layer.weight.data() + sz(o, layer.in);
      double acc = layer.bias[o];
      for (int i = 0; i < layer.in; ++i) acc += w[i] * xr[i];
      yr[o] = acc;
    }
  }
}

// g += gradient of the layer given dy; dx (stride lddx) += dy W when non-null.
void dense_backward(const DenseLayer& layer, const double* x, int ldx, int rows, const double* dy,
                    DenseLayer& g, double* dx, int lddx, bool parallel) {
#pragma omp parallel for schedule(static) if (parallel)
  for (int o = 0; o < layer.out; ++o) {
    double* gw = g.weight.data() + sz(o, layer.in);
    double gb = 0.0;
    for (int r = 0; r < rows; ++r) {
      const double d = dy[sz(r, layer.out) + o];
      if (d == 0.0) continue;
      gb += d;
      const double* xr = x + sz(r, ldx);
      for (int i = 0; i < layer.in; ++i) gw[i] += d * xr[i];
    }
    g.bias[o] += gb;
  }
  if (dx == nullptr) return;
#pragma omp parallel for schedule(static) if (parallel)
  for (int r = 0; r < rows; ++r) {
    const double* dyr = dy + sz(r, layer.out);
    double* dxr = dx + sz(r, lddx);
    for (int o = 0; o < layer.out; ++o) {
      const double d = dyr[o];
      if (d == 0.0) continue;
      const double* w = layer.weight.data() + sz(o, layer.in);
      for (int i = 0; i < layer.in; ++i) dxr[i] += d * w[i];
    }
  }
}

// out = A x with every neighbour sum taken in sorted order, so the result
// does not depend on node numbering.
void spmm_canonical(const CsrMatrix& a, const double* x, int cols, double* out, bool parallel) {
#pragma omp parallel if (parallel)
  {
    std::vector<double> terms;
#pragma omp for schedule(static)
    for (int r = 0; r < a.rows; ++r) {
      const int begin = a.row_ptr[r];
      const int end = a.row_ptr[r + 1];
      for (int h = 0; h < cols; ++h) {
        terms.clear();
        for (int p = begin; p < end; ++p) terms.push_back(a.values[p] * x[sz(a.col_idx[p], cols) + h]);
        std::sort(terms.begin(), terms.end());
        double acc = 0.0;
        for (double t : terms) acc += t;
        out[sz(r, cols) + h] = acc;
      }
    }
  }
}

// out += A^T x; A is symmetric by construction so a row gather suffices.
void spmm_transpose_add(const CsrMatrix& a, const double* x, int cols, double* out, bool parallel) {
#pragma omp parallel for schedule(static) if (parallel)
  for (int r = 0; r < a.rows; ++r) {
    double* o = out + sz(r, cols);
    for (int p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      const double v = a.values[p];
      const double* xr = x + sz(a.col_idx[p], cols);
      for (int h = 0; h < cols; ++h) o[h] += v * xr[h];
    }
  }
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

const Mlp& head_of(const GcnModel& m, HeadKind k) {
  switch (k) {
    case HeadKind::kDiving: return m.diving_head;
    case HeadKind::kSelective: return m.selective_head;
    case HeadKind::kBranching: return m.branching_head;
  }
  return m.branching_head;
}

struct HeadEval {
  int in = 0;
  std::vector<double> input, pre, act, out;
};

HeadEval eval_head(const Mlp& head, const ForwardCache& cache, std::span<const HeadQuery> queries,
                   bool parallel) {
  HeadEval e;
  const int q = static_cast<int>(queries.size());
  const int w = cache.width;
  e.in = head.first.in;
  const bool with_bit = e.in == w + 1;
  e.input.assign(sz(q, e.in), 0.0);
  for (int k = 0; k < q; ++k) {
    const int node = queries[k].node;
    if (node < 0 || node >= cache.num_nodes) throw std::out_of_range("head query node out of range");
    std::copy_n(cache.embeddings.data() + sz(node, w), w, e.input.data() + sz(k, e.in));
    if (with_bit) e.input[sz(k, e.in) + w] = queries[k].bit;
  }
  const int hh = head.first.out;
  e.pre.resize(sz(q, hh));
  dense_forward(head.first, e.input.data(), e.in, q, e.pre.data(), parallel);
  e.act.resize(e.pre.size());
  for (std::size_t i = 0; i < e.pre.size(); ++i) e.act[i] = std::max(e.pre[i], 0.0);
  e.out.resize(q);
  dense_forward(head.second, e.act.data(), hh, q, e.out.data(), parallel);
  return e;
}

void backprop_head(const Mlp& head, const HeadEval& e, std::span<const HeadQuery> queries,
                   std::span<const double> dt, Mlp& g, std::vector<double>& demb, int width,
                   bool parallel) {
  const int q = static_cast<int>(queries.size());
  const int hh = head.first.out;
  std::vector<double> dact(sz(q, hh), 0.0);
  dense_backward(head.second, e.act.data(), hh, q, dt.data(), g.second, dact.data(), hh, parallel);
  for (std::size_t i = 0; i < dact.size(); ++i) {
    if (e.pre[i] <= 0.0) dact[i] = 0.0;
  }
  std::vector<double> din(sz(q, e.in), 0.0);
  dense_backward(head.first, e.input.data(), e.in, q, dact.data(), g.first, din.data(), e.in,
                 parallel);
  // Sequential scatter: several queries may share a node.
  for (int k = 0; k < q; ++k) {
    double* d = demb.data() + sz(queries[k].node, width);
    const double* s = din.data() + sz(k, e.in);
    for (int i = 0; i < width; ++i) d[i] += s[i];
  }
}

void backward_gcn(const GcnModel& model, const ForwardCache& cache, const BipartiteGraph& graph,
                  std::vector<double>& demb, GcnModel& grad, bool parallel) {
  const GcnConfig& c = model.config;
  const int n = cache.num_nodes;
  const int e = cache.width;
  const int h = c.hidden;
  std::vector<double> dagg(sz(n, h)), dmlp(sz(n, h)), dact(sz(n, h));
  for (int l = c.layers - 1; l >= 0; --l) {
    const int in_w = c.input_dim + l * h;
    const int in_off = e - in_w;
    const int out_off = in_off - h;
    const LayerCache& lc = cache.layers[l];
    if (c.layer_norm) {
      const auto& gamma = model.norms[l].gamma;
      auto& gg = grad.norms[l].gamma;
      auto& gb = grad.norms[l].beta;
      for (int r = 0; r < n; ++r) {
        const double* dy = demb.data() + sz(r, e) + out_off;
        const double* xh = lc.xhat.data() + sz(r, h);
        double mean_d = 0.0, mean_dx = 0.0;
        for (int k = 0; k < h; ++k) {
          gg[k] += dy[k] * xh[k];
          gb[k] += dy[k];
          const double dxh = dy[k] * gamma[k];
          mean_d += dxh;
          mean_dx += dxh * xh[k];
        }
        mean_d /= h;
        mean_dx /= h;
        double* da = dagg.data() + sz(r, h);
        for (int k = 0; k < h; ++k) {
          da[k] = lc.rstd[r] * (dy[k] * gamma[k] - mean_d - xh[k] * mean_dx);
        }
      }
    } else {
      for (int r = 0; r < n; ++r) {
        std::copy_n(demb.data() + sz(r, e) + out_off, h, dagg.data() + sz(r, h));
      }
    }
    std::fill(dmlp.begin(), dmlp.end(), 0.0);
    spmm_transpose_add(graph.adjacency, dagg.data(), h, dmlp.data(), parallel);
    std::fill(dact.begin(), dact.end(), 0.0);
    const Mlp& f = model.layers[l];
    Mlp& gf = grad.layers[l];
    dense_backward(f.second, lc.act.data(), h, n, dmlp.data(), gf.second, dact.data(), h, parallel);
    for (std::size_t i = 0; i < dact.size(); ++i) {
      if (lc.pre[i] <= 0.0) dact[i] = 0.0;
    }
    dense_backward(f.first, cache.embeddings.data() + in_off, e, n, dact.data(), gf.first,
                   demb.data() + in_off, e, parallel);
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

void GcnConfig::validate() const {
  if (input_dim <= 0 || layers < 0 || hidden <= 0 || head_hidden <= 0 || !(ln_eps > 0.0)) {
    throw std::invalid_argument("GcnConfig: widths must be positive and layers >= 0");
  }
}

GcnModel GcnModel::init(const GcnConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  GcnModel m;
  m.config = config;
  for (int l = 0; l < config.layers; ++l) {
    m.layers.push_back(make_mlp(config.input_dim + l * config.hidden, config.hidden,
                                config.hidden, rng));
    m.norms.push_back({std::vector<double>(config.hidden, 1.0),
                       std::vector<double>(config.hidden, 0.0)});
  }
  const int e = config.embedding_dim();
  m.diving_head = make_mlp(e + 1, config.head_hidden, 1, rng);
  m.selective_head = make_mlp(e + 1, config.head_hidden, 1, rng);
  m.branching_head = make_mlp(e, config.head_hidden, 1, rng);
  return m;
}

GcnModel GcnModel::zeros_like() const {
  GcnModel z = *this;
  for (auto& l : z.layers) zero(l);
  for (auto& n : z.norms) {
    std::fill(n.gamma.begin(), n.gamma.end(), 0.0);
    std::fill(n.beta.begin(), n.beta.end(), 0.0);
  }
  zero(z.diving_head);
  zero(z.selective_head);
  zero(z.branching_head);
  return z;
}

std::vector<ParamRef> GcnModel::parameters() {
  std::vector<ParamRef> out;
  auto add_mlp = [&out](const std::string& prefix, Mlp& m) {
    out.push_back({prefix + ".first.weight", &m.first.weight});
    out.push_back({prefix + ".first.bias", &m.first.bias});
    out.push_back({prefix + ".second.weight", &m.second.weight});
    out.push_back({prefix + ".second.bias", &m.second.bias});
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    add_mlp("layer" + std::to_string(l), layers[l]);
    out.push_back({"norm" + std::to_string(l) + ".gamma", &norms[l].gamma});
    out.push_back({"norm" + std::to_string(l) + ".beta", &norms[l].beta});
  }
  add_mlp("diving_head", diving_head);
  add_mlp("selective_head", selective_head);
  add_mlp("branching_head", branching_head);
  return out;
}

std::size_t GcnModel::num_parameters() const {
  std::size_t total = 0;
  for (const auto& p : const_cast<GcnModel*>(this)->parameters()) total += p.values->size();
  return total;
}

ForwardCache forward(const GcnModel& model, const BipartiteGraph& graph, bool parallel) {
  const GcnConfig& c = model.config;
  if (graph.schema != kFeatureSchema || graph.dim != c.input_dim) {
    throw std::invalid_argument("forward: graph schema '" + graph.schema + "' width " +
                                std::to_string(graph.dim) + " does not match model width " +
                                std::to_string(c.input_dim));
  }
  const int n = graph.num_nodes();
  if (graph.adjacency.rows != n || graph.adjacency.cols != n ||
      static_cast<int>(graph.features.size()) != n * graph.dim) {
    throw std::invalid_argument("forward: graph arrays have inconsistent sizes");
  }
  ForwardCache cache;
  cache.num_nodes = n;
  cache.width = c.embedding_dim();
  const int e = cache.width;
  const int h = c.hidden;
  cache.embeddings.assign(sz(n, e), 0.0);
  for (int r = 0; r < n; ++r) {
    std::copy_n(graph.features.data() + sz(r, c.input_dim), c.input_dim,
                cache.embeddings.data() + sz(r, e) + (e - c.input_dim));
  }
  cache.layers.resize(c.layers);
  for (int l = 0; l < c.layers; ++l) {
    const int in_off = e - (c.input_dim + l * h);
    const int out_off = in_off - h;
    LayerCache& lc = cache.layers[l];
    const Mlp& f = model.layers[l];
    lc.pre.resize(sz(n, h));
    dense_forward(f.first, cache.embeddings.data() + in_off, e, n, lc.pre.data(), parallel);
    lc.act.resize(lc.pre.size());
    for (std::size_t i = 0; i < lc.pre.size(); ++i) lc.act[i] = std::max(lc.pre[i], 0.0);
    lc.mlp.resize(sz(n, h));
    dense_forward(f.second, lc.act.data(), h, n, lc.mlp.data(), parallel);
    lc.agg.resize(sz(n, h));
    spmm_canonical(graph.adjacency, lc.mlp.data(), h, lc.agg.data(), parallel);
    if (!c.layer_norm) {
      for (int r = 0; r < n; ++r) {
        std::copy_n(lc.agg.data() + sz(r, h), h, cache.embeddings.data() + sz(r, e) + out_off);
      }
      continue;
    }
    lc.xhat.resize(sz(n, h));
    lc.rstd.resize(n);
    const auto& gamma = model.norms[l].gamma;
    const auto& beta = model.norms[l].beta;
    for (int r = 0; r < n; ++r) {
      const double* a = lc.agg.data() + sz(r, h);
      double mean = 0.0;
      for (int k = 0; k < h; ++k) mean += a[k];
      mean /= h;
      double var = 0.0;
      for (int k = 0; k < h; ++k) var += (a[k] - mean) * (a[k] - mean);
      var /= h;
      const double rstd = 1.0 / std::sqrt(var + c.ln_eps);
      lc.rstd[r] = rstd;
      double* xh = lc.xhat.data() + sz(r, h);
      double* out = cache.embeddings.data() + sz(r, e) + out_off;
      for (int k = 0; k < h; ++k) {
        xh[k] = (a[k] - mean) * rstd;
        out[k] = gamma[k] * xh[k] + beta[k];
      }
    }
  }
  return cache;
}

std::vector<double> head_logits(const GcnModel& model, HeadKind head, const ForwardCache& cache,
                                std::span<const HeadQuery> queries) {
  return eval_head(head_of(model, head), cache, queries, false).out;
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

std::vector<double> softmax_neg(std::span<const double> t) {
  if (t.empty()) throw std::invalid_argument("softmax over an empty candidate set");
  // Max of -t is -min(t).
  const double lo = *std::min_element(t.begin(), t.end());
  std::vector<double> p(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) p[k] = std::exp(-(t[k] - lo));
  const double total = canonical_sum(p);
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> branching_distribution(const GcnModel& model, const ForwardCache& cache,
                                           std::span<const int> candidates) {
  std::vector<HeadQuery> q;
  for (int c : candidates) q.push_back({c, 0.0});
  return softmax_neg(head_logits(model, HeadKind::kBranching, cache, q));
}

std::vector<double> importance_weights(std::span<const double> objectives) {
  if (objectives.empty()) throw std::invalid_argument("importance weights of an empty set");
  const double lo = *std::min_element(objectives.begin(), objectives.end());
  std::vector<double> e(objectives.size());
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = std::exp(-(objectives[k] - lo));
  const double lse = std::log(canonical_sum(e));
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = std::exp(-(objectives[k] - lo) - lse);
  return e;
}

std::vector<int> integer_bits(double value, double lo, double hi, int max_bits) {
  std::vector<int> bits;
  if (!std::isfinite(lo) || !std::isfinite(hi)) return bits;
  for (int j = 0; j < max_bits && hi > lo; ++j) {
    const double w = hi - lo;
    const double up_lo = lo + std::ceil(w / 2.0);
    if (value >= up_lo) {
      bits.push_back(1);
      lo = up_lo;
    } else {
      bits.push_back(0);
      hi = lo + std::floor(w / 2.0);
    }
  }
  return bits;
}

double bit_input(int j, int max_bits) {
  return max_bits > 0 ? static_cast<double>(j + 1) / max_bits : 0.0;
}

std::vector<DivingUnit> diving_units(const TrainingExample& ex, int max_bits) {
  std::vector<DivingUnit> units;
  for (std::size_t k = 0; k < ex.int_vars.size(); ++k) {
    const int var = ex.int_vars[k];
    if (ex.is_binary[k]) {
      units.push_back({var, 0.0, ex.values[k] >= 0.5 ? 1 : 0});
      continue;
    }
    const auto bits = integer_bits(ex.values[k], ex.lower[k], ex.upper[k], max_bits);
    for (std::size_t j = 0; j < bits.size(); ++j) {
      units.push_back({var, bit_input(static_cast<int>(j), max_bits), bits[j]});
    }
  }
  return units;
}

namespace {

double example_loss_scaled(const GcnModel& model, const TrainingExample& ex,
                           const LossConfig& cfg, GcnModel* grad, bool parallel, double scale) {
  const bool branching = cfg.kind == LossKind::kBranching;
  if (branching != (ex.kind == ExampleKind::kBranching)) {
    throw std::invalid_argument("loss kind does not match the example kind");
  }
  const ForwardCache cache = forward(model, ex.graph, parallel);
  std::vector<double> demb;
  if (grad != nullptr) demb.assign(cache.embeddings.size(), 0.0);
  double loss = 0.0;

  if (branching) {
    if (ex.candidates.empty() || ex.expert.size() != ex.candidates.size()) {
      throw std::invalid_argument("branching example needs matching candidates and targets");
    }
    std::vector<HeadQuery> q;
    for (int c : ex.candidates) q.push_back({c, 0.0});
    const HeadEval he = eval_head(model.branching_head, cache, q, parallel);
    const auto& t = he.out;
    const double lo = *std::min_element(t.begin(), t.end());
    std::vector<double> e(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) e[k] = std::exp(-(t[k] - lo));
    const double lse = std::log(canonical_sum(e)) - lo;
    std::vector<double> dt(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double logp = -t[k] - lse;
      if (ex.expert[k] > 0.0) loss -= ex.expert[k] * logp;
      dt[k] = scale * (ex.expert[k] - std::exp(logp));
    }
    if (grad != nullptr) {
      backprop_head(model.branching_head, he, q, dt, grad->branching_head, demb, cache.width,
                    parallel);
    }
  } else {
    const auto units = diving_units(ex, cfg.bit_budget);
    if (units.empty()) return 0.0;
    std::vector<HeadQuery> q;
    for (const auto& u : units) q.push_back({u.var, u.bit});
    const HeadEval hd = eval_head(model.diving_head, cache, q, parallel);
    const std::size_t nu = units.size();
    std::vector<double> nll(nu), dnll_dt(nu);
    for (std::size_t k = 0; k < nu; ++k) {
      const double t = hd.out[k];
      nll[k] = units[k].target == 1 ? softplus(-t) : softplus(t);
      dnll_dt[k] = sigmoid(t) - units[k].target;
    }
    const double w = ex.weight;
    std::vector<double> dt(nu);
    if (cfg.kind == LossKind::kDiving) {
      for (std::size_t k = 0; k < nu; ++k) {
        loss += w * nll[k];
        dt[k] = scale * w * dnll_dt[k];
      }
      if (grad != nullptr) {
        backprop_head(model.diving_head, hd, q, dt, grad->diving_head, demb, cache.width, parallel);
      }
    } else {
      const HeadEval hs = eval_head(model.selective_head, cache, q, parallel);
      std::vector<double> y(nu);
      double sum_y = 0.0, sum_ynll = 0.0;
      for (std::size_t k = 0; k < nu; ++k) {
        y[k] = sigmoid(hs.out[k]);
        sum_y += y[k];
        sum_ynll += y[k] * nll[k];
      }
      const bool floored = sum_y < kCoverageFloor;
      const double denom = floored ? kCoverageFloor : sum_y;
      const double gap = cfg.coverage - sum_y / static_cast<double>(nu);
      const double pen = gap > 0.0 ? gap * gap : 0.0;
      loss = w * (sum_ynll / denom + cfg.lambda * pen);
      std::vector<double> ds(nu);
      for (std::size_t k = 0; k < nu; ++k) {
        dt[k] = scale * w * y[k] / denom * dnll_dt[k];
        double dy = nll[k] / denom;
        if (!floored) dy -= sum_ynll / (denom * denom);
        if (gap > 0.0) dy -= 2.0 * cfg.lambda * gap / static_cast<double>(nu);
        ds[k] = scale * w * dy * y[k] * (1.0 - y[k]);
      }
      if (grad != nullptr) {
        backprop_head(model.diving_head, hd, q, dt, grad->diving_head, demb, cache.width, parallel);
        backprop_head(model.selective_head, hs, q, ds, grad->selective_head, demb, cache.width,
                      parallel);
      }
    }
  }
  if (grad != nullptr) backward_gcn(model, cache, ex.graph, demb, *grad, parallel);
  return loss;
}

}  // namespace

double example_loss(const GcnModel& model, const TrainingExample& example,
                    const LossConfig& config, GcnModel* grad, bool parallel) {
  return example_loss_scaled(model, example, config, grad, parallel, 1.0);
}

double batch_loss(const GcnModel& model, std::span<const TrainingExample> batch,
                  const LossConfig& config, GcnModel* grad, bool parallel) {
  if (batch.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& ex : batch) total += example_loss_scaled(model, ex, config, grad, parallel, scale);
  return total * scale;
}

double loss_diving(const GcnModel& model, std::span<const TrainingExample> batch, int bit_budget) {
  return batch_loss(model, batch, {LossKind::kDiving, 0.0, 0.0, bit_budget});
}

double loss_selective(const GcnModel& model, std::span<const TrainingExample> batch,
                      double coverage, double lambda, int bit_budget) {
  return batch_loss(model, batch, {LossKind::kSelective, coverage, lambda, bit_budget});
}

double loss_branching(const GcnModel& model, std::span<const TrainingExample> batch) {
  return batch_loss(model, batch, {LossKind::kBranching});
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, long t, const AdamConfig& c) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw std::invalid_argument("adam_update: size mismatch");
  }
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grads[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grads[i] * grads[i];
    params[i] -= c.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + c.eps);
  }
}

AdamOptimizer::AdamOptimizer(const GcnModel& model, AdamConfig config) : config_(config) {
  GcnModel copy = model;
  for (const auto& p : copy.parameters()) {
    m_.emplace_back(p.values->size(), 0.0);
    v_.emplace_back(p.values->size(), 0.0);
  }
}

void AdamOptimizer::step(GcnModel& model, GcnModel& grad) {
  auto params = model.parameters();
  auto grads = grad.parameters();
  if (params.size() != m_.size() || grads.size() != params.size()) {
    throw std::invalid_argument("AdamOptimizer: model shape changed");
  }
  for (const auto& g : grads) {
    for (double v : *g.values) {
      if (!std::isfinite(v)) throw std::runtime_error("non-finite gradient in " + g.name);
    }
  }
  ++t_;
  for (std::size_t k = 0; k < params.size(); ++k) {
    adam_update(*params[k].values, *grads[k].values, m_[k], v_[k], t_, config_);
  }
}

GcnModel train(const std::vector<TrainingExample>& dataset, const GcnModel& initial,
               const TrainConfig& config, std::vector<double>* loss_curve) {
  if (dataset.empty()) throw DataError("train: empty dataset");
  if (config.batch_size <= 0) throw std::invalid_argument("train: batch_size must be positive");
  for (const auto& ex : dataset) {
    if (ex.graph.schema != kFeatureSchema || ex.graph.dim != initial.config.input_dim) {
      throw DataError("train: example of instance '" + ex.instance +
                      "' has feature schema '" + ex.graph.schema + "' incompatible with the model");
    }
  }
  GcnModel model = initial;
  AdamOptimizer opt(model, config.adam);
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
  std::vector<TrainingExample> batch;
  for (long s = 0; s < config.steps; ++s) {
    batch.clear();
    for (int b = 0; b < config.batch_size; ++b) batch.push_back(dataset[pick(rng)]);
    GcnModel grad = model.zeros_like();
    const double loss = batch_loss(model, batch, config.loss, &grad, config.parallel);
    opt.step(model, grad);
    if (loss_curve != nullptr) loss_curve->push_back(loss);
  }
  return model;
}

std::string loss_curve_csv(std::span<const double> losses) {
  std::ostringstream os;
  os.precision(17);
  os << "step,loss\n";
  for (std::size_t k = 0; k < losses.size(); ++k) os << k + 1 << ',' << losses[k] << '\n';
  return os.str();
}

std::string schema_hash(const GcnConfig& c) {
  std::ostringstream os;
  os << kFeatureSchema << "|d=" << c.input_dim << "|l=" << c.layers << "|h=" << c.hidden
     << "|hh=" << c.head_hidden << "|ln=" << c.layer_norm;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(os.str())));
  return buf;
}

nlohmann::json to_json(const GcnModel& model) {
  const GcnConfig& c = model.config;
  nlohmann::json doc;
  doc["format"] = "neuromip.gcn";
  doc["version"] = 1;
  doc["feature_schema"] = kFeatureSchema;
  doc["schema_hash"] = schema_hash(c);
  doc["config"] = {{"input_dim", c.input_dim}, {"layers", c.layers},
                   {"hidden", c.hidden},       {"head_hidden", c.head_hidden},
                   {"layer_norm", c.layer_norm}, {"ln_eps", c.ln_eps}};
  nlohmann::json params = nlohmann::json::object();
  for (const auto& p : const_cast<GcnModel&>(model).parameters()) params[p.name] = *p.values;
  doc["params"] = std::move(params);
  return doc;
}

GcnModel model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "neuromip.gcn" || doc.at("version").get<int>() != 1) {
      throw DataError("not a version-1 neuromip.gcn checkpoint");
    }
    const auto& jc = doc.at("config");
    GcnConfig c;
    c.input_dim = jc.at("input_dim").get<int>();
    c.layers = jc.at("layers").get<int>();
    c.hidden = jc.at("hidden").get<int>();
    c.head_hidden = jc.at("head_hidden").get<int>();
    c.layer_norm = jc.at("layer_norm").get<bool>();
    c.ln_eps = jc.at("ln_eps").get<double>();
    if (doc.at("schema_hash").get<std::string>() != schema_hash(c)) {
      throw DataError("checkpoint schema hash does not match feature schema '" +
                      std::string(kFeatureSchema) + "'");
    }
    GcnModel m = GcnModel::init(c, 0);
    const auto& jp = doc.at("params");
    for (const auto& p : m.parameters()) {
      auto v = jp.at(p.name).get<std::vector<double>>();
      if (v.size() != p.values->size()) throw DataError("parameter " + p.name + " has wrong size");
      *p.values = std::move(v);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid model configuration: ") + e.what());
  }
}

void save_model(const GcnModel& model, const std::string& path) {
  write_text_file(path, to_json(model).dump());
}

GcnModel load_model(const std::string& path) {
  const std::string text = read_text_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return model_from_json(doc);
}

nlohmann::json to_json(const TrainingExample& ex) {
  nlohmann::json doc;
  doc["kind"] = ex.kind == ExampleKind::kDiving ? "diving" : "branching";
  doc["instance"] = ex.instance;
  doc["node"] = ex.node;
  doc["graph"] = to_json(ex.graph);
  nlohmann::json lo = nlohmann::json::array(), hi = nlohmann::json::array();
  for (double v : ex.lower) lo.push_back(encode_real(v));
  for (double v : ex.upper) hi.push_back(encode_real(v));
  doc["lower"] = std::move(lo);
  doc["upper"] = std::move(hi);
  if (ex.kind == ExampleKind::kDiving) {
    doc["int_vars"] = ex.int_vars;
    doc["values"] = ex.values;
    std::vector<int> bin(ex.is_binary.begin(), ex.is_binary.end());
    doc["is_binary"] = bin;
    doc["weight"] = ex.weight;
  } else {
    doc["candidates"] = ex.candidates;
    doc["expert"] = ex.expert;
  }
  return doc;
}

TrainingExample example_from_json(const nlohmann::json& doc) {
  try {
    TrainingExample ex;
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "diving") {
      ex.kind = ExampleKind::kDiving;
    } else if (kind == "branching") {
      ex.kind = ExampleKind::kBranching;
    } else {
      throw DataError("unknown example kind '" + kind + "'");
    }
    ex.instance = doc.value("instance", std::string());
    ex.node = doc.value("node", -1L);
    ex.graph = graph_from_json(doc.at("graph"));
    for (const auto& v : doc.at("lower")) ex.lower.push_back(decode_real(v));
    for (const auto& v : doc.at("upper")) ex.upper.push_back(decode_real(v));
    if (ex.kind == ExampleKind::kDiving) {
      ex.int_vars = doc.at("int_vars").get<std::vector<int>>();
      ex.values = doc.at("values").get<std::vector<double>>();
      for (int b : doc.at("is_binary").get<std::vector<int>>()) ex.is_binary.push_back(b != 0);
      ex.weight = doc.at("weight").get<double>();
      const std::size_t k = ex.int_vars.size();
      if (ex.values.size() != k || ex.lower.size() != k || ex.upper.size() != k ||
          ex.is_binary.size() != k) {
        throw DataError("diving example arrays have inconsistent sizes");
      }
    } else {
      ex.candidates = doc.at("candidates").get<std::vector<int>>();
      ex.expert = doc.at("expert").get<std::vector<double>>();
      if (ex.candidates.size() != ex.expert.size()) {
        throw DataError("branching example candidates and targets differ in length");
      }
    }
    for (int v : ex.kind == ExampleKind::kDiving ? ex.int_vars : ex.candidates) {
      if (v < 0 || v >= ex.graph.n_var) throw DataError("example references a missing variable");
    }
    return ex;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed training example: ") + e.what());
  }
}

std::size_t LearnedBranchingPolicy::select(const BranchContext& ctx) {
  const BipartiteGraph g = encode(ctx.instance, ctx.node.lower, ctx.node.upper,
                                  std::span<const double>(ctx.node_lp.x));
  const ForwardCache cache = forward(model_, g, false);
  std::vector<HeadQuery> q;
  for (int c : ctx.candidates) q.push_back({c, 0.0});
  const auto t = head_logits(model_, HeadKind::kBranching, cache, q);
  std::size_t best = 0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (t[k] < t[best]) best = k;
  }
  return best;
}

}  // namespace neuromip
