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

// Batched ADMM over bound variants against the one-at-a-time loop.
// Range arguments: {batch size, number of variables}.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "neuromip/admm.hpp"
#include "neuromip/synth.hpp"

namespace {

using namespace neuromip;

struct Fixture {
  LpProblem lp;
  std::vector<BoundOverride> variants;
  AdmmConfig cfg;
};

Fixture make_fixture(int batch, int n) {
  Fixture f;
  f.lp = LpProblem::from_mip(generate_knapsack(n, std::max(2, n / 10), 11));
  f.cfg.rho = 10.0;
  f.cfg.max_iters = 100;
  f.cfg.eps_primal = 0.0;  // fixed work per solve
  f.cfg.eps_dual = 0.0;
  for (int k = 0; k < batch; ++k) {
    const int i = k % n;
    if ((k / n) % 2 == 0) {
      f.variants.push_back({i, 0.0, 0.0});
    } else {
      f.variants.push_back({i, 1.0, 1.0});
    }
  }
  return f;
}

void BM_SequentialLoop(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const KktFactor factor = factorize(f.lp.matrix, f.cfg.rho);
  for (auto _ : state) {
    for (const auto& v : f.variants) {
      std::vector<double> lo = f.lp.var_lower, hi = f.lp.var_upper;
      lo[v.var_index] = v.new_lb;
      hi[v.var_index] = v.new_ub;
      benchmark::DoNotOptimize(admm_solve(f.lp.with_bounds(lo, hi), f.cfg, std::nullopt, &factor));
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.variants.size()));
}

void run_batch(benchmark::State& state, bool parallel) {
  Fixture f = make_fixture(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  f.cfg.parallel = parallel;
  const KktFactor factor = factorize(f.lp.matrix, f.cfg.rho);
  for (auto _ : state) {
    benchmark::DoNotOptimize(admm_solve_batch(f.lp, f.variants, f.cfg, std::nullopt, &factor));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.variants.size()));
}

// Serial reference of the batch kernel: same lockstep code, no OpenMP.
void BM_BatchSerial(benchmark::State& state) { run_batch(state, false); }
void BM_BatchParallel(benchmark::State& state) { run_batch(state, true); }

void BM_Factorize(benchmark::State& state) {
  const Fixture f = make_fixture(1, static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(factorize(f.lp.matrix, f.cfg.rho));
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int n : {50, 200}) {
    for (int batch : {8, 64}) b->Args({batch, n});
  }
}

BENCHMARK(BM_SequentialLoop)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchSerial)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Factorize)->Args({1, 50})->Args({1, 200})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
