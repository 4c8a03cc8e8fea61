// Copyright 2026 The vamo Authors.
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

// Serial reference versus OpenMP kernels.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "vamo/dataset.hpp"
#include "vamo/model.hpp"
#include "vamo/temporal.hpp"
#include "vamo/weighting.hpp"

namespace {

using namespace vamo;

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::kParallel : Exec::kSerial; }

void BM_LossAndGrad(benchmark::State& state) {
  auto cfg = data::FeatureOptions{}.model_shape(3);
  cfg.use_temporal = true;
  const SharedBottomModel m(cfg, 1);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  std::vector<Sample> batch(64);
  for (auto& s : batch) {
    s.window.resize(cfg.window * cfg.feature_dim());
    for (auto& x : s.window) x = n(rng);
    for (std::size_t r = 0; r < cfg.window; ++r)
      s.window[(r + 1) * cfg.feature_dim() - 1] = 0.0;
    s.quality = 1.0;
    s.target = n(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(m.loss_and_grad(0, batch, exec_of(state)));
}
BENCHMARK(BM_LossAndGrad)->Arg(0)->Arg(1)->ArgName("parallel");

void BM_Spectrum(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  std::vector<double> x(192 * 3);
  for (auto& v : x) v = n(rng);
  const temporal::HistoryWindow w(x, 3);
  for (auto _ : state) benchmark::DoNotOptimize(temporal::spectrum(w, exec_of(state)));
}
BENCHMARK(BM_Spectrum)->Arg(0)->Arg(1)->ArgName("parallel");

void BM_GridOracle(benchmark::State& state) {
  const std::vector<double> m{0.3, -0.1, 0.7};
  for (auto _ : state) benchmark::DoNotOptimize(simplex_grid_oracle(m, 0.5, 1e-3, exec_of(state)));
}
BENCHMARK(BM_GridOracle)->Arg(0)->Arg(1)->ArgName("parallel");

}  // namespace

BENCHMARK_MAIN();
