// Copyright 2026 The wsncollab Authors.
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

#include <benchmark/benchmark.h>

#include "wsn/blue_estimator.hpp"
#include "wsn/experiment.hpp"
#include "wsn/monte_carlo.hpp"
#include "wsn/power_optimizer.hpp"

namespace {

using namespace wsn;

struct PaperCell {
  SensorField field = build_field(ExperimentConfig::paper_defaults().field);
  SystemModel model = SystemModel::build(field, CovarianceSpec{});
  AdjacencyMatrix pattern = nearest_neighbor_adjacency(field, 2);
  MixingMatrix w = project_to_power(
      MixingMatrix::masked(Eigen::MatrixXd::Identity(6, 6) + Eigen::MatrixXd::Constant(6, 6, 0.2),
                           pattern),
      model.r_theta, model.r_n, 0.5);
};

const PaperCell& cell() {
  static const PaperCell c;
  return c;
}

void BM_BlueCovariance(benchmark::State& state) {
  const PaperCell& c = cell();
  for (auto _ : state) benchmark::DoNotOptimize(blue_covariance(c.w, c.model));
}
BENCHMARK(BM_BlueCovariance);

void BM_FisherWoodbury(benchmark::State& state) {
  const PaperCell& c = cell();
  for (auto _ : state) benchmark::DoNotOptimize(fisher_via_woodbury(c.w, c.model));
}
BENCHMARK(BM_FisherWoodbury);

void BM_DistortionGradient(benchmark::State& state) {
  const PaperCell& c = cell();
  for (auto _ : state) benchmark::DoNotOptimize(distortion_gradient(c.w, c.model));
}
BENCHMARK(BM_DistortionGradient);

void BM_SurrogateGradient(benchmark::State& state) {
  const PaperCell& c = cell();
  for (auto _ : state) benchmark::DoNotOptimize(objective_13_gradient(c.w, c.model));
}
BENCHMARK(BM_SurrogateGradient);

void BM_OptimizeCell(benchmark::State& state) {
  const PaperCell& c = cell();
  SolverConfig cfg;
  cfg.power_budget = 0.5;
  cfg.restarts = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(optimize(c.model, c.pattern, cfg));
}
BENCHMARK(BM_OptimizeCell)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_RunTrials(benchmark::State& state) {
  const PaperCell& c = cell();
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_trials(c.w, c.model, n, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunTrials)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
