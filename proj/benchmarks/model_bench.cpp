// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "sdt/generate.hpp"
#include "sdt/model.hpp"
#include "sdt/reference.hpp"

namespace {

using namespace sdt;

void BM_RunModel(benchmark::State& st) {
  const auto cfg = ModelConfig::toy();
  const auto w = random_weights(cfg, 1);
  const auto x = random_input(cfg, 1);
  const RunOptions opts{static_cast<unsigned>(st.range(0)), nullptr, nullptr};
  for (auto _ : st) benchmark::DoNotOptimize(run_model(x, cfg, w, opts));
}
BENCHMARK(BM_RunModel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_RunModelDense(benchmark::State& st) {
  const auto cfg = ModelConfig::toy();
  const auto w = random_weights(cfg, 1);
  const auto x = random_input(cfg, 1);
  for (auto _ : st) benchmark::DoNotOptimize(reference::run_model_dense(x, cfg, w));
}
BENCHMARK(BM_RunModelDense)->Unit(benchmark::kMillisecond);

}  // namespace
