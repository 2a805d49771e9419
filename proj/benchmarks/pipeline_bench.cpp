// Copyright 2026 The strap Authors
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

#include <random>
#include <string>
#include <vector>

#include "strap/artifacts.hpp"
#include "strap/prioritization.hpp"
#include "strap/reduction.hpp"
#include "strap/regression.hpp"
#include "strap/synth.hpp"

namespace {

const std::string kData = STRAP_DATA_DIR;

std::vector<strap::FrameVector> random_stream(std::size_t n, std::size_t width, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<strap::FrameVector> out;
  std::vector<std::uint32_t> current(width, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (gen() % 40 == 0) current[gen() % width] = static_cast<std::uint32_t>(gen() % 4);
    auto v = current;
    if (gen() % 50 == 0) v[gen() % width] ^= 1;  // one-frame glitch
    out.push_back({std::move(v), strap::Timestamp{static_cast<std::int64_t>(i)}});
  }
  return out;
}

void BM_Smooth(benchmark::State& state) {
  const auto s = random_stream(static_cast<std::size_t>(state.range(0)), 20, 1);
  for (auto _ : state) benchmark::DoNotOptimize(strap::smooth(s, 5));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Smooth)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 17);

void BM_Reduce(benchmark::State& state) {
  const auto s = random_stream(static_cast<std::size_t>(state.range(0)), 20, 2);
  for (auto _ : state) benchmark::DoNotOptimize(strap::reduce_vectors(s, {}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Reduce)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 17);

void BM_PrioritizeRsc(benchmark::State& state) {
  const auto frames = random_stream(1 << 14, 20, 3);
  const auto red = strap::reduce_vectors(frames, {});
  for (auto _ : state) benchmark::DoNotOptimize(strap::prioritize_rsc(red.segments, frames));
  state.counters["segments"] = static_cast<double>(red.segments.size());
}
BENCHMARK(BM_PrioritizeRsc);

void BM_PrioritizeRd(benchmark::State& state) {
  const auto red = strap::reduce_vectors(random_stream(1 << 14, 20, 4), {});
  for (auto _ : state) benchmark::DoNotOptimize(strap::prioritize_rd(red.segments, 7, 100));
}
BENCHMARK(BM_PrioritizeRd);

void BM_RegressionHarness(benchmark::State& state) {
  const auto rec = strap::generate_recording(strap::load_script(kData + "/scripts/harness.json"), 7);
  const auto mutants = strap::load_mutants(kData + "/mutants/harness.json");
  const auto reg = strap::default_registry();
  strap::RegressionConfig cfg;
  cfg.seed = 7;
  cfg.jobs = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(strap::run_regression(rec, strap::ModuleKind::all, mutants, cfg, reg));
}
BENCHMARK(BM_RegressionHarness)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
