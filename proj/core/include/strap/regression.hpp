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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strap/evaluation.hpp"
#include "strap/prioritization.hpp"
#include "strap/recording.hpp"
#include "strap/reduction.hpp"
#include "strap/schema.hpp"
#include "strap/toy_modules.hpp"

namespace strap {

struct RegressionConfig {
  ReductionConfig reduction;
  std::vector<Strategy> strategies{Strategy::rsc, Strategy::sc, Strategy::ch, Strategy::rd,
                                   Strategy::cc};
  std::uint64_t seed = 0;
  int repetitions = 100;
  RarityMode rarity_mode = RarityMode::indicator;
  int jobs = 1;
};

/// Mean APFD and Top-K of one strategy. Both are nullopt when nothing was
/// detected; RD values are first averaged over its repetitions.
struct StrategyScore {
  Strategy strategy = Strategy::ch;
  std::optional<double> apfd;
  std::optional<double> top_k;
  std::size_t benchmarks = 0;  // benchmarks that contributed
};

/// Mutants that change the same internal function, scored together.
struct BenchmarkResult {
  std::string name;  // "<module>/<function>"
  std::vector<std::string> mutants;
  std::size_t detected_faults = 0;
  std::size_t undetected_faults = 0;
  std::vector<std::int64_t> call_counts;  // per reduced segment, for CC
  std::vector<StrategyScore> strategies;
};

struct MutantResult {
  Mutant mutant;
  std::string function;
  std::vector<FaultVerdict> reduced_verdicts;  // one per reduced segment
  std::vector<FaultVerdict> full_verdicts;     // one per original segment
  bool detected_by_reduced = false;
  bool detected_by_full = false;
};

struct ModuleReport {
  ModuleKind module = ModuleKind::all;
  Reduction reduction;
  std::vector<FrameVector> frame_vectors;  // module-filtered, one per aligned frame
  std::map<Strategy, PrioritizedPlan> plans;  // benchmark-independent strategies
  std::vector<PrioritizedPlan> rd_plans;

  double reduction_pct = 0.0;
  double reduction_pct_with_warmup = 0.0;
  double fault_coverage = 1.0;
  std::size_t closed_loop_faults = 0;  // unmutated replay vs. recorded channel
  std::vector<MutantResult> mutants;
  std::vector<BenchmarkResult> benchmarks;
  std::vector<StrategyScore> strategies;
};

struct MetricsReport {
  RegressionConfig config;
  std::size_t total_frames = 0;
  std::vector<ModuleReport> modules;
  double reduction_pct = 0.0;  // over all module suites
  double reduction_pct_with_warmup = 0.0;
  double fault_coverage = 1.0;
  std::size_t mutant_count = 0;
  std::size_t full_detected = 0;
  std::size_t reduced_detected = 0;
  std::vector<StrategyScore> strategies;  // mean over every benchmark
};

/// Aligns, vectorizes and reduces the recording per module, replays each
/// reduced segment and the full recording under every mutant, and scores each
/// strategy. `module` == all tests every module some mutant targets (every
/// module when there are no mutants). Deterministic for any `jobs`.
MetricsReport run_regression(const Recording& recording, ModuleKind module,
                             std::span<const Mutant> mutants, const RegressionConfig& config,
                             const SchemaRegistry& registry);

/// Runs fn(0..n-1) on up to `jobs` threads; rethrows the lowest-index failure.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Plans of every benchmark-independent strategy in `strategies` (CC excluded).
std::map<Strategy, PrioritizedPlan> plan_strategies(const Reduction& reduction,
                                                    std::span<const FrameVector> frame_vectors,
                                                    std::span<const Strategy> strategies,
                                                    RarityMode mode);

}  // namespace strap
