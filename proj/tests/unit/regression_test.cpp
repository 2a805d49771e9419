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


#include <gtest/gtest.h>

#include <atomic>
#include <string>
#include <vector>

#include "strap/artifacts.hpp"
#include "strap/error.hpp"
#include "strap/regression.hpp"
#include "strap/synth.hpp"

namespace {

using strap::ModuleKind;

const std::string kData = STRAP_DATA_DIR;

strap::Recording harness_recording() {
  return strap::generate_recording(strap::load_script(kData + "/scripts/harness.json"), 7);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  for (int jobs : {1, 2, 5}) {
    std::vector<std::atomic<int>> hits(37);
    strap::parallel_for(hits.size(), jobs, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(Regression, ZeroMutantsIsVacuous) {
  strap::RegressionConfig cfg;
  cfg.repetitions = 5;
  const auto report =
      strap::run_regression(harness_recording(), ModuleKind::traffic_light, {}, cfg, strap::default_registry());
  EXPECT_EQ(report.fault_coverage, 1.0);
  EXPECT_EQ(report.mutant_count, 0u);
  const auto j = strap::to_json(report);
  const std::string text = j.dump();
  EXPECT_NE(text.find("no faults"), std::string::npos);
  for (const auto& s : report.strategies) EXPECT_FALSE(s.apfd.has_value());
}

TEST(Regression, AllModulesWithoutMutants) {
  strap::RegressionConfig cfg;
  cfg.repetitions = 2;
  const auto report =
      strap::run_regression(harness_recording(), ModuleKind::all, {}, cfg, strap::default_registry());
  EXPECT_EQ(report.modules.size(), 4u);
  for (const auto& m : report.modules) EXPECT_EQ(m.closed_loop_faults, 0u);
}

TEST(Regression, RejectsMismatchedMutants) {
  const auto mutants = strap::load_mutants(kData + "/mutants/harness.json");
  strap::RegressionConfig cfg;
  cfg.repetitions = 2;
  EXPECT_THROW(strap::run_regression(harness_recording(), ModuleKind::traffic_light, mutants, cfg,
                                     strap::default_registry()),
               strap::InputError);
  std::vector<strap::Mutant> dup{mutants[0], mutants[0]};
  EXPECT_THROW(strap::run_regression(harness_recording(), ModuleKind::all, dup, cfg,
                                     strap::default_registry()),
               strap::InputError);
}

TEST(Regression, DeterministicAcrossJobs) {
  const auto mutants = strap::load_mutants(kData + "/mutants/harness.json");
  const auto rec = harness_recording();
  strap::RegressionConfig cfg;
  cfg.seed = 3;
  cfg.repetitions = 10;
  const auto one = strap::dump(strap::to_json(
      strap::run_regression(rec, ModuleKind::all, mutants, cfg, strap::default_registry())));
  cfg.jobs = 4;
  const auto four = strap::dump(strap::to_json(
      strap::run_regression(rec, ModuleKind::all, mutants, cfg, strap::default_registry())));
  EXPECT_EQ(one, four);
}

TEST(Regression, HarnessReportShape) {
  const auto mutants = strap::load_mutants(kData + "/mutants/harness.json");
  strap::RegressionConfig cfg;
  cfg.seed = 7;
  cfg.repetitions = 20;
  const auto report =
      strap::run_regression(harness_recording(), ModuleKind::all, mutants, cfg, strap::default_registry());
  EXPECT_EQ(report.mutant_count, mutants.size());
  EXPECT_GT(report.full_detected, 0u);
  EXPECT_LE(report.reduced_detected, report.full_detected);
  EXPECT_GE(report.fault_coverage, 0.95);
  EXPECT_EQ(report.strategies.size(), cfg.strategies.size());
  for (const auto& m : report.modules) {
    EXPECT_EQ(m.closed_loop_faults, 0u);
    for (const auto& mr : m.mutants) {
      EXPECT_EQ(mr.reduced_verdicts.size(), m.reduction.segments.size());
      EXPECT_EQ(mr.full_verdicts.size(), m.reduction.original.size());
    }
    for (const auto& b : m.benchmarks) EXPECT_EQ(b.call_counts.size(), m.reduction.segments.size());
  }
  const auto csv = strap::report_to_csv(report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "scope,strategy,top_k,apfd,benchmarks");
}

}  // namespace
