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

#include <unistd.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "strap/artifacts.hpp"
#include "strap/error.hpp"

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("strap_artifacts_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

TEST(Artifacts, AtomicWriteLeavesNoTemp) {
  const auto p = scratch("a.txt");
  strap::write_file_atomic(p, "hello\n");
  EXPECT_EQ(strap::read_file(p), "hello\n");
  EXPECT_FALSE(fs::exists(p.string() + ".tmp"));
  EXPECT_THROW(strap::read_file(scratch("missing.txt")), strap::InputError);
}

TEST(Artifacts, VectorsRoundTrip) {
  std::vector<strap::FrameVector> vs{{{1, 0, 3}, {5}}, {{0, 0, 0}, {9}}};
  std::istringstream in(strap::vectors_to_jsonl(vs));
  EXPECT_EQ(strap::parse_vectors(in), vs);
  std::istringstream bad("{\"t_ns\": 0, \"values\": [1]}\n{\"t_ns\": 1, \"values\": [1, 2]}\n");
  try {
    strap::parse_vectors(bad);
    FAIL();
  } catch (const strap::ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Artifacts, ManifestRoundTrip) {
  std::vector<strap::FrameVector> vs;
  for (int i = 0; i < 100; ++i) vs.push_back({{i < 60 ? 1u : 2u}, {i * 10}});
  const strap::ReductionConfig cfg;
  const auto r = strap::reduce_vectors(vs, cfg);
  const auto m = strap::manifest_from_json(nlohmann::json::parse(strap::to_json(r, cfg).dump()));
  EXPECT_EQ(m.config, cfg);
  EXPECT_EQ(m.total_frames, 100u);
  ASSERT_EQ(m.segments.size(), r.segments.size());
  for (std::size_t i = 0; i < m.segments.size(); ++i) {
    EXPECT_EQ(m.segments[i].start_idx, r.segments[i].start_idx);
    EXPECT_EQ(m.segments[i].end_idx, r.segments[i].end_idx);
    EXPECT_EQ(m.segments[i].vector.values, r.segments[i].vector.values);
  }
}

TEST(Artifacts, PlanRoundTripAndCsv) {
  strap::PrioritizedPlan p{strap::Strategy::rsc, {2, 0, 1}, {0.5, 0.25, 0.25}, std::nullopt};
  EXPECT_EQ(strap::plan_from_json(nlohmann::json::parse(strap::to_json(p).dump())), p);
  EXPECT_EQ(strap::plan_to_csv(p), "rank,segment_id,score\n1,2,0.5\n2,0,0.25\n3,1,0.25\n");
  EXPECT_THROW(strap::plan_from_json({{"strategy", "RSC"}, {"order", {1, 1}}}), strap::InputError);
}

TEST(Artifacts, MutantsRoundTrip) {
  const auto ms = strap::generate_mutants(strap::ModuleKind::obstacle, 6, 1);
  const auto j = nlohmann::json::parse(strap::mutants_to_json(ms).dump());
  EXPECT_EQ(strap::mutants_from_json(j), ms);
  EXPECT_EQ(strap::mutants_from_json({{"mutants", j}}), ms);
  EXPECT_THROW(strap::mutant_from_json({{"id", "x"}, {"module", "planning"}, {"target", "nope"},
                                        {"operator", "flip_condition"}, {"delta", nullptr}}),
               strap::InputError);
}

TEST(Artifacts, FaultTable) {
  const auto t = strap::fault_table_from_json(
      nlohmann::json::parse(R"({"faults": {"0": ["a"], "3": ["a", "b"]}, "all": ["a", "b", "c"]})"));
  EXPECT_EQ(t.by_segment.at(3).size(), 2u);
  EXPECT_EQ(t.all.size(), 3u);
  EXPECT_THROW(strap::fault_table_from_json(nlohmann::json::parse(R"({"faults": {"x": []}})")),
               strap::InputError);
}

}  // namespace
