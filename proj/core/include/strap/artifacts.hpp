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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "strap/evaluation.hpp"
#include "strap/prioritization.hpp"
#include "strap/reduction.hpp"
#include "strap/regression.hpp"
#include "strap/schema.hpp"
#include "strap/toy_modules.hpp"

namespace strap {

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Parses a JSON document; errors name `source`.
nlohmann::json parse_json(const std::string& text, const std::string& source);
nlohmann::json load_json(const std::filesystem::path& path);

/// Pretty-printed with a trailing newline.
std::string dump(const nlohmann::ordered_json& j);

// Frame vectors: JSONL, one {"t_ns", "values"} object per line.
std::string vectors_to_jsonl(std::span<const FrameVector> vectors);
std::vector<FrameVector> parse_vectors(std::istream& in);
std::vector<FrameVector> load_vectors(const std::filesystem::path& path);
/// True when the first non-blank line looks like a frame-vector record.
bool looks_like_vectors(const std::filesystem::path& path);

struct SegmentManifest {
  ReductionConfig config;
  std::size_t total_frames = 0;
  std::size_t original_segments = 0;
  std::vector<Segment> segments;
};

nlohmann::ordered_json to_json(const Reduction& reduction, const ReductionConfig& config);
SegmentManifest manifest_from_json(const nlohmann::json& j);
SegmentManifest load_manifest(const std::filesystem::path& path);

/// Plan plus, for RD, every repetition as "repetitions".
nlohmann::ordered_json to_json(const PrioritizedPlan& plan,
                               std::span<const PrioritizedPlan> repetitions = {});
PrioritizedPlan plan_from_json(const nlohmann::json& j);
std::string plan_to_csv(const PrioritizedPlan& plan);

/// {"<segment id>": count, ...}
nlohmann::ordered_json call_counts_to_json(std::span<const Segment> segments,
                                           std::span<const std::int64_t> counts);
std::vector<std::int64_t> call_counts_from_json(const nlohmann::json& j,
                                                std::span<const Segment> segments);

/// {"faults": {"<segment id>": ["fault", ...]}, "all": ["fault", ...]}; "all"
/// is optional and lists faults that may go undetected.
struct FaultTable {
  FaultsBySegment by_segment;
  std::set<std::string> all;
};
FaultTable fault_table_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const Mutant& mutant);
Mutant mutant_from_json(const nlohmann::json& j);
nlohmann::ordered_json mutants_to_json(std::span<const Mutant> mutants);
std::vector<Mutant> mutants_from_json(const nlohmann::json& j);
std::vector<Mutant> load_mutants(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const PlanEvaluation& evaluation, std::size_t segments);
nlohmann::ordered_json to_json(const MetricsReport& report);
/// strategy,top_k,apfd,benchmarks per strategy, overall and per module.
std::string report_to_csv(const MetricsReport& report);

}  // namespace strap
