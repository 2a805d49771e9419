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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>

#include "strap/prioritization.hpp"
#include "strap/reduction.hpp"
#include "strap/schema.hpp"

namespace strap {

struct FaultVerdict {
  int segment_id = 0;
  std::size_t mismatched_frames = 0;
  std::size_t total_frames = 0;
  bool is_fault = false;

  friend bool operator==(const FaultVerdict&, const FaultVerdict&) = default;
};

/// A segment is faulty when strictly more than 10% of its frames mismatch.
/// Evaluated in integers: 10 * mismatched > total.
constexpr bool exceeds_fault_threshold(std::size_t mismatched, std::size_t total) {
  return 10 * mismatched > total;
}

/// Frame-by-frame comparison over the segment's non-warm-up frames; both
/// streams must hold exactly segment.length() vectors.
FaultVerdict compare_outputs(std::span<const FrameVector> original,
                             std::span<const FrameVector> replayed, const Segment& segment);

/// Fraction of frames saved: 1 - reduced / original.
double reduction_pct(std::size_t original_frames, std::size_t reduced_frames);

/// |reduced ∩ full| / |full|; 1.0 when the full suite detects nothing.
double fault_coverage(const std::set<std::string>& reduced_detected,
                      const std::set<std::string>& full_detected);

/// APFD = 1 - sum(TF) / (m n) + 1 / (2 n), with 1-based first-detection
/// positions TF. Throws InputError for m == 0 or any TF outside [1, n].
double apfd(std::size_t n, std::span<const std::size_t> first_detection, std::size_t m);

/// 1-based position of the first `true`, or nullopt when there is none.
std::optional<std::size_t> top_k(std::span<const bool> verdicts_in_plan_order);

using FaultsBySegment = std::map<int, std::set<std::string>>;

struct PlanEvaluation {
  std::optional<double> apfd;        // nullopt when no fault is detected
  std::optional<std::size_t> top_k;  // nullopt when no fault is detected
  std::size_t detected_faults = 0;
  std::size_t undetected_faults = 0;  // faults in `all_faults` no segment detects
};

/// Scores a plan against the faults each segment detects. Faults no segment
/// detects are left out of m and counted separately.
PlanEvaluation evaluate_plan(const PrioritizedPlan& plan, const FaultsBySegment& faults,
                             const std::set<std::string>& all_faults = {});

}  // namespace strap
