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

#include "strap/evaluation.hpp"

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "strap/error.hpp"

namespace strap {

FaultVerdict compare_outputs(std::span<const FrameVector> original,
                             std::span<const FrameVector> replayed, const Segment& segment) {
  if (original.size() != replayed.size() || original.size() != segment.length())
    throw InputError("segment " + std::to_string(segment.id) + " spans " +
                     std::to_string(segment.length()) + " frames but got " +
                     std::to_string(original.size()) + " original and " +
                     std::to_string(replayed.size()) + " replayed outputs");
  FaultVerdict v;
  v.segment_id = segment.id;
  v.total_frames = original.size();
  for (std::size_t i = 0; i < original.size(); ++i)
    if (!same_scene(original[i], replayed[i])) ++v.mismatched_frames;
  v.is_fault = exceeds_fault_threshold(v.mismatched_frames, v.total_frames);
  return v;
}

double reduction_pct(std::size_t original_frames, std::size_t reduced_frames) {
  if (original_frames == 0) throw InputError("original recording has no frames");
  if (reduced_frames > original_frames)
    throw InputError("reduced length " + std::to_string(reduced_frames) + " exceeds original " +
                     std::to_string(original_frames));
  return 1.0 - static_cast<double>(reduced_frames) / static_cast<double>(original_frames);
}

double fault_coverage(const std::set<std::string>& reduced_detected,
                      const std::set<std::string>& full_detected) {
  if (full_detected.empty()) return 1.0;
  std::size_t covered = 0;
  for (const auto& f : full_detected) covered += reduced_detected.contains(f) ? 1 : 0;
  return static_cast<double>(covered) / static_cast<double>(full_detected.size());
}

double apfd(std::size_t n, std::span<const std::size_t> first_detection, std::size_t m) {
  if (m == 0) throw InputError("undefined APFD: no faults");
  if (n == 0) throw InputError("undefined APFD: no segments");
  if (first_detection.size() != m)
    throw InputError("expected " + std::to_string(m) + " first-detection positions, got " +
                     std::to_string(first_detection.size()));
  std::size_t sum = 0;
  for (auto tf : first_detection) {
    if (tf < 1 || tf > n)
      throw InputError("first-detection position " + std::to_string(tf) + " outside [1, " +
                       std::to_string(n) + "]");
    sum += tf;
  }
  const auto dn = static_cast<double>(n);
  return 1.0 - static_cast<double>(sum) / (static_cast<double>(m) * dn) + 1.0 / (2.0 * dn);
}

std::optional<std::size_t> top_k(std::span<const bool> verdicts_in_plan_order) {
  auto it = std::find(verdicts_in_plan_order.begin(), verdicts_in_plan_order.end(), true);
  if (it == verdicts_in_plan_order.end()) return std::nullopt;
  return static_cast<std::size_t>(std::distance(verdicts_in_plan_order.begin(), it)) + 1;
}

PlanEvaluation evaluate_plan(const PrioritizedPlan& plan, const FaultsBySegment& faults,
                             const std::set<std::string>& all_faults) {
  std::map<std::string, std::size_t> first;
  std::vector<bool> detects;
  detects.reserve(plan.order.size());
  for (std::size_t pos = 0; pos < plan.order.size(); ++pos) {
    auto it = faults.find(plan.order[pos]);
    const bool any = it != faults.end() && !it->second.empty();
    detects.push_back(any);
    if (it == faults.end()) continue;
    for (const auto& f : it->second) first.try_emplace(f, pos + 1);
  }
  for (const auto& [id, fs] : faults)
    if (!fs.empty() && std::find(plan.order.begin(), plan.order.end(), id) == plan.order.end())
      throw InputError("fault table names segment " + std::to_string(id) +
                       " which the plan does not contain");

  PlanEvaluation e;
  e.detected_faults = first.size();
  for (const auto& f : all_faults) e.undetected_faults += first.contains(f) ? 0 : 1;
  if (!first.empty()) {
    std::vector<std::size_t> tf;
    tf.reserve(first.size());
    for (const auto& [f, pos] : first) tf.push_back(pos);
    e.apfd = apfd(plan.order.size(), tf, tf.size());
    auto flags = std::make_unique<bool[]>(detects.size());
    std::copy(detects.begin(), detects.end(), flags.get());
    e.top_k = top_k(std::span<const bool>(flags.get(), detects.size()));
  }
  return e;
}

}  // namespace strap
