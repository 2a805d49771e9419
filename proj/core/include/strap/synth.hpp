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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "strap/recording.hpp"
#include "strap/schema.hpp"
#include "strap/toy_modules.hpp"

namespace strap {

/// Changes to the simulated world applied at one frame.
///
/// Keys name a scene object ("pedestrian", "stop_sign"), one of its schema
/// properties ("traffic_light.color", "vehicle.subtype") or one of the world
/// attributes "<actor>.action" and "traffic_light.distance". Setting a
/// property makes its object present; unsetting an object clears its
/// properties.
struct ScenarioEvent {
  int frame = 0;
  std::map<std::string, nlohmann::json> set;
  std::vector<std::string> unset;

  friend bool operator==(const ScenarioEvent&, const ScenarioEvent&) = default;
};

struct ScenarioScript {
  int duration_frames = 0;
  int fps = 15;
  double glitch_rate = 0.0;  // per frame and module output channel
  std::vector<ScenarioEvent> events;  // non-decreasing frames

  /// Throws InputError on out-of-range frames, unsorted events, unknown keys
  /// or values, fps < 1 or a glitch rate outside [0, 1).
  void validate() const;

  friend bool operator==(const ScenarioScript&, const ScenarioScript&) = default;
};

ScenarioScript script_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioScript& script);
ScenarioScript load_script(const std::filesystem::path& path);

/// Channel names used by generated recordings.
namespace channels {
inline constexpr const char* kCamera = "camera";
inline constexpr const char* kLocalization = "localization";
inline constexpr const char* kTrafficLight = "traffic_light";
inline constexpr const char* kObstacle = "obstacle";
inline constexpr const char* kPrediction = "prediction";
inline constexpr const char* kPlanning = "planning";
}  // namespace channels

/// True when the prediction channel publishes at frame k: frames
/// round(1.5 j) for j = 0, 1, 2, ... with halves rounded up.
bool prediction_publishes(std::int64_t k);

/// Renders the script into a recording by running the unmutated toy modules
/// on synthetic camera data. Every channel but prediction publishes once per
/// frame, each with its own latency inside the frame period. Glitches swap a
/// module output for a spurious one; downstream modules consume the glitch.
Recording generate_recording(const ScenarioScript& script, std::uint64_t seed);

struct ReplayResult {
  std::vector<Message> outputs;  // one per frame, on the module's publish channel
  std::vector<bool> comparable;  // false for warm-up frames
  CallCounts call_counts;        // calls made on comparable frames only
};

/// Replays `module` over aligned frames whose first `warmup_frames` are
/// warm-up. The module runs where the recorded output channel holds a fresh
/// message and repeats its last output where the recording holds a copy.
/// Throws InputError if the frames lack the module's publish channel.
ReplayResult replay_segment(const ToyModule& module, std::span<const Frame> frames,
                            std::size_t warmup_frames);

/// Encodes each message on its own against the full registry.
std::vector<FrameVector> vectorize_messages(std::span<const Message> messages,
                                            const SchemaRegistry& registry);

/// The recorded messages of one channel kind, frame by frame.
std::vector<Message> channel_messages(std::span<const Frame> frames, MessageKind kind);

}  // namespace strap
