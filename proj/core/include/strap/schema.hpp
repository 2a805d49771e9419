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
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "strap/recording.hpp"

namespace strap {

enum class DimensionKind { presence, property };

/// One slot of the frame vector.
///
/// Presence dimensions carry a single code under the value name "present".
/// Property dimensions hang off a presence parent and are zero whenever the
/// parent is zero.
struct DimensionSpec {
  std::string name;
  DimensionKind kind = DimensionKind::presence;
  std::optional<std::string> parent;
  MessageKind source_channel = MessageKind::obstacle;
  std::map<std::string, std::uint32_t> codes;

  friend bool operator==(const DimensionSpec&, const DimensionSpec&) = default;
};

inline constexpr std::string_view kPresentValue = "present";

class SchemaRegistry {
 public:
  /// Throws InputError when an invariant is violated: duplicate names, a code
  /// of 0, duplicate codes within a dimension, a dangling or non-presence
  /// parent, or an always-keep set missing stop_sign/intersection/crosswalk.
  SchemaRegistry(std::vector<DimensionSpec> dimensions, std::set<std::string> always_keep);

  std::size_t size() const { return dimensions_.size(); }
  const std::vector<DimensionSpec>& dimensions() const { return dimensions_; }
  const DimensionSpec& dimension(std::size_t index) const { return dimensions_.at(index); }
  const std::set<std::string>& always_keep() const { return always_keep_; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  std::optional<std::size_t> parent_of(std::size_t index) const { return parents_.at(index); }

  /// Code of `value` in dimension `index`; throws InputError naming both if absent.
  std::uint32_t code(std::size_t index, std::string_view value) const;
  std::optional<std::string> value_of(std::size_t index, std::uint32_t code) const;

  friend bool operator==(const SchemaRegistry& a, const SchemaRegistry& b) {
    return a.dimensions_ == b.dimensions_ && a.always_keep_ == b.always_keep_;
  }

 private:
  std::vector<DimensionSpec> dimensions_;
  std::set<std::string> always_keep_;
  std::vector<std::optional<std::size_t>> parents_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
};

/// The built-in driving-scene layout. Dimension order and codes are frozen:
///
///   idx  dimension                  source         codes
///    0   vehicle                    obstacle       present=1
///    1   vehicle.subtype            obstacle       truck=2 car=3 bus=4 van=5
///    2   pedestrian                 obstacle       present=6
///    3   cyclist                    obstacle       present=7
///    4   cyclist.subtype            obstacle       bicyclist=8 motorcyclist=9 tricyclist=10
///    5   unknown_actor              obstacle       present=11
///    6   actor                      prediction     present=12
///    7   actor.action               prediction     stop=13 cruise=14 change_lane=15
///                                                  overtake=16 cross=17
///    8   traffic_light              traffic_light  present=18
///    9   traffic_light.color        traffic_light  red=19 green=20 yellow=21 black=22
///   10   traffic_light.shape        traffic_light  square=23 round=24
///   11   traffic_light.orientation  traffic_light  vertical=25 horizontal=26
///   12   stop_sign                  obstacle       present=27
///   13   crosswalk                  obstacle       present=28
///   14   intersection               obstacle       present=29
///   15   traffic_cone               obstacle       present=30
///   16   unknown_static             obstacle       present=31
///   17   ego                        planning       present=32
///   18   ego.action                 planning       stop=33 cruise=34 change_lane=35
///                                                  overtake=36
///   19   ego.stop_cause             planning       traffic_light=37 stop_sign=38
SchemaRegistry default_registry();

nlohmann::json to_json(const SchemaRegistry& registry);
SchemaRegistry registry_from_json(const nlohmann::json& j);
SchemaRegistry load_registry(const std::filesystem::path& path);

/// Label-encoded frame: values[d] is 0 ("none") or a code of dimension d.
struct FrameVector {
  std::vector<std::uint32_t> values;
  Timestamp t;

  friend bool operator==(const FrameVector&, const FrameVector&) = default;
};

/// Vectors describe the same scene when their codes match; timestamps are ignored.
inline bool same_scene(const FrameVector& a, const FrameVector& b) { return a.values == b.values; }

enum class ModuleKind { traffic_light, obstacle, prediction, planning, all };

std::string_view to_string(ModuleKind kind);
std::optional<ModuleKind> parse_module_kind(std::string_view name);

/// Channel kinds a module subscribes to or publishes on.
std::set<MessageKind> module_channels(ModuleKind module);
/// The channel kind a module publishes (undefined for ModuleKind::all).
MessageKind published_channel(ModuleKind module);

struct ModuleFilter {
  ModuleKind module = ModuleKind::all;
  std::vector<bool> retained;  // indexed by dimension
};

/// Keeps dimensions sourced from the module's channels plus the always-keep set.
ModuleFilter make_filter(ModuleKind module, const SchemaRegistry& registry);

/// An object parsed out of a payload, named by schema dimension. Properties
/// belong to `presence` and are listed in payload order.
struct SceneObject {
  std::string presence;
  std::vector<std::pair<std::string, std::string>> properties;
};

/// Parses one message payload according to its kind's grammar. Localization
/// and image_ref payloads yield no objects.
std::vector<SceneObject> extract_objects(const Message& message);

FrameVector encode_frame(const Frame& frame, const SchemaRegistry& registry);
FrameVector apply_filter(FrameVector vector, const ModuleFilter& filter,
                         const SchemaRegistry& registry);
std::vector<FrameVector> encode_recording(const AlignedRecording& aligned,
                                          const SchemaRegistry& registry,
                                          const ModuleFilter& filter);

/// Zeroes every property whose presence parent is zero. Idempotent.
void zero_orphans(FrameVector& vector, const SchemaRegistry& registry);

/// True when every value is 0 or a known code and no property is orphaned.
bool conforms(const FrameVector& vector, const SchemaRegistry& registry);

}  // namespace strap
