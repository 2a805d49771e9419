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

#include "strap/schema.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <initializer_list>
#include <limits>

#include "strap/error.hpp"

namespace strap {

namespace {

constexpr std::array<std::string_view, 3> kRequiredAlwaysKeep{"stop_sign", "intersection",
                                                              "crosswalk"};

const nlohmann::json& array_field(const nlohmann::json& payload, const char* key,
                                  MessageKind kind) {
  static const nlohmann::json kEmpty = nlohmann::json::array();
  auto it = payload.find(key);
  if (it == payload.end() || it->is_null()) return kEmpty;
  if (!it->is_array())
    throw InputError(std::string(to_string(kind)) + " payload: '" + key + "' must be an array");
  return *it;
}

std::optional<std::string> string_field(const nlohmann::json& obj, const char* key,
                                        MessageKind kind) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    throw InputError(std::string(to_string(kind)) + " payload: '" + key + "' must be a string");
  return it->get<std::string>();
}

std::string actor_dimension(const std::string& actor) {
  if (actor == "vehicle" || actor == "pedestrian" || actor == "cyclist") return actor;
  if (actor == "unknown" || actor == "unknown_actor") return "unknown_actor";
  throw InputError("dimension 'actor' has no code for value '" + actor + "'");
}

std::string static_dimension(const std::string& object) {
  if (object == "stop_sign" || object == "crosswalk" || object == "intersection" ||
      object == "traffic_cone")
    return object;
  if (object == "unknown" || object == "unknown_static") return "unknown_static";
  throw InputError("dimension 'static object' has no code for value '" + object + "'");
}

void require_object(const nlohmann::json& j, MessageKind kind, const char* what) {
  if (!j.is_object())
    throw InputError(std::string(to_string(kind)) + " payload: " + what + " entries must be objects");
}

}  // namespace

SchemaRegistry::SchemaRegistry(std::vector<DimensionSpec> dimensions,
                               std::set<std::string> always_keep)
    : dimensions_(std::move(dimensions)), always_keep_(std::move(always_keep)) {
  for (std::size_t i = 0; i < dimensions_.size(); ++i) {
    const auto& d = dimensions_[i];
    if (d.name.empty()) throw InputError("schema: dimension " + std::to_string(i) + " has no name");
    if (!by_name_.emplace(d.name, i).second)
      throw InputError("schema: duplicate dimension '" + d.name + "'");
    if (d.codes.empty()) throw InputError("schema: dimension '" + d.name + "' has no codes");
    std::set<std::uint32_t> seen;
    for (const auto& [value, c] : d.codes) {
      if (c == 0)
        throw InputError("schema: dimension '" + d.name + "' uses reserved code 0 for '" + value +
                         "'");
      if (!seen.insert(c).second)
        throw InputError("schema: dimension '" + d.name + "' repeats code " + std::to_string(c));
    }
  }
  parents_.resize(dimensions_.size());
  for (std::size_t i = 0; i < dimensions_.size(); ++i) {
    const auto& d = dimensions_[i];
    if (d.kind == DimensionKind::presence) {
      if (d.parent) throw InputError("schema: presence dimension '" + d.name + "' has a parent");
      continue;
    }
    if (!d.parent) throw InputError("schema: property dimension '" + d.name + "' has no parent");
    auto it = by_name_.find(*d.parent);
    if (it == by_name_.end())
      throw InputError("schema: '" + d.name + "' references unknown parent '" + *d.parent + "'");
    if (dimensions_[it->second].kind != DimensionKind::presence)
      throw InputError("schema: parent of '" + d.name + "' is not a presence dimension");
    parents_[i] = it->second;
  }
  for (const auto& name : always_keep_)
    if (!by_name_.contains(name))
      throw InputError("schema: always_keep names unknown dimension '" + name + "'");
  for (auto required : kRequiredAlwaysKeep)
    if (!always_keep_.contains(std::string(required)))
      throw InputError("schema: always_keep must include '" + std::string(required) + "'");
}

std::optional<std::size_t> SchemaRegistry::index_of(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t SchemaRegistry::code(std::size_t index, std::string_view value) const {
  const auto& d = dimensions_.at(index);
  auto it = d.codes.find(std::string(value));
  if (it == d.codes.end())
    throw InputError("dimension '" + d.name + "' has no code for value '" + std::string(value) +
                     "'");
  return it->second;
}

std::optional<std::string> SchemaRegistry::value_of(std::size_t index, std::uint32_t code) const {
  for (const auto& [value, c] : dimensions_.at(index).codes)
    if (c == code) return value;
  return std::nullopt;
}

SchemaRegistry default_registry() {
  std::vector<DimensionSpec> dims;
  std::uint32_t next = 1;
  auto presence = [&](std::string name, MessageKind source) {
    dims.push_back({std::move(name), DimensionKind::presence, std::nullopt, source,
                    {{std::string(kPresentValue), next++}}});
  };
  auto property = [&](std::string name, std::string parent, MessageKind source,
                      std::initializer_list<const char*> values) {
    DimensionSpec d{std::move(name), DimensionKind::property, std::move(parent), source, {}};
    for (const char* v : values) d.codes.emplace(v, next++);
    dims.push_back(std::move(d));
  };
  using K = MessageKind;
  presence("vehicle", K::obstacle);
  property("vehicle.subtype", "vehicle", K::obstacle, {"truck", "car", "bus", "van"});
  presence("pedestrian", K::obstacle);
  presence("cyclist", K::obstacle);
  property("cyclist.subtype", "cyclist", K::obstacle, {"bicyclist", "motorcyclist", "tricyclist"});
  presence("unknown_actor", K::obstacle);
  presence("actor", K::prediction);
  property("actor.action", "actor", K::prediction,
           {"stop", "cruise", "change_lane", "overtake", "cross"});
  presence("traffic_light", K::traffic_light);
  property("traffic_light.color", "traffic_light", K::traffic_light,
           {"red", "green", "yellow", "black"});
  property("traffic_light.shape", "traffic_light", K::traffic_light, {"square", "round"});
  property("traffic_light.orientation", "traffic_light", K::traffic_light,
           {"vertical", "horizontal"});
  presence("stop_sign", K::obstacle);
  presence("crosswalk", K::obstacle);
  presence("intersection", K::obstacle);
  presence("traffic_cone", K::obstacle);
  presence("unknown_static", K::obstacle);
  presence("ego", K::planning);
  property("ego.action", "ego", K::planning, {"stop", "cruise", "change_lane", "overtake"});
  property("ego.stop_cause", "ego", K::planning, {"traffic_light", "stop_sign"});
  return SchemaRegistry(std::move(dims), {"stop_sign", "intersection", "crosswalk"});
}

nlohmann::json to_json(const SchemaRegistry& registry) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : registry.dimensions()) {
    nlohmann::json j;
    j["name"] = d.name;
    j["kind"] = d.kind == DimensionKind::presence ? "presence" : "property";
    j["parent"] = d.parent ? nlohmann::json(*d.parent) : nlohmann::json(nullptr);
    j["source_channel"] = to_string(d.source_channel);
    j["codes"] = d.codes;
    dims.push_back(std::move(j));
  }
  nlohmann::json out;
  out["dimensions"] = std::move(dims);
  out["always_keep"] = registry.always_keep();
  return out;
}

SchemaRegistry registry_from_json(const nlohmann::json& j) {
  try {
    std::vector<DimensionSpec> dims;
    for (const auto& jd : j.at("dimensions")) {
      DimensionSpec d;
      d.name = jd.at("name").get<std::string>();
      const auto kind = jd.at("kind").get<std::string>();
      if (kind == "presence") {
        d.kind = DimensionKind::presence;
      } else if (kind == "property") {
        d.kind = DimensionKind::property;
      } else {
        throw InputError("schema: dimension '" + d.name + "' has unknown kind '" + kind + "'");
      }
      if (auto it = jd.find("parent"); it != jd.end() && !it->is_null())
        d.parent = it->get<std::string>();
      const auto source = jd.at("source_channel").get<std::string>();
      auto mk = parse_message_kind(source);
      if (!mk) throw InputError("schema: unknown source_channel '" + source + "'");
      d.source_channel = *mk;
      for (const auto& [value, c] : jd.at("codes").items()) {
        if (!c.is_number_integer() || c.get<std::int64_t>() < 0 ||
            c.get<std::int64_t>() > std::numeric_limits<std::uint32_t>::max())
          throw InputError("schema: code for '" + value + "' in '" + d.name +
                           "' must be a non-negative integer");
        d.codes.emplace(value, c.get<std::uint32_t>());
      }
      dims.push_back(std::move(d));
    }
    std::set<std::string> keep;
    if (auto it = j.find("always_keep"); it != j.end())
      keep = it->get<std::set<std::string>>();
    return SchemaRegistry(std::move(dims), std::move(keep));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("schema: ") + e.what());
  }
}

SchemaRegistry load_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open schema '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("schema '" + path.string() + "': " + e.what());
  }
  return registry_from_json(j);
}

std::string_view to_string(ModuleKind kind) {
  switch (kind) {
    case ModuleKind::traffic_light: return "traffic_light";
    case ModuleKind::obstacle: return "obstacle";
    case ModuleKind::prediction: return "prediction";
    case ModuleKind::planning: return "planning";
    case ModuleKind::all: return "all";
  }
  return "all";
}

std::optional<ModuleKind> parse_module_kind(std::string_view name) {
  for (auto k : {ModuleKind::traffic_light, ModuleKind::obstacle, ModuleKind::prediction,
                 ModuleKind::planning, ModuleKind::all})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

std::set<MessageKind> module_channels(ModuleKind module) {
  using K = MessageKind;
  switch (module) {
    case ModuleKind::traffic_light: return {K::image_ref, K::traffic_light};
    case ModuleKind::obstacle: return {K::image_ref, K::obstacle};
    case ModuleKind::prediction: return {K::obstacle, K::localization, K::prediction};
    case ModuleKind::planning:
      return {K::traffic_light, K::obstacle, K::prediction, K::localization, K::planning};
    case ModuleKind::all: break;
  }
  return {K::traffic_light, K::obstacle, K::prediction, K::planning, K::localization, K::image_ref};
}

MessageKind published_channel(ModuleKind module) {
  switch (module) {
    case ModuleKind::traffic_light: return MessageKind::traffic_light;
    case ModuleKind::obstacle: return MessageKind::obstacle;
    case ModuleKind::prediction: return MessageKind::prediction;
    case ModuleKind::planning: return MessageKind::planning;
    case ModuleKind::all: break;
  }
  throw InputError("module 'all' publishes no single channel");
}

ModuleFilter make_filter(ModuleKind module, const SchemaRegistry& registry) {
  ModuleFilter f{module, std::vector<bool>(registry.size(), false)};
  const auto channels = module_channels(module);
  for (std::size_t i = 0; i < registry.size(); ++i) {
    const auto& d = registry.dimension(i);
    f.retained[i] = channels.contains(d.source_channel) || registry.always_keep().contains(d.name);
  }
  return f;
}

std::vector<SceneObject> extract_objects(const Message& message) {
  const auto& p = message.payload;
  const MessageKind kind = message.kind;
  std::vector<SceneObject> out;
  if (!p.is_object()) throw InputError(std::string(to_string(kind)) + " payload must be an object");
  switch (kind) {
    case MessageKind::traffic_light:
      for (const auto& light : array_field(p, "lights", kind)) {
        require_object(light, kind, "light");
        SceneObject o{"traffic_light", {}};
        for (const char* prop : {"color", "shape", "orientation"})
          if (auto v = string_field(light, prop, kind))
            o.properties.emplace_back(std::string("traffic_light.") + prop, *v);
        out.push_back(std::move(o));
      }
      break;
    case MessageKind::obstacle:
      for (const auto& ob : array_field(p, "obstacles", kind)) {
        require_object(ob, kind, "obstacle");
        auto actor = string_field(ob, "actor", kind);
        if (!actor) throw InputError("obstacle payload: obstacle without 'actor'");
        SceneObject o{actor_dimension(*actor), {}};
        if (auto v = string_field(ob, "subtype", kind))
          o.properties.emplace_back(o.presence + ".subtype", *v);
        out.push_back(std::move(o));
      }
      for (const auto& obj : array_field(p, "objects", kind)) {
        if (!obj.is_string()) throw InputError("obstacle payload: 'objects' entries must be strings");
        out.push_back({static_dimension(obj.get<std::string>()), {}});
      }
      break;
    case MessageKind::prediction:
      for (const auto& track : array_field(p, "tracks", kind)) {
        require_object(track, kind, "track");
        SceneObject o{"actor", {}};
        if (auto v = string_field(track, "action", kind)) o.properties.emplace_back("actor.action", *v);
        out.push_back(std::move(o));
      }
      break;
    case MessageKind::planning:
      if (auto action = string_field(p, "ego_action", kind)) {
        SceneObject o{"ego", {{"ego.action", *action}}};
        if (auto cause = string_field(p, "stop_cause", kind); cause && *cause != "none")
          o.properties.emplace_back("ego.stop_cause", *cause);
        out.push_back(std::move(o));
      }
      break;
    case MessageKind::localization:
    case MessageKind::image_ref:
      break;
  }
  return out;
}

void zero_orphans(FrameVector& vector, const SchemaRegistry& registry) {
  for (std::size_t i = 0; i < registry.size(); ++i)
    if (auto parent = registry.parent_of(i); parent && vector.values[*parent] == 0)
      vector.values[i] = 0;
}

bool conforms(const FrameVector& vector, const SchemaRegistry& registry) {
  if (vector.values.size() != registry.size()) return false;
  for (std::size_t i = 0; i < registry.size(); ++i) {
    const auto v = vector.values[i];
    if (v == 0) continue;
    if (!registry.value_of(i, v)) return false;
    if (auto parent = registry.parent_of(i); parent && vector.values[*parent] == 0) return false;
  }
  return true;
}

FrameVector encode_frame(const Frame& frame, const SchemaRegistry& registry) {
  FrameVector v{std::vector<std::uint32_t>(registry.size(), 0), frame.t};
  for (const auto& [name, message] : frame.messages) {
    for (const auto& object : extract_objects(message)) {
      auto idx = registry.index_of(object.presence);
      // Only the first object of each type contributes its properties.
      if (!idx || v.values[*idx] != 0) continue;
      v.values[*idx] = registry.code(*idx, kPresentValue);
      for (const auto& [prop, value] : object.properties)
        if (auto p = registry.index_of(prop)) v.values[*p] = registry.code(*p, value);
    }
  }
  zero_orphans(v, registry);
  return v;
}

FrameVector apply_filter(FrameVector vector, const ModuleFilter& filter,
                         const SchemaRegistry& registry) {
  for (std::size_t i = 0; i < vector.values.size(); ++i)
    if (!filter.retained.at(i)) vector.values[i] = 0;
  zero_orphans(vector, registry);
  return vector;
}

std::vector<FrameVector> encode_recording(const AlignedRecording& aligned,
                                          const SchemaRegistry& registry,
                                          const ModuleFilter& filter) {
  if (aligned.empty()) throw InputError("cannot encode an empty recording");
  std::vector<FrameVector> out;
  out.reserve(aligned.size());
  for (const auto& frame : aligned.frames)
    out.push_back(apply_filter(encode_frame(frame, registry), filter, registry));
  return out;
}

}  // namespace strap
