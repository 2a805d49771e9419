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

#include "strap/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <optional>
#include <random>
#include <set>
#include <utility>

#include "strap/error.hpp"
#include "strap/prioritization.hpp"

namespace strap {

namespace {

using World = std::map<std::string, nlohmann::json>;

const std::vector<std::string>& actors() {
  static const std::vector<std::string> a{"vehicle", "pedestrian", "cyclist", "unknown_actor"};
  return a;
}

const std::vector<std::string>& statics() {
  static const std::vector<std::string> s{"stop_sign", "crosswalk", "intersection", "traffic_cone",
                                          "unknown_static"};
  return s;
}

// Allowed values per property key; an empty set means "non-negative number".
const std::map<std::string, std::set<std::string>>& property_values() {
  static const std::map<std::string, std::set<std::string>> p = [] {
    std::map<std::string, std::set<std::string>> m{
        {"traffic_light.color", {"red", "green", "yellow", "black"}},
        {"traffic_light.shape", {"square", "round"}},
        {"traffic_light.orientation", {"vertical", "horizontal"}},
        {"traffic_light.distance", {}},
        {"vehicle.subtype", {"truck", "car", "bus", "van"}},
        {"cyclist.subtype", {"bicyclist", "motorcyclist", "tricyclist"}},
    };
    for (const auto& a : actors())
      m[a + ".action"] = {"stop", "cruise", "change_lane", "overtake", "cross"};
    return m;
  }();
  return p;
}

bool is_object_key(const std::string& key) {
  return key == "traffic_light" ||
         std::find(actors().begin(), actors().end(), key) != actors().end() ||
         std::find(statics().begin(), statics().end(), key) != statics().end();
}

std::string owner_of(const std::string& property) { return property.substr(0, property.find('.')); }

void check_key(const std::string& key, int frame) {
  if (!is_object_key(key) && !property_values().contains(key))
    throw InputError("event at frame " + std::to_string(frame) + ": unknown key '" + key + "'");
}

void check_value(const std::string& key, const nlohmann::json& value, int frame) {
  const std::string where = "event at frame " + std::to_string(frame) + ": '" + key + "'";
  if (is_object_key(key)) {
    if (value != true && value != kPresentValue)
      throw InputError(where + " must be \"present\" or true");
    return;
  }
  const auto& allowed = property_values().at(key);
  if (allowed.empty()) {
    if (!value.is_number() || value.get<double>() < 0)
      throw InputError(where + " must be a non-negative number");
  } else if (!value.is_string() || !allowed.contains(value.get<std::string>())) {
    throw InputError(where + " has unsupported value " + value.dump());
  }
}

void apply_event(World& world, const ScenarioEvent& e) {
  for (const auto& key : e.unset) {
    world.erase(key);
    if (is_object_key(key))
      for (auto it = world.begin(); it != world.end();)
        it = owner_of(it->first) == key && it->first != key ? world.erase(it) : std::next(it);
  }
  for (const auto& [key, value] : e.set) {
    world[key] = value;
    if (!is_object_key(key)) world[owner_of(key)] = true;
  }
}

std::string text(const World& world, const std::string& key, const char* fallback) {
  auto it = world.find(key);
  return it == world.end() ? fallback : it->second.get<std::string>();
}

// Synthetic raw measurements the detectors threshold.
nlohmann::json camera_payload(const World& world, std::int64_t k) {
  char ref[32];
  std::snprintf(ref, sizeof ref, "frame_%06lld.jpg", static_cast<long long>(k));
  nlohmann::json cam{{"ref", ref},
                     {"lights", nlohmann::json::array()},
                     {"objects", nlohmann::json::array()},
                     {"statics", nlohmann::json::array()}};

  if (world.contains("traffic_light")) {
    const std::string color = text(world, "traffic_light.color", "green");
    double hue = 0.0;
    double intensity = 0.8;
    if (color == "red") hue = 0.02;
    if (color == "yellow") hue = 0.15;
    if (color == "green") hue = 0.36;
    if (color == "black") intensity = 0.05;
    const bool vertical = text(world, "traffic_light.orientation", "vertical") == "vertical";
    auto d = world.find("traffic_light.distance");
    cam["lights"].push_back({{"hue", hue},
                             {"intensity", intensity},
                             {"roundness", text(world, "traffic_light.shape", "round") == "round" ? 0.9 : 0.3},
                             {"width", vertical ? 1.0 : 3.0},
                             {"height", vertical ? 3.0 : 1.0},
                             {"distance", d == world.end() ? 40.0 : d->second.get<double>()}});
  }

  for (const auto& actor : actors()) {
    if (!world.contains(actor)) continue;
    double length = 1.5;
    double wheels = 1;
    bool motor = false;
    double cruise = 3.0;
    if (actor == "vehicle") {
      const std::string sub = text(world, "vehicle.subtype", "car");
      length = sub == "bus" ? 12.0 : sub == "truck" ? 8.5 : sub == "van" ? 5.8 : 4.5;
      wheels = sub == "bus" ? 6 : 4;
      motor = true;
      cruise = 10.0;
    } else if (actor == "pedestrian") {
      length = 0.6;
      wheels = 0;
      cruise = 1.2;
    } else if (actor == "cyclist") {
      const std::string sub = text(world, "cyclist.subtype", "bicyclist");
      length = sub == "motorcyclist" ? 2.1 : sub == "tricyclist" ? 2.0 : 1.8;
      wheels = sub == "tricyclist" ? 3 : 2;
      motor = sub == "motorcyclist";
      cruise = 5.0;
    }
    const std::string action = text(world, actor + ".action", "cruise");
    double speed = cruise;
    double lateral = 0.0;
    if (action == "stop") speed = 0.0;
    if (action == "change_lane") lateral = 1.2;
    if (action == "overtake") speed = 18.0;
    if (action == "cross") speed = 1.2;
    cam["objects"].push_back({{"length", length},
                              {"wheels", wheels},
                              {"motor", motor},
                              {"speed", speed},
                              {"lateral", lateral},
                              {"on_crosswalk", action == "cross"},
                              {"at_intersection", world.contains("intersection")},
                              {"confidence", 0.9}});
  }

  for (const auto& s : statics())
    if (world.contains(s))
      cam["statics"].push_back({{"type", s == "unknown_static" ? "unknown" : s}, {"confidence", 0.9}});
  return cam;
}

template <std::size_t N>
std::string pick_other(std::mt19937_64& gen, const std::array<const char*, N>& options,
                       const std::string& current) {
  std::vector<std::string> others;
  for (const char* o : options)
    if (current != o) others.emplace_back(o);
  return others[uniform_below(gen, others.size())];
}

// One-frame spurious output in place of the real one.
nlohmann::json glitch(nlohmann::json payload, MessageKind kind, std::mt19937_64& gen) {
  constexpr std::array<const char*, 4> kColors{"red", "green", "yellow", "black"};
  constexpr std::array<const char*, 5> kActions{"stop", "cruise", "change_lane", "overtake", "cross"};
  switch (kind) {
    case MessageKind::traffic_light: {
      auto& lights = payload["lights"];
      if (lights.empty())
        lights.push_back({{"color", pick_other(gen, kColors, "")},
                          {"shape", "round"},
                          {"orientation", "vertical"},
                          {"distance", 30.0}});
      else
        lights[0]["color"] = pick_other(gen, kColors, lights[0]["color"].get<std::string>());
      break;
    }
    case MessageKind::obstacle: {
      auto& obstacles = payload["obstacles"];
      if (obstacles.empty())
        obstacles.push_back({{"actor", "unknown"},
                             {"action", "cruise"},
                             {"on_crosswalk", false},
                             {"at_intersection", false},
                             {"speed", 3.0},
                             {"lateral", 0.0}});
      else
        obstacles.erase(obstacles.begin());
      break;
    }
    case MessageKind::prediction: {
      auto& tracks = payload["tracks"];
      if (tracks.empty())
        tracks.push_back({{"actor", "unknown"}, {"action", "cruise"}, {"speed", 3.0}});
      else
        tracks[0]["action"] = pick_other(gen, kActions, tracks[0]["action"].get<std::string>());
      break;
    }
    case MessageKind::planning:
      if (payload["ego_action"] == "stop")
        payload = {{"ego_action", "cruise"}, {"stop_cause", "none"}};
      else
        payload = {{"ego_action", "stop"}, {"stop_cause", "none"}};
      break;
    case MessageKind::localization:
    case MessageKind::image_ref:
      break;
  }
  return payload;
}

}  // namespace

void ScenarioScript::validate() const {
  if (duration_frames < 1)
    throw InputError("duration_frames must be >= 1, got " + std::to_string(duration_frames));
  if (fps < 1) throw InputError("fps must be >= 1, got " + std::to_string(fps));
  if (!(glitch_rate >= 0.0 && glitch_rate < 1.0))
    throw InputError("glitch_rate must lie in [0, 1), got " + std::to_string(glitch_rate));
  int last = 0;
  for (const auto& e : events) {
    if (e.frame < 0 || e.frame >= duration_frames)
      throw InputError("event frame " + std::to_string(e.frame) + " outside [0, " +
                       std::to_string(duration_frames) + ")");
    if (e.frame < last)
      throw InputError("events must be ordered by frame; " + std::to_string(e.frame) +
                       " follows " + std::to_string(last));
    last = e.frame;
    for (const auto& [key, value] : e.set) {
      check_key(key, e.frame);
      check_value(key, value, e.frame);
    }
    for (const auto& key : e.unset) check_key(key, e.frame);
  }
}

ScenarioScript script_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("scenario script must be a JSON object");
  try {
    ScenarioScript s;
    s.duration_frames = j.at("duration_frames").get<int>();
    s.fps = j.value("fps", 15);
    s.glitch_rate = j.value("glitch_rate", 0.0);
    for (const auto& ej : j.value("events", nlohmann::json::array())) {
      ScenarioEvent e;
      e.frame = ej.at("frame").get<int>();
      const auto set = ej.value("set", nlohmann::json::object());
      for (const auto& [key, value] : set.items()) e.set[key] = value;
      e.unset = ej.value("unset", std::vector<std::string>{});
      s.events.push_back(std::move(e));
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed scenario script: ") + e.what());
  }
}

nlohmann::json to_json(const ScenarioScript& script) {
  nlohmann::ordered_json events = nlohmann::ordered_json::array();
  for (const auto& e : script.events) {
    nlohmann::ordered_json ej{{"frame", e.frame}};
    if (!e.set.empty()) ej["set"] = e.set;
    if (!e.unset.empty()) ej["unset"] = e.unset;
    events.push_back(std::move(ej));
  }
  nlohmann::ordered_json j{{"duration_frames", script.duration_frames},
                           {"fps", script.fps},
                           {"glitch_rate", script.glitch_rate},
                           {"events", std::move(events)}};
  return nlohmann::json::parse(j.dump());
}

ScenarioScript load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario script " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return script_from_json(j);
}

bool prediction_publishes(std::int64_t k) {
  if (k < 0) return false;
  // round(1.5 j) = (3 j + 1) / 2, so k is hit iff j = (2 k) / 3 or its successor maps to k.
  const std::int64_t j = (2 * k) / 3;
  return (3 * j + 1) / 2 == k || (3 * (j + 1) + 1) / 2 == k;
}

Recording generate_recording(const ScenarioScript& script, std::uint64_t seed) {
  script.validate();
  std::mt19937_64 gen(seed);
  const std::int64_t fps = script.fps;
  const std::int64_t period = 1'000'000'000 / fps;
  auto offset = [&](std::int64_t permille) { return period * permille / 1000; };

  ModuleSession lights(ToyModule(ModuleKind::traffic_light));
  ModuleSession obstacles(ToyModule(ModuleKind::obstacle));
  ModuleSession predictor(ToyModule(ModuleKind::prediction));
  ModuleSession planner(ToyModule(ModuleKind::planning));

  std::vector<Message> messages;
  messages.reserve(static_cast<std::size_t>(script.duration_frames) * 6);
  World world;
  std::size_t next_event = 0;
  Frame inputs;

  auto emit = [&](const char* channel, std::int64_t t, MessageKind kind, nlohmann::json payload,
                  bool glitchable) {
    if (glitchable && script.glitch_rate > 0 && uniform_unit(gen) < script.glitch_rate)
      payload = glitch(std::move(payload), kind, gen);
    Message m = make_message(channel, Timestamp{t}, kind, std::move(payload));
    inputs.messages[channel] = m;
    messages.push_back(std::move(m));
  };

  for (std::int64_t k = 0; k < script.duration_frames; ++k) {
    while (next_event < script.events.size() && script.events[next_event].frame == k)
      apply_event(world, script.events[next_event++]);
    const std::int64_t t = k * 1'000'000'000 / fps;
    inputs.t = Timestamp{t};

    emit(channels::kCamera, t, MessageKind::image_ref, camera_payload(world, k), false);
    emit(channels::kLocalization, t + offset(50), MessageKind::localization,
         {{"x", static_cast<double>(k) * 0.5}, {"y", 0.0}, {"heading", 0.0}}, false);
    emit(channels::kTrafficLight, t + offset(150), MessageKind::traffic_light,
         lights.process(inputs), true);
    emit(channels::kObstacle, t + offset(250), MessageKind::obstacle, obstacles.process(inputs),
         true);
    if (prediction_publishes(k))
      emit(channels::kPrediction, t + offset(400), MessageKind::prediction,
           predictor.process(inputs), true);
    emit(channels::kPlanning, t + offset(550), MessageKind::planning, planner.process(inputs), true);
  }
  return make_recording(std::move(messages));
}

std::vector<Message> channel_messages(std::span<const Frame> frames, MessageKind kind) {
  std::vector<Message> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    const Message* m = f.find(kind);
    if (!m)
      throw InputError("frame at t=" + std::to_string(f.t.ns) + " has no " +
                       std::string(to_string(kind)) + " channel");
    out.push_back(*m);
  }
  return out;
}

ReplayResult replay_segment(const ToyModule& module, std::span<const Frame> frames,
                            std::size_t warmup_frames) {
  if (warmup_frames > frames.size())
    throw InputError("warm-up of " + std::to_string(warmup_frames) + " frames exceeds the " +
                     std::to_string(frames.size()) + " frames replayed");
  const MessageKind out_kind = module.output_kind();
  ModuleSession session(module);
  ReplayResult r;
  r.outputs.reserve(frames.size());
  r.comparable.reserve(frames.size());
  CallCounts before_compare = session.call_counts();
  std::optional<Message> last;

  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    if (i == warmup_frames) before_compare = session.call_counts();
    const Message* recorded = f.find(out_kind);
    if (!recorded)
      throw InputError("recording has no " + std::string(to_string(out_kind)) +
                       " channel for the " + std::string(to_string(module.kind())) + " module");
    const bool fresh = recorded->origin >= f.t;
    Message out;
    if (fresh || !last) {
      out = make_message(recorded->channel, f.t, out_kind, session.process(f));
    } else {
      out = *last;
      out.t = f.t;
    }
    last = out;
    r.outputs.push_back(std::move(out));
    r.comparable.push_back(i >= warmup_frames);
  }
  if (warmup_frames == frames.size()) before_compare = session.call_counts();
  for (const auto& [fn, n] : session.call_counts()) r.call_counts[fn] = n - before_compare[fn];
  return r;
}

std::vector<FrameVector> vectorize_messages(std::span<const Message> messages,
                                            const SchemaRegistry& registry) {
  std::vector<FrameVector> out;
  out.reserve(messages.size());
  for (const auto& m : messages) {
    Frame f;
    f.t = m.t;
    f.messages.emplace(m.channel, m);
    out.push_back(encode_frame(f, registry));
  }
  return out;
}

}  // namespace strap
