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

#include "strap/toy_modules.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <utility>

#include "strap/error.hpp"
#include "strap/prioritization.hpp"

namespace strap {

namespace {

struct Knob {
  const char* name;
  const char* function;
};

struct ConstantKnob {
  const char* name;
  double value;
  const char* function;
};

struct ArithKnob {
  const char* name;
  char op;
  const char* function;
};

struct VariableKnob {
  const char* name;
  double scale;  // typical magnitude of a generated offset
  const char* function;
};

struct Layout {
  std::vector<std::string> functions;
  std::vector<ConstantKnob> constants;
  std::vector<VariableKnob> variables;
  std::vector<ArithKnob> arith;
  std::vector<Knob> conditions;
};

const Layout& layout(ModuleKind kind) {
  static const Layout traffic_light{
      {"detect_lights", "classify_color", "classify_shape", "classify_orientation"},
      {{"max_range", 100.0, "detect_lights"},
       {"dark_intensity", 0.2, "classify_color"},
       {"green_hue_min", 0.25, "classify_color"},
       {"yellow_hue_min", 0.10, "classify_color"},
       {"round_min", 0.6, "classify_shape"},
       {"vertical_aspect_min", 1.5, "classify_orientation"}},
      {{"distance", 50.0, "detect_lights"},
       {"hue", 0.1, "classify_color"},
       {"roundness", 0.3, "classify_shape"}},
      {{"aspect_ratio", '/', "classify_orientation"}},
      {{"in_range", "detect_lights"},
       {"is_dark", "classify_color"},
       {"is_round", "classify_shape"},
       {"is_vertical", "classify_orientation"}}};
  static const Layout obstacle{
      {"filter_detections", "classify_actor", "estimate_motion", "detect_statics"},
      {{"min_confidence", 0.5, "filter_detections"},
       {"ped_max_length", 1.2, "classify_actor"},
       {"bus_min_length", 10.0, "classify_actor"},
       {"truck_min_length", 7.0, "classify_actor"},
       {"van_min_length", 5.0, "classify_actor"},
       {"length_factor", 1.0, "classify_actor"},
       {"stop_speed", 0.3, "estimate_motion"},
       {"lateral_threshold", 0.8, "estimate_motion"},
       {"overtake_speed", 15.0, "estimate_motion"},
       {"static_min_confidence", 0.5, "detect_statics"}},
      {{"confidence", 0.3, "filter_detections"},
       {"length", 2.0, "classify_actor"},
       {"speed", 3.0, "estimate_motion"}},
      {{"length_scale", '*', "classify_actor"}},
      {{"is_confident", "filter_detections"},
       {"is_pedestrian", "classify_actor"},
       {"is_stopped", "estimate_motion"},
       {"is_lane_change", "estimate_motion"},
       {"is_static_confident", "detect_statics"}}};
  static const Layout prediction{
      {"predict_tracks", "estimate_accel", "classify_intent"},
      {{"horizon", 1.0, "estimate_accel"},
       {"stop_speed", 0.5, "classify_intent"},
       {"walk_min", 0.5, "classify_intent"}},
      {{"speed", 2.0, "estimate_accel"}, {"accel", 1.0, "estimate_accel"}},
      {{"accel_delta", '-', "estimate_accel"}, {"extrapolate", '+', "estimate_accel"}},
      {{"pedestrian_crossing", "classify_intent"}, {"predicted_stop", "classify_intent"}}};
  static const Layout planning{
      {"plan", "check_lights", "check_obstacles", "choose_maneuver"},
      {{"stop_distance", 60.0, "check_lights"}, {"blocked_min", 1.0, "choose_maneuver"}},
      {{"light_distance", 30.0, "check_lights"}, {"stopped_count", 1.0, "check_obstacles"}},
      {{"stopped_tally", '+', "check_obstacles"}},
      {{"light_stop", "check_lights"},
       {"sign_stop", "check_obstacles"},
       {"crossing_stop", "check_obstacles"},
       {"blocked", "choose_maneuver"},
       {"overtake_cyclist", "choose_maneuver"}}};
  switch (kind) {
    case ModuleKind::traffic_light: return traffic_light;
    case ModuleKind::obstacle: return obstacle;
    case ModuleKind::prediction: return prediction;
    case ModuleKind::planning: return planning;
    case ModuleKind::all: break;
  }
  throw InputError("toy modules exist for single modules only, not 'all'");
}

ModuleParams default_params(ModuleKind kind) {
  const auto& l = layout(kind);
  ModuleParams p;
  for (const auto& c : l.constants) p.constants[c.name] = c.value;
  for (const auto& v : l.variables) p.variable_offsets[v.name] = 0.0;
  for (const auto& a : l.arith) p.arith_sites[a.name] = a.op;
  for (const auto& c : l.conditions) p.flipped_conditions[c.name] = false;
  return p;
}

template <typename Map>
std::size_t map_distance(const Map& a, const Map& b) {
  std::set<std::string> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  std::size_t n = 0;
  for (const auto& k : keys) {
    auto ia = a.find(k);
    auto ib = b.find(k);
    if (ia == a.end() || ib == b.end() || ia->second != ib->second) ++n;
  }
  return n;
}

bool is_arith_op(char c) { return c == '+' || c == '-' || c == '*' || c == '/'; }

double num(const nlohmann::json& j, const char* key, double fallback = 0.0) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_number()) throw InputError(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

bool flag(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return false;
  if (!it->is_boolean()) throw InputError(std::string("field '") + key + "' must be a boolean");
  return it->get<bool>();
}

std::string str(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) throw InputError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

const nlohmann::json& list(const nlohmann::json& payload, const char* key) {
  static const nlohmann::json empty = nlohmann::json::array();
  if (!payload.is_object()) return empty;
  auto it = payload.find(key);
  if (it == payload.end() || it->is_null()) return empty;
  if (!it->is_array()) throw InputError(std::string("field '") + key + "' must be an array");
  return *it;
}

const nlohmann::json& payload_of(const Frame& inputs, MessageKind kind) {
  static const nlohmann::json empty = nlohmann::json::object();
  const Message* m = inputs.find(kind);
  return m ? m->payload : empty;
}

}  // namespace

std::string_view to_string(MutationOperator op) {
  switch (op) {
    case MutationOperator::replace_arith: return "replace_arith";
    case MutationOperator::change_constant: return "change_constant";
    case MutationOperator::change_variable: return "change_variable";
    case MutationOperator::flip_condition: return "flip_condition";
  }
  return "change_constant";
}

std::optional<MutationOperator> parse_mutation_operator(std::string_view name) {
  for (auto op : {MutationOperator::replace_arith, MutationOperator::change_constant,
                  MutationOperator::change_variable, MutationOperator::flip_condition})
    if (to_string(op) == name) return op;
  return std::nullopt;
}

std::size_t param_distance(const ModuleParams& a, const ModuleParams& b) {
  return map_distance(a.constants, b.constants) +
         map_distance(a.variable_offsets, b.variable_offsets) +
         map_distance(a.arith_sites, b.arith_sites) +
         map_distance(a.flipped_conditions, b.flipped_conditions);
}

ToyModule::ToyModule(ModuleKind kind) : kind_(kind), params_(default_params(kind)) {}

ToyModule::ToyModule(ModuleKind kind, ModuleParams params) : kind_(kind), params_(std::move(params)) {
  const auto defaults = default_params(kind);
  auto same_keys = [](const auto& x, const auto& y) {
    return std::equal(x.begin(), x.end(), y.begin(), y.end(),
                      [](const auto& p, const auto& q) { return p.first == q.first; });
  };
  if (!same_keys(params_.constants, defaults.constants) ||
      !same_keys(params_.variable_offsets, defaults.variable_offsets) ||
      !same_keys(params_.arith_sites, defaults.arith_sites) ||
      !same_keys(params_.flipped_conditions, defaults.flipped_conditions))
    throw InputError("parameter names do not match the " + std::string(to_string(kind)) + " module");
  for (const auto& [name, op] : params_.arith_sites)
    if (!is_arith_op(op)) throw InputError("arithmetic site '" + name + "' has invalid operator");
}

const std::vector<std::string>& ToyModule::functions() const { return layout(kind_).functions; }

std::vector<std::string> ToyModule::targets(MutationOperator op) const {
  const auto& l = layout(kind_);
  std::vector<std::string> out;
  switch (op) {
    case MutationOperator::change_constant:
      for (const auto& c : l.constants) out.emplace_back(c.name);
      break;
    case MutationOperator::change_variable:
      for (const auto& v : l.variables) out.emplace_back(v.name);
      break;
    case MutationOperator::replace_arith:
      for (const auto& a : l.arith) out.emplace_back(a.name);
      break;
    case MutationOperator::flip_condition:
      for (const auto& c : l.conditions) out.emplace_back(c.name);
      break;
  }
  return out;
}

const std::string& ToyModule::function_of(const std::string& target) const {
  const auto& l = layout(kind_);
  auto fn = [&](const char* name) -> const std::string& {
    return *std::find(l.functions.begin(), l.functions.end(), name);
  };
  for (const auto& c : l.constants)
    if (target == c.name) return fn(c.function);
  for (const auto& v : l.variables)
    if (target == v.name) return fn(v.function);
  for (const auto& a : l.arith)
    if (target == a.name) return fn(a.function);
  for (const auto& c : l.conditions)
    if (target == c.name) return fn(c.function);
  throw InputError("unknown target '" + target + "' for the " + std::string(to_string(kind_)) +
                   " module");
}

ToyModule apply_mutant(const ToyModule& module, const Mutant& mutant) {
  if (mutant.module != module.kind())
    throw InputError("mutant '" + mutant.id + "' targets the " +
                     std::string(to_string(mutant.module)) + " module, not " +
                     std::string(to_string(module.kind())));
  ModuleParams p = module.params();
  auto unknown = [&]() {
    return InputError("mutant '" + mutant.id + "': unknown " + std::string(to_string(mutant.op)) +
                      " target '" + mutant.target + "'");
  };
  auto offset = [&]() {
    if (!mutant.delta.is_number())
      throw InputError("mutant '" + mutant.id + "': delta must be a number");
    return mutant.delta.get<double>();
  };
  switch (mutant.op) {
    case MutationOperator::change_constant: {
      auto it = p.constants.find(mutant.target);
      if (it == p.constants.end()) throw unknown();
      it->second += offset();
      break;
    }
    case MutationOperator::change_variable: {
      auto it = p.variable_offsets.find(mutant.target);
      if (it == p.variable_offsets.end()) throw unknown();
      it->second += offset();
      break;
    }
    case MutationOperator::replace_arith: {
      auto it = p.arith_sites.find(mutant.target);
      if (it == p.arith_sites.end()) throw unknown();
      if (!mutant.delta.is_string() || mutant.delta.get<std::string>().size() != 1 ||
          !is_arith_op(mutant.delta.get<std::string>()[0]))
        throw InputError("mutant '" + mutant.id + "': delta must be one of + - * /");
      it->second = mutant.delta.get<std::string>()[0];
      break;
    }
    case MutationOperator::flip_condition: {
      auto it = p.flipped_conditions.find(mutant.target);
      if (it == p.flipped_conditions.end()) throw unknown();
      it->second = !it->second;
      break;
    }
  }
  return ToyModule(module.kind(), std::move(p));
}

std::vector<Mutant> generate_mutants(ModuleKind module, int count, std::uint64_t seed) {
  if (count < 0) throw InputError("mutant count must be >= 0");
  const auto& l = layout(module);
  std::mt19937_64 gen(seed);
  constexpr std::array<double, 4> kFactors{-0.5, -0.25, 0.25, 0.5};
  constexpr std::array<double, 4> kSteps{-1.0, -0.5, 0.5, 1.0};
  constexpr std::array<MutationOperator, 4> kOps{
      MutationOperator::replace_arith, MutationOperator::change_constant,
      MutationOperator::change_variable, MutationOperator::flip_condition};
  std::vector<Mutant> out;
  for (int i = 0; i < count; ++i) {
    Mutant m;
    char id[16];
    std::snprintf(id, sizeof id, "-m%03d", i);
    m.id = std::string(to_string(module)) + id;
    m.module = module;
    m.op = kOps[uniform_below(gen, kOps.size())];
    switch (m.op) {
      case MutationOperator::change_constant: {
        const auto& c = l.constants[uniform_below(gen, l.constants.size())];
        m.target = c.name;
        m.delta = c.value * kFactors[uniform_below(gen, kFactors.size())];
        break;
      }
      case MutationOperator::change_variable: {
        const auto& v = l.variables[uniform_below(gen, l.variables.size())];
        m.target = v.name;
        m.delta = v.scale * kSteps[uniform_below(gen, kSteps.size())];
        break;
      }
      case MutationOperator::replace_arith: {
        const auto& a = l.arith[uniform_below(gen, l.arith.size())];
        m.target = a.name;
        std::string others;
        for (char c : std::string("+-*/"))
          if (c != a.op) others += c;
        m.delta = std::string(1, others[uniform_below(gen, others.size())]);
        break;
      }
      case MutationOperator::flip_condition: {
        m.target = l.conditions[uniform_below(gen, l.conditions.size())].name;
        m.delta = nullptr;
        break;
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

ModuleSession::ModuleSession(ToyModule module) : module_(std::move(module)) {
  for (const auto& f : module_.functions()) calls_[f] = 0;
}

double ModuleSession::constant(const char* name) const {
  return module_.params().constants.at(name);
}

double ModuleSession::variable(const char* name, double value) const {
  return value + module_.params().variable_offsets.at(name);
}

double ModuleSession::arith(const char* site, double a, double b) const {
  switch (module_.params().arith_sites.at(site)) {
    case '+': return a + b;
    case '-': return a - b;
    case '*': return a * b;
    default: return b == 0.0 ? 0.0 : a / b;
  }
}

bool ModuleSession::condition(const char* name, bool value) const {
  return module_.params().flipped_conditions.at(name) ? !value : value;
}

void ModuleSession::count(const std::string& function) { ++calls_[function]; }

nlohmann::json ModuleSession::process(const Frame& inputs) {
  switch (module_.kind()) {
    case ModuleKind::traffic_light: return traffic_lights(inputs);
    case ModuleKind::obstacle: return obstacles(inputs);
    case ModuleKind::prediction: return prediction(inputs);
    case ModuleKind::planning: return planning(inputs);
    case ModuleKind::all: break;
  }
  throw InputError("cannot run module 'all'");
}

nlohmann::json ModuleSession::traffic_lights(const Frame& inputs) {
  const auto& camera = payload_of(inputs, MessageKind::image_ref);
  auto lights = nlohmann::json::array();
  count("detect_lights");
  for (const auto& raw : list(camera, "lights")) {
    const double distance = variable("distance", num(raw, "distance"));
    if (!condition("in_range", distance <= constant("max_range"))) continue;

    count("classify_color");
    const double hue = variable("hue", num(raw, "hue"));
    std::string color;
    if (condition("is_dark", num(raw, "intensity") < constant("dark_intensity")))
      color = "black";
    else if (hue >= constant("green_hue_min"))
      color = "green";
    else if (hue >= constant("yellow_hue_min"))
      color = "yellow";
    else
      color = "red";

    count("classify_shape");
    const double roundness = variable("roundness", num(raw, "roundness"));
    const bool round = condition("is_round", roundness >= constant("round_min"));

    count("classify_orientation");
    const double aspect = arith("aspect_ratio", num(raw, "height"), num(raw, "width"));
    const bool vertical = condition("is_vertical", aspect >= constant("vertical_aspect_min"));

    lights.push_back({{"color", color},
                      {"shape", round ? "round" : "square"},
                      {"orientation", vertical ? "vertical" : "horizontal"},
                      {"distance", distance}});
  }
  return {{"lights", std::move(lights)}};
}

nlohmann::json ModuleSession::obstacles(const Frame& inputs) {
  const auto& camera = payload_of(inputs, MessageKind::image_ref);
  auto obstacles = nlohmann::json::array();
  count("filter_detections");
  for (const auto& raw : list(camera, "objects")) {
    const double confidence = variable("confidence", num(raw, "confidence", 1.0));
    if (!condition("is_confident", confidence >= constant("min_confidence"))) continue;

    count("classify_actor");
    const double length =
        arith("length_scale", variable("length", num(raw, "length")), constant("length_factor"));
    const double wheels = num(raw, "wheels");
    nlohmann::json ob = nlohmann::json::object();
    if (condition("is_pedestrian", wheels == 0 && length <= constant("ped_max_length"))) {
      ob["actor"] = "pedestrian";
    } else if (wheels == 2 || wheels == 3) {
      ob["actor"] = "cyclist";
      ob["subtype"] = wheels == 3 ? "tricyclist" : flag(raw, "motor") ? "motorcyclist" : "bicyclist";
    } else if (wheels >= 4) {
      ob["actor"] = "vehicle";
      if (length >= constant("bus_min_length"))
        ob["subtype"] = "bus";
      else if (length >= constant("truck_min_length"))
        ob["subtype"] = "truck";
      else if (length >= constant("van_min_length"))
        ob["subtype"] = "van";
      else
        ob["subtype"] = "car";
    } else {
      ob["actor"] = "unknown";
    }

    count("estimate_motion");
    const double speed = variable("speed", num(raw, "speed"));
    const double lateral = num(raw, "lateral");
    if (condition("is_stopped", speed < constant("stop_speed")))
      ob["action"] = "stop";
    else if (condition("is_lane_change", std::abs(lateral) >= constant("lateral_threshold")))
      ob["action"] = "change_lane";
    else if (speed >= constant("overtake_speed"))
      ob["action"] = "overtake";
    else
      ob["action"] = "cruise";
    ob["on_crosswalk"] = flag(raw, "on_crosswalk");
    ob["at_intersection"] = flag(raw, "at_intersection");
    ob["speed"] = speed;
    ob["lateral"] = lateral;
    obstacles.push_back(std::move(ob));
  }

  auto objects = nlohmann::json::array();
  count("detect_statics");
  for (const auto& raw : list(camera, "statics")) {
    const bool confident = num(raw, "confidence", 1.0) >= constant("static_min_confidence");
    if (condition("is_static_confident", confident)) objects.push_back(str(raw, "type"));
  }
  return {{"obstacles", std::move(obstacles)}, {"objects", std::move(objects)}};
}

nlohmann::json ModuleSession::prediction(const Frame& inputs) {
  const auto& detections = payload_of(inputs, MessageKind::obstacle);
  auto tracks = nlohmann::json::array();
  std::map<std::string, double> seen;
  std::map<std::string, int> per_actor;
  count("predict_tracks");
  for (const auto& ob : list(detections, "obstacles")) {
    const std::string actor = str(ob, "actor");
    const std::string key = actor + "#" + std::to_string(per_actor[actor]++);

    count("estimate_accel");
    const double speed = variable("speed", num(ob, "speed"));
    auto prev = previous_speed_.find(key);
    const double accel =
        variable("accel", arith("accel_delta", speed, prev == previous_speed_.end() ? speed : prev->second));
    const double predicted = arith("extrapolate", speed, accel * constant("horizon"));
    seen[key] = speed;

    count("classify_intent");
    nlohmann::json track{{"actor", actor}};
    if (auto sub = str(ob, "subtype"); !sub.empty()) track["subtype"] = sub;
    const bool crossing = actor == "pedestrian" && flag(ob, "on_crosswalk") &&
                          speed >= constant("walk_min");
    if (condition("pedestrian_crossing", crossing))
      track["action"] = "cross";
    else if (condition("predicted_stop", predicted < constant("stop_speed")))
      track["action"] = "stop";
    else
      track["action"] = str(ob, "action").empty() ? "cruise" : str(ob, "action");
    track["speed"] = predicted;
    tracks.push_back(std::move(track));
  }
  // Tracks that left the scene are forgotten, so state never outlives one call.
  previous_speed_ = std::move(seen);
  return {{"tracks", std::move(tracks)}};
}

nlohmann::json ModuleSession::planning(const Frame& inputs) {
  count("plan");

  count("check_lights");
  bool light_stop = false;
  for (const auto& light : list(payload_of(inputs, MessageKind::traffic_light), "lights")) {
    const std::string color = str(light, "color");
    const double distance = variable("light_distance", num(light, "distance"));
    light_stop = light_stop || ((color == "red" || color == "yellow") &&
                                distance < constant("stop_distance"));
  }
  light_stop = condition("light_stop", light_stop);

  count("check_obstacles");
  const auto& statics = list(payload_of(inputs, MessageKind::obstacle), "objects");
  const bool sign_stop = condition(
      "sign_stop", std::any_of(statics.begin(), statics.end(),
                               [](const nlohmann::json& o) { return o == "stop_sign"; }));
  bool crossing = false;
  bool cruising_cyclist = false;
  double stopped = 0.0;
  for (const auto& track : list(payload_of(inputs, MessageKind::prediction), "tracks")) {
    const std::string actor = str(track, "actor");
    const std::string action = str(track, "action");
    crossing = crossing || action == "cross";
    cruising_cyclist = cruising_cyclist || (actor == "cyclist" && action == "cruise");
    if (actor == "vehicle" && action == "stop") stopped = arith("stopped_tally", stopped, 1.0);
  }
  crossing = condition("crossing_stop", crossing);
  stopped = variable("stopped_count", stopped);

  count("choose_maneuver");
  if (light_stop) return {{"ego_action", "stop"}, {"stop_cause", "traffic_light"}};
  if (sign_stop) return {{"ego_action", "stop"}, {"stop_cause", "stop_sign"}};
  if (crossing) return {{"ego_action", "stop"}, {"stop_cause", "none"}};
  if (condition("blocked", stopped >= constant("blocked_min")))
    return {{"ego_action", "change_lane"}, {"stop_cause", "none"}};
  if (condition("overtake_cyclist", cruising_cyclist))
    return {{"ego_action", "overtake"}, {"stop_cause", "none"}};
  return {{"ego_action", "cruise"}, {"stop_cause", "none"}};
}

}  // namespace strap
