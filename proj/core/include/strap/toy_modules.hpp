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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "strap/recording.hpp"
#include "strap/schema.hpp"

namespace strap {

enum class MutationOperator { replace_arith, change_constant, change_variable, flip_condition };

std::string_view to_string(MutationOperator op);
std::optional<MutationOperator> parse_mutation_operator(std::string_view name);

/// Tunable knobs of a toy module. Every mutation touches exactly one entry.
struct ModuleParams {
  std::map<std::string, double> constants;
  /// Offsets added to intermediate variables right after they are computed.
  std::map<std::string, double> variable_offsets;
  /// Operator applied at each arithmetic site: one of + - * /.
  std::map<std::string, char> arith_sites;
  std::map<std::string, bool> flipped_conditions;

  friend bool operator==(const ModuleParams&, const ModuleParams&) = default;
};

/// Number of entries that differ between two parameter sets of one module.
std::size_t param_distance(const ModuleParams& a, const ModuleParams& b);

struct Mutant {
  std::string id;
  ModuleKind module = ModuleKind::traffic_light;
  std::string target;
  MutationOperator op = MutationOperator::change_constant;
  /// Offset for change_constant/change_variable, "+"/"-"/"*"/"/" for
  /// replace_arith, ignored by flip_condition.
  nlohmann::json delta;

  friend bool operator==(const Mutant&, const Mutant&) = default;
};

using CallCounts = std::map<std::string, std::int64_t>;

/// A deterministic stand-in for one driving-stack module.
///
///   traffic_light  camera lights -> {"lights": [{color, shape, orientation, distance}]}
///   obstacle       camera objects/statics -> {"obstacles": [...], "objects": [...]}
///   prediction     obstacle -> {"tracks": [{actor, subtype, action, speed}]}
///   planning       lights, obstacles, tracks -> {"ego_action", "stop_cause"}
class ToyModule {
 public:
  /// Module with its default parameters. Throws InputError for ModuleKind::all.
  explicit ToyModule(ModuleKind kind);
  ToyModule(ModuleKind kind, ModuleParams params);

  ModuleKind kind() const { return kind_; }
  const ModuleParams& params() const { return params_; }
  MessageKind output_kind() const { return published_channel(kind_); }

  /// Internal function names, as reported in call counts.
  const std::vector<std::string>& functions() const;
  /// Mutation targets accepted by `op`.
  std::vector<std::string> targets(MutationOperator op) const;
  /// Internal function that reads `target`; throws InputError if unknown.
  const std::string& function_of(const std::string& target) const;

  friend bool operator==(const ToyModule&, const ToyModule&) = default;

 private:
  ModuleKind kind_;
  ModuleParams params_;
};

/// Copy of `module` with the mutation applied; `module` is left untouched.
/// Throws InputError when the mutant names another module or an unknown target.
ToyModule apply_mutant(const ToyModule& module, const Mutant& mutant);

/// `count` random mutants of one module, reproducible from `seed`.
std::vector<Mutant> generate_mutants(ModuleKind module, int count, std::uint64_t seed);

/// One running instance of a module. Holds the predictor's track history and
/// the per-function call counters, so every replay needs a fresh session.
class ModuleSession {
 public:
  explicit ModuleSession(ToyModule module);

  const ToyModule& module() const { return module_; }

  /// Computes the module output for one frame of inputs. Inputs are looked up
  /// by message kind; a missing detection channel counts as no detections.
  nlohmann::json process(const Frame& inputs);

  const CallCounts& call_counts() const { return calls_; }

 private:
  nlohmann::json traffic_lights(const Frame& inputs);
  nlohmann::json obstacles(const Frame& inputs);
  nlohmann::json prediction(const Frame& inputs);
  nlohmann::json planning(const Frame& inputs);

  double constant(const char* name) const;
  double variable(const char* name, double value) const;
  double arith(const char* site, double a, double b) const;
  bool condition(const char* name, bool value) const;
  void count(const std::string& function);

  ToyModule module_;
  CallCounts calls_;
  std::map<std::string, double> previous_speed_;
};

}  // namespace strap
