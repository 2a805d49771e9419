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

#include <random>
#include <set>
#include <string>

#include "strap/error.hpp"
#include "strap/recording.hpp"
#include "strap/schema.hpp"

namespace {

using nlohmann::json;
using strap::default_registry;
using strap::Frame;
using strap::make_message;
using strap::MessageKind;
using strap::ModuleKind;
using strap::Timestamp;

Frame frame_of(json lights, json obstacles, json tracks, json plan) {
  Frame f;
  f.t = Timestamp{0};
  f.messages["traffic_light"] =
      make_message("traffic_light", f.t, MessageKind::traffic_light, {{"lights", lights}});
  f.messages["obstacle"] = make_message("obstacle", f.t, MessageKind::obstacle, obstacles);
  f.messages["prediction"] =
      make_message("prediction", f.t, MessageKind::prediction, {{"tracks", tracks}});
  f.messages["planning"] = make_message("planning", f.t, MessageKind::planning, plan);
  return f;
}

std::size_t idx(const strap::SchemaRegistry& reg, const char* name) {
  auto i = reg.index_of(name);
  EXPECT_TRUE(i.has_value()) << name;
  return *i;
}

TEST(Schema, DefaultRegistryShape) {
  const auto reg = default_registry();
  EXPECT_EQ(reg.dimension(idx(reg, "traffic_light.color")).codes.size(), 4u);
  for (const auto& d : reg.dimensions())
    for (const auto& [value, code] : d.codes) EXPECT_NE(code, 0u) << d.name << "=" << value;
  const auto tl = idx(reg, "traffic_light");
  EXPECT_EQ(idx(reg, "traffic_light.color"), tl + 1);
  EXPECT_EQ(idx(reg, "traffic_light.shape"), tl + 2);
  EXPECT_EQ(idx(reg, "traffic_light.orientation"), tl + 3);
  for (const char* k : {"stop_sign", "intersection", "crosswalk"})
    EXPECT_TRUE(reg.always_keep().count(k));
}

TEST(Schema, RegistryIsStable) {
  EXPECT_EQ(strap::to_json(default_registry()).dump(), strap::to_json(default_registry()).dump());
}

TEST(Schema, BundledSchemaFileMatchesDefault) {
  EXPECT_EQ(strap::load_registry(std::string(STRAP_DATA_DIR) + "/schema.json"), default_registry());
}

TEST(Schema, JsonRoundTrip) {
  const auto reg = default_registry();
  EXPECT_EQ(strap::registry_from_json(strap::to_json(reg)), reg);
}

TEST(Schema, InvalidRegistriesRejected) {
  using strap::DimensionKind;
  using strap::DimensionSpec;
  const std::set<std::string> keep{"stop_sign", "intersection", "crosswalk"};
  auto base = [] {
    std::vector<DimensionSpec> d;
    for (const char* n : {"stop_sign", "intersection", "crosswalk"})
      d.push_back({n, DimensionKind::presence, std::nullopt, MessageKind::obstacle, {{"present", 1}}});
    return d;
  };
  auto zero = base();
  zero[0].codes["present"] = 0;
  EXPECT_THROW(strap::SchemaRegistry(zero, keep), strap::InputError);
  auto dup = base();
  dup.push_back(dup[0]);
  EXPECT_THROW(strap::SchemaRegistry(dup, keep), strap::InputError);
  auto orphan = base();
  orphan.push_back({"x.color", DimensionKind::property, "x", MessageKind::obstacle, {{"red", 2}}});
  EXPECT_THROW(strap::SchemaRegistry(orphan, keep), strap::InputError);
  EXPECT_THROW(strap::SchemaRegistry(base(), {"stop_sign"}), strap::InputError);
}

TEST(Encode, RedRoundVerticalLight) {
  const auto reg = default_registry();
  const auto v = strap::encode_frame(
      frame_of(json::array({{{"color", "red"}, {"shape", "round"}, {"orientation", "vertical"}}}),
               {{"obstacles", json::array()}}, json::array(), json::object()),
      reg);
  const auto tl = idx(reg, "traffic_light");
  for (std::size_t i = 0; i < reg.size(); ++i) {
    if (i < tl || i > tl + 3) {
      EXPECT_EQ(v.values[i], 0u) << reg.dimension(i).name;
    }
  }
  EXPECT_EQ(v.values[tl], reg.code(tl, "present"));
  EXPECT_EQ(v.values[tl + 1], reg.code(tl + 1, "red"));
  EXPECT_EQ(v.values[tl + 2], reg.code(tl + 2, "round"));
  EXPECT_EQ(v.values[tl + 3], reg.code(tl + 3, "vertical"));
}

TEST(Encode, EmptyPayloadsGiveZeroVector) {
  const auto reg = default_registry();
  const auto v = strap::encode_frame(
      frame_of(json::array(), {{"obstacles", json::array()}}, json::array(), json::object()), reg);
  EXPECT_EQ(v.values, std::vector<std::uint32_t>(reg.size(), 0));
  Frame no_channels;
  EXPECT_EQ(strap::encode_frame(no_channels, reg).values, v.values);
}

TEST(Encode, FirstObjectPropertiesWin) {
  const auto reg = default_registry();
  const json obstacles = {{"obstacles", json::array({{{"actor", "pedestrian"}, {"action", "cross"}},
                                                     {{"actor", "pedestrian"}, {"action", "stop"}}})}};
  const json tracks = json::array({{{"actor", "pedestrian"}, {"action", "cross"}},
                                   {{"actor", "pedestrian"}, {"action", "stop"}}});
  const auto v = strap::encode_frame(frame_of(json::array(), obstacles, tracks, json::object()), reg);
  EXPECT_NE(v.values[idx(reg, "pedestrian")], 0u);
  const auto action = idx(reg, "actor.action");
  EXPECT_EQ(v.values[action], reg.code(action, "cross"));
}

TEST(Encode, UnknownValueNamesDimension) {
  const auto reg = default_registry();
  try {
    strap::encode_frame(frame_of(json::array({{{"color", "purple"}}}), {{"obstacles", json::array()}},
                                 json::array(), json::object()),
                        reg);
    FAIL();
  } catch (const strap::InputError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("traffic_light.color"), std::string::npos);
    EXPECT_NE(what.find("purple"), std::string::npos);
  }
}

TEST(Encode, StaticObjectsAndPlanning) {
  const auto reg = default_registry();
  const auto v = strap::encode_frame(
      frame_of(json::array(),
               {{"obstacles", json::array()}, {"objects", json::array({"stop_sign", "crosswalk"})}},
               json::array(), {{"ego_action", "stop"}, {"stop_cause", "stop_sign"}}),
      reg);
  EXPECT_NE(v.values[idx(reg, "stop_sign")], 0u);
  EXPECT_NE(v.values[idx(reg, "crosswalk")], 0u);
  EXPECT_EQ(v.values[idx(reg, "intersection")], 0u);
  const auto cause = idx(reg, "ego.stop_cause");
  EXPECT_EQ(v.values[cause], reg.code(cause, "stop_sign"));
  EXPECT_TRUE(strap::conforms(v, reg));
}

TEST(Filter, TrafficLightKeepsAlwaysKeep) {
  const auto reg = default_registry();
  const auto v = strap::encode_frame(
      frame_of(json::array({{{"color", "green"}}}),
               {{"obstacles", json::array({{{"actor", "vehicle"}, {"subtype", "car"}}})},
                {"objects", json::array({"stop_sign", "intersection", "crosswalk"})}},
               json::array(), json::object()),
      reg);
  const auto f = strap::apply_filter(v, strap::make_filter(ModuleKind::traffic_light, reg), reg);
  EXPECT_EQ(f.values[idx(reg, "vehicle")], 0u);
  EXPECT_EQ(f.values[idx(reg, "vehicle.subtype")], 0u);
  EXPECT_NE(f.values[idx(reg, "traffic_light.color")], 0u);
  for (const char* k : {"stop_sign", "intersection", "crosswalk"}) EXPECT_NE(f.values[idx(reg, k)], 0u);
  EXPECT_EQ(f.values.size(), v.values.size());
  EXPECT_EQ(strap::apply_filter(v, strap::make_filter(ModuleKind::all, reg), reg), v);
}

TEST(Filter, PropertiesRandomVectors) {
  const auto reg = default_registry();
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 300; ++trial) {
    strap::FrameVector v;
    for (std::size_t i = 0; i < reg.size(); ++i) {
      const auto& codes = reg.dimension(i).codes;
      std::vector<std::uint32_t> options{0};
      for (const auto& [name, code] : codes) options.push_back(code);
      v.values.push_back(options[gen() % options.size()]);
    }
    strap::zero_orphans(v, reg);
    ASSERT_TRUE(strap::conforms(v, reg));
    for (auto m : {ModuleKind::traffic_light, ModuleKind::obstacle, ModuleKind::prediction,
                   ModuleKind::planning, ModuleKind::all}) {
      const auto flt = strap::make_filter(m, reg);
      const auto once = strap::apply_filter(v, flt, reg);
      EXPECT_EQ(strap::apply_filter(once, flt, reg), once);
      EXPECT_TRUE(strap::conforms(once, reg));
    }
  }
  strap::FrameVector zero{std::vector<std::uint32_t>(reg.size(), 0), {}};
  EXPECT_EQ(strap::apply_filter(zero, strap::make_filter(ModuleKind::planning, reg), reg), zero);
}

TEST(Encode, RecordingLengthAndChangePoint) {
  const auto reg = default_registry();
  strap::AlignedRecording ar;
  for (int k = 0; k < 6; ++k) {
    auto f = frame_of(json::array({{{"color", k < 4 ? "red" : "green"}}}),
                      {{"obstacles", json::array()}}, json::array(), json::object());
    f.t = Timestamp{k * 10};
    ar.frames.push_back(f);
  }
  const auto vs = strap::encode_recording(ar, reg, strap::make_filter(ModuleKind::all, reg));
  ASSERT_EQ(vs.size(), 6u);
  for (int k = 0; k < 6; ++k) EXPECT_EQ(vs[k].t.ns, k * 10);
  EXPECT_EQ(vs[0], strap::FrameVector({vs[3].values, Timestamp{0}}));
  EXPECT_NE(vs[3].values, vs[4].values);
  const auto color = idx(reg, "traffic_light.color");
  for (std::size_t d = 0; d < reg.size(); ++d)
    if (d != color) {
      EXPECT_EQ(vs[3].values[d], vs[4].values[d]);
    }
}

}  // namespace
