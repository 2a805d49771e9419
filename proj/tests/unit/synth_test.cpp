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

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "strap/error.hpp"
#include "strap/recording.hpp"
#include "strap/schema.hpp"
#include "strap/synth.hpp"
#include "strap/toy_modules.hpp"

namespace {

using nlohmann::json;
using strap::ModuleKind;
using strap::MessageKind;

strap::ScenarioScript script(int frames, double glitch, json events) {
  return strap::script_from_json(
      {{"duration_frames", frames}, {"fps", 15}, {"glitch_rate", glitch}, {"events", events}});
}

strap::ScenarioScript red_light_script(int frames = 120, double glitch = 0.0) {
  return script(frames, glitch,
                json::array({{{"frame", 0},
                              {"set", {{"traffic_light.color", "red"}, {"traffic_light.distance", 30}}}}}));
}

std::string serialize(const strap::Recording& r) {
  std::ostringstream out;
  strap::write_recording(out, r);
  return out.str();
}

std::size_t count_of(const strap::Recording& r, const char* channel) {
  return r.channels.at(channel).messages.size();
}

ModuleKind kModules[] = {ModuleKind::traffic_light, ModuleKind::obstacle, ModuleKind::prediction,
                         ModuleKind::planning};

TEST(Script, Validation) {
  EXPECT_THROW(script(0, 0.0, json::array()), strap::InputError);
  EXPECT_THROW(script(10, 1.0, json::array()), strap::InputError);
  EXPECT_THROW(script(10, 0.0, json::array({{{"frame", 10}, {"set", json::object()}}})), strap::InputError);
  EXPECT_THROW(script(10, 0.0, json::array({{{"frame", 0}, {"set", {{"wings", "present"}}}}})),
               strap::InputError);
  EXPECT_THROW(script(10, 0.0, json::array({{{"frame", 0}, {"set", {{"traffic_light.color", "blue"}}}}})),
               strap::InputError);
  EXPECT_THROW(script(10, 0.0, json::array({{{"frame", 5}, {"set", json::object()}},
                                            {{"frame", 2}, {"set", json::object()}}})),
               strap::InputError);
  const auto s = red_light_script();
  EXPECT_EQ(strap::script_from_json(strap::to_json(s)), s);
}

TEST(Generate, DeterministicPerSeed) {
  const auto s = red_light_script(200, 0.05);
  EXPECT_EQ(serialize(strap::generate_recording(s, 3)), serialize(strap::generate_recording(s, 3)));
  EXPECT_NE(serialize(strap::generate_recording(s, 3)), serialize(strap::generate_recording(s, 4)));
}

TEST(Generate, ChannelRates) {
  const auto r = strap::generate_recording(red_light_script(300), 1);
  EXPECT_EQ(count_of(r, "camera"), 300u);
  EXPECT_EQ(count_of(r, "localization"), 300u);
  EXPECT_EQ(count_of(r, "traffic_light"), 300u);
  EXPECT_EQ(count_of(r, "planning"), 300u);
  // Prediction publishes at round(1.5 j): 2 messages per 3 frames.
  EXPECT_EQ(count_of(r, "prediction"), 200u);
  const auto ar = strap::align_recording(r);
  EXPECT_EQ(ar.size(), 300u);
}

TEST(Generate, PredictionSchedule) {
  std::vector<std::int64_t> hit;
  for (std::int64_t k = 0; k < 12; ++k)
    if (strap::prediction_publishes(k)) hit.push_back(k);
  // round-half-up of 1.5 j for j = 0..7
  std::vector<std::int64_t> expected;
  for (int j = 0; j < 8; ++j) expected.push_back(static_cast<std::int64_t>(std::floor(1.5 * j + 0.5)));
  EXPECT_EQ(hit, expected);
}

TEST(Generate, GlitchCountIsBinomial) {
  // Traffic-light outputs depend only on the camera, so every difference from
  // the glitch-free run is a glitch on that channel.
  const auto clean = strap::generate_recording(red_light_script(3000, 0.0), 5);
  const auto noisy = strap::generate_recording(red_light_script(3000, 0.01), 5);
  const auto& a = clean.channels.at("traffic_light").messages;
  const auto& b = noisy.channels.at("traffic_light").messages;
  ASSERT_EQ(a.size(), b.size());
  int glitches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) glitches += a[i].payload != b[i].payload;
  const double sigma = std::sqrt(3000 * 0.01 * 0.99);
  EXPECT_NEAR(glitches, 30.0, 3 * sigma);
  EXPECT_GT(glitches, 0);
}

TEST(Replay, WarmupFlags) {
  const auto ar = strap::align_recording(strap::generate_recording(red_light_script(60), 1));
  const auto r = strap::replay_segment(strap::ToyModule(ModuleKind::traffic_light), ar.frames, 15);
  EXPECT_EQ(r.outputs.size(), 60u);
  EXPECT_EQ(std::count(r.comparable.begin(), r.comparable.end(), true), 45);
  EXPECT_FALSE(r.comparable[14]);
  EXPECT_TRUE(r.comparable[15]);
  EXPECT_THROW(strap::replay_segment(strap::ToyModule(ModuleKind::traffic_light), ar.frames, 61),
               strap::InputError);
}

TEST(Replay, ClosedLoopMatchesRecording) {
  const auto s = strap::load_script(std::string(STRAP_DATA_DIR) + "/scripts/harness.json");
  const auto ar = strap::align_recording(strap::generate_recording(s, 7));
  for (auto m : kModules) {
    const strap::ToyModule module(m);
    const auto r = strap::replay_segment(module, ar.frames, 0);
    const auto recorded = strap::channel_messages(ar.frames, module.output_kind());
    ASSERT_EQ(r.outputs.size(), recorded.size());
    for (std::size_t i = 0; i < recorded.size(); ++i)
      ASSERT_EQ(r.outputs[i].payload, recorded[i].payload) << strap::to_string(m) << " frame " << i;
  }
}

TEST(Replay, CallCountsGrowWithFrames) {
  const auto ar = strap::align_recording(strap::generate_recording(red_light_script(90), 1));
  for (auto m : kModules) {
    std::int64_t prev = -1;
    for (std::size_t len = 1; len <= 90; len += 7) {
      const auto r = strap::replay_segment(strap::ToyModule(m),
                                           std::span(ar.frames).first(len), 0);
      std::int64_t total = 0;
      for (const auto& [fn, n] : r.call_counts) total += n;
      EXPECT_GE(total, prev);
      prev = total;
    }
  }
}

TEST(Mutants, SingleChangeAndLocality) {
  for (auto m : kModules) {
    const strap::ToyModule base(m);
    const auto mutants = strap::generate_mutants(m, 25, 9);
    EXPECT_EQ(mutants, strap::generate_mutants(m, 25, 9));
    for (const auto& mu : mutants) {
      EXPECT_EQ(mu.module, m);
      const auto mutated = strap::apply_mutant(base, mu);
      EXPECT_EQ(mutated.kind(), m);
      EXPECT_LE(strap::param_distance(base.params(), mutated.params()), 1u);
      EXPECT_EQ(base, strap::ToyModule(m));
      EXPECT_NO_THROW(base.function_of(mu.target));
      for (auto other : kModules)
        if (other != m) {
          EXPECT_THROW(strap::apply_mutant(strap::ToyModule(other), mu), strap::InputError);
        }
    }
  }
}

TEST(Mutants, UnknownTargetRejected) {
  strap::Mutant mu{"x", ModuleKind::planning, "no_such_thing", strap::MutationOperator::flip_condition, nullptr};
  EXPECT_THROW(strap::apply_mutant(strap::ToyModule(ModuleKind::planning), mu), strap::InputError);
  mu = {"y", ModuleKind::planning, "stopped_tally", strap::MutationOperator::replace_arith, "%"};
  EXPECT_THROW(strap::apply_mutant(strap::ToyModule(ModuleKind::planning), mu), strap::InputError);
}

TEST(Mutants, NoOpLeavesOutputsUnchanged) {
  const auto ar = strap::align_recording(strap::generate_recording(red_light_script(60), 2));
  const strap::ToyModule base(ModuleKind::traffic_light);
  const strap::Mutant noop{"noop", ModuleKind::traffic_light, "green_hue_min",
                           strap::MutationOperator::change_constant, 0.0};
  const auto mutated = strap::apply_mutant(base, noop);
  EXPECT_EQ(strap::param_distance(base.params(), mutated.params()), 0u);
  EXPECT_EQ(strap::replay_segment(mutated, ar.frames, 15).outputs,
            strap::replay_segment(base, ar.frames, 15).outputs);
}

TEST(Mutants, LoweredGreenThresholdReadsRedAsGreen) {
  const auto ar = strap::align_recording(strap::generate_recording(red_light_script(60), 2));
  const strap::Mutant hue{"hue", ModuleKind::traffic_light, "green_hue_min",
                          strap::MutationOperator::change_constant, -0.24};
  const auto base = strap::replay_segment(strap::ToyModule(ModuleKind::traffic_light), ar.frames, 0);
  const auto bad = strap::replay_segment(
      strap::apply_mutant(strap::ToyModule(ModuleKind::traffic_light), hue), ar.frames, 0);
  for (std::size_t i = 0; i < ar.size(); ++i) {
    EXPECT_EQ(base.outputs[i].payload["lights"][0]["color"], "red");
    EXPECT_EQ(bad.outputs[i].payload["lights"][0]["color"], "green");
  }
}

TEST(Mutants, FlippedStopRuleAtStopSign) {
  const auto s = script(60, 0.0,
                        json::array({{{"frame", 0}, {"set", {{"stop_sign", "present"}}}},
                                     {{"frame", 30}, {"unset", {"stop_sign"}}}}));
  const auto ar = strap::align_recording(strap::generate_recording(s, 2));
  const strap::Mutant flip{"flip", ModuleKind::planning, "sign_stop",
                           strap::MutationOperator::flip_condition, nullptr};
  const auto base = strap::replay_segment(strap::ToyModule(ModuleKind::planning), ar.frames, 0);
  const auto bad = strap::replay_segment(
      strap::apply_mutant(strap::ToyModule(ModuleKind::planning), flip), ar.frames, 0);
  // Allow a couple of frames for the obstacle channel to catch up at the change.
  for (std::size_t i = 2; i < 28; ++i) {
    EXPECT_EQ(base.outputs[i].payload["ego_action"], "stop") << i;
    EXPECT_EQ(bad.outputs[i].payload["ego_action"], "cruise") << i;
  }
  for (std::size_t i = 33; i < ar.size(); ++i) {
    EXPECT_EQ(base.outputs[i].payload["ego_action"], "cruise") << i;
    EXPECT_EQ(bad.outputs[i].payload["ego_action"], "stop") << i;
  }
}

TEST(Vectorize, MessagesEncodeAlone) {
  const auto ar = strap::align_recording(strap::generate_recording(red_light_script(10), 2));
  const auto reg = strap::default_registry();
  const auto msgs = strap::channel_messages(ar.frames, MessageKind::traffic_light);
  const auto vs = strap::vectorize_messages(msgs, reg);
  ASSERT_EQ(vs.size(), 10u);
  const auto color = *reg.index_of("traffic_light.color");
  EXPECT_EQ(vs[0].values[color], reg.code(color, "red"));
  EXPECT_EQ(vs[0].values[*reg.index_of("ego")], 0u);
}

}  // namespace
