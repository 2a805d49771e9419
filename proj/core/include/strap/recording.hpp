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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace strap {

/// Integer nanoseconds since the recording epoch.
struct Timestamp {
  std::int64_t ns = 0;

  friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

enum class MessageKind { traffic_light, obstacle, prediction, planning, localization, image_ref };

std::string_view to_string(MessageKind kind);
std::optional<MessageKind> parse_message_kind(std::string_view name);

struct Message {
  std::string channel;
  Timestamp t;
  /// Creation time before alignment. Alignment retimes `t` but keeps this,
  /// so a held copy can be told apart from a freshly published message.
  Timestamp origin;
  MessageKind kind = MessageKind::localization;
  nlohmann::json payload = nlohmann::json::object();

  friend bool operator==(const Message&, const Message&) = default;
};

Message make_message(std::string channel, Timestamp t, MessageKind kind, nlohmann::json payload);

struct Channel {
  std::string name;
  MessageKind kind = MessageKind::localization;
  std::vector<Message> messages;  // timestamps non-decreasing

  friend bool operator==(const Channel&, const Channel&) = default;
};

struct Recording {
  std::map<std::string, Channel> channels;

  /// Timestamp of the earliest message over all channels.
  Timestamp epoch() const;
  std::size_t message_count() const;

  friend bool operator==(const Recording&, const Recording&) = default;
};

/// One cross-channel slice: exactly one message per channel, all stamped `t`.
struct Frame {
  Timestamp t;
  std::map<std::string, Message> messages;

  /// First message of the given kind, if any channel of that kind is present.
  const Message* find(MessageKind kind) const;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct AlignedRecording {
  std::vector<Frame> frames;
  std::vector<std::string> channel_names;  // sorted

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }

  friend bool operator==(const AlignedRecording&, const AlignedRecording&) = default;
};

using Warnings = std::vector<std::string>;

/// Groups messages into channels and stable-sorts each channel by time.
/// Later messages that repeat a timestamp already present in their channel
/// are dropped; both re-sorting and dropping are reported through `warnings`.
Recording make_recording(std::vector<Message> messages, Warnings* warnings = nullptr);

/// Reads the JSONL wire format, one message per line.
Recording parse_recording(std::istream& in, Warnings* warnings = nullptr);
Recording load_recording(const std::filesystem::path& path, Warnings* warnings = nullptr);

/// Writes every message ordered by (t, channel); byte-stable for equal input.
void write_recording(std::ostream& out, const Recording& recording);

/// Channel with the most messages; ties go to the lexicographically smallest name.
const Channel& reference_channel(const Recording& recording);

/// Aligns every channel onto the reference channel's timestamps.
///
/// A target message created in [t_i, t_{i+1}) is retimed to t_i; when several
/// land in one interval the latest wins. A reference timestamp left without a
/// target message receives a copy of that channel's previous message. Leading
/// reference timestamps for which some channel has no message yet (and so
/// nothing to copy) are dropped.
AlignedRecording align_recording(const Recording& recording);

/// Frames [start_idx, end_idx], both inclusive.
AlignedRecording slice(const AlignedRecording& aligned, std::size_t start_idx, std::size_t end_idx);

/// Flattens aligned frames back into per-channel message lists.
Recording to_recording(const AlignedRecording& aligned);

}  // namespace strap
