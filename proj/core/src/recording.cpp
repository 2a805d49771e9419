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

#include "strap/recording.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <tuple>
#include <utility>

#include "strap/error.hpp"

namespace strap {

namespace {

constexpr std::array<std::pair<MessageKind, std::string_view>, 6> kKindNames{{
    {MessageKind::traffic_light, "traffic_light"},
    {MessageKind::obstacle, "obstacle"},
    {MessageKind::prediction, "prediction"},
    {MessageKind::planning, "planning"},
    {MessageKind::localization, "localization"},
    {MessageKind::image_ref, "image_ref"},
}};

Message parse_line(const std::string& line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
  if (!j.is_object()) throw ParseError("expected a JSON object", line_no);

  auto field = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'", line_no);
    return *it;
  };

  const auto& channel = field("channel");
  if (!channel.is_string() || channel.get_ref<const std::string&>().empty())
    throw ParseError("'channel' must be a non-empty string", line_no);
  const auto& t = field("t_ns");
  if (!t.is_number_integer()) throw ParseError("'t_ns' must be an integer", line_no);
  if (t.get<std::int64_t>() < 0) throw ParseError("negative timestamp", line_no);
  const auto& kind_name = field("kind");
  if (!kind_name.is_string()) throw ParseError("'kind' must be a string", line_no);
  auto kind = parse_message_kind(kind_name.get_ref<const std::string&>());
  if (!kind)
    throw ParseError("unknown message kind '" + kind_name.get<std::string>() + "'", line_no);
  const auto& payload = field("payload");
  if (!payload.is_object()) throw ParseError("'payload' must be an object", line_no);

  Message m = make_message(channel.get<std::string>(), Timestamp{t.get<std::int64_t>()}, *kind,
                           payload);
  if (auto it = j.find("origin_t_ns"); it != j.end()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0)
      throw ParseError("'origin_t_ns' must be a non-negative integer", line_no);
    m.origin = Timestamp{it->get<std::int64_t>()};
  }
  return m;
}

}  // namespace

std::string_view to_string(MessageKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<MessageKind> parse_message_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  return std::nullopt;
}

Message make_message(std::string channel, Timestamp t, MessageKind kind, nlohmann::json payload) {
  return Message{std::move(channel), t, t, kind, std::move(payload)};
}

Timestamp Recording::epoch() const {
  std::optional<Timestamp> first;
  for (const auto& [name, ch] : channels)
    if (!ch.messages.empty() && (!first || ch.messages.front().t < *first))
      first = ch.messages.front().t;
  return first.value_or(Timestamp{});
}

std::size_t Recording::message_count() const {
  std::size_t n = 0;
  for (const auto& [name, ch] : channels) n += ch.messages.size();
  return n;
}

const Message* Frame::find(MessageKind kind) const {
  for (const auto& [name, m] : messages)
    if (m.kind == kind) return &m;
  return nullptr;
}

Recording make_recording(std::vector<Message> messages, Warnings* warnings) {
  if (messages.empty()) throw InputError("empty recording");
  Recording rec;
  for (auto& m : messages) {
    if (m.t.ns < 0) throw InputError("negative timestamp on channel '" + m.channel + "'");
    auto [it, inserted] = rec.channels.try_emplace(m.channel);
    Channel& ch = it->second;
    if (inserted) {
      ch.name = m.channel;
      ch.kind = m.kind;
    } else if (ch.kind != m.kind) {
      throw InputError("channel '" + m.channel + "' mixes kinds '" + std::string(to_string(ch.kind)) +
                       "' and '" + std::string(to_string(m.kind)) + "'");
    }
    ch.messages.push_back(std::move(m));
  }

  for (auto& [name, ch] : rec.channels) {
    auto by_time = [](const Message& a, const Message& b) { return a.t < b.t; };
    if (!std::is_sorted(ch.messages.begin(), ch.messages.end(), by_time)) {
      std::stable_sort(ch.messages.begin(), ch.messages.end(), by_time);
      if (warnings) warnings->push_back("channel '" + name + "' was not time-ordered; re-sorted");
    }
    auto same_time = [](const Message& a, const Message& b) { return a.t == b.t; };
    auto last = std::unique(ch.messages.begin(), ch.messages.end(), same_time);
    if (last != ch.messages.end()) {
      if (warnings)
        warnings->push_back("channel '" + name + "' has " +
                            std::to_string(std::distance(last, ch.messages.end())) +
                            " duplicate timestamp(s); kept the first of each");
      ch.messages.erase(last, ch.messages.end());
    }
  }
  return rec;
}

Recording parse_recording(std::istream& in, Warnings* warnings) {
  std::vector<Message> messages;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    messages.push_back(parse_line(line, line_no));
  }
  return make_recording(std::move(messages), warnings);
}

Recording load_recording(const std::filesystem::path& path, Warnings* warnings) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open recording '" + path.string() + "'");
  return parse_recording(in, warnings);
}

void write_recording(std::ostream& out, const Recording& recording) {
  std::vector<const Message*> all;
  all.reserve(recording.message_count());
  for (const auto& [name, ch] : recording.channels)
    for (const auto& m : ch.messages) all.push_back(&m);
  // Channels are visited in name order, so a stable sort on time alone keeps
  // (t, channel, position-in-channel) ordering.
  std::stable_sort(all.begin(), all.end(),
                   [](const Message* a, const Message* b) { return a->t < b->t; });
  for (const Message* m : all) {
    nlohmann::ordered_json j;
    j["channel"] = m->channel;
    j["t_ns"] = m->t.ns;
    j["kind"] = to_string(m->kind);
    if (m->origin != m->t) j["origin_t_ns"] = m->origin.ns;
    j["payload"] = m->payload;
    out << j.dump() << '\n';
  }
}

const Channel& reference_channel(const Recording& recording) {
  if (recording.channels.empty()) throw InputError("recording has no channels");
  const Channel* best = nullptr;
  // std::map iterates names in ascending order; strict '>' keeps the smallest on ties.
  for (const auto& [name, ch] : recording.channels)
    if (!best || ch.messages.size() > best->messages.size()) best = &ch;
  return *best;
}

AlignedRecording align_recording(const Recording& recording) {
  for (const auto& [name, ch] : recording.channels)
    if (ch.messages.empty()) throw InputError("channel '" + name + "' has no messages");
  const Channel& ref = reference_channel(recording);

  // Distinct reference timestamps; a repeated timestamp keeps its first message.
  std::vector<const Message*> ref_msgs;
  for (const auto& m : ref.messages)
    if (ref_msgs.empty() || ref_msgs.back()->t != m.t) ref_msgs.push_back(&m);
  std::vector<Timestamp> ref_ts;
  ref_ts.reserve(ref_msgs.size());
  for (const auto* m : ref_msgs) ref_ts.push_back(m->t);
  const std::size_t n = ref_ts.size();

  // Per channel, the message assigned to each reference slot (after retiming
  // and copying), plus the first slot from which the channel is populated.
  std::map<std::string, std::vector<const Message*>> slots;
  std::size_t first_complete = 0;
  for (const auto& [name, ch] : recording.channels) {
    std::vector<const Message*> fresh(n, nullptr);
    const Message* before_start = nullptr;
    if (&ch == &ref) {
      fresh.assign(ref_msgs.begin(), ref_msgs.end());
    } else {
      for (const auto& m : ch.messages) {
        // Past the last reference time there is no closing bound for an interval.
        if (m.t > ref_ts.back()) continue;
        auto it = std::upper_bound(ref_ts.begin(), ref_ts.end(), m.t);
        if (it == ref_ts.begin()) {
          before_start = &m;  // latest message preceding the first reference time
        } else {
          fresh[static_cast<std::size_t>(std::distance(ref_ts.begin(), it)) - 1] = &m;
        }
      }
    }
    std::vector<const Message*> filled(n, nullptr);
    const Message* held = before_start;
    std::size_t first = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (fresh[i]) held = fresh[i];
      filled[i] = held;
      if (held && first == n) first = i;
    }
    first_complete = std::max(first_complete, first);
    slots.emplace(name, std::move(filled));
  }

  AlignedRecording out;
  for (const auto& [name, ch] : recording.channels) out.channel_names.push_back(name);
  if (first_complete >= n) throw InputError("no alignable frames");
  out.frames.reserve(n - first_complete);
  for (std::size_t i = first_complete; i < n; ++i) {
    Frame f;
    f.t = ref_ts[i];
    for (const auto& [name, filled] : slots) {
      Message m = *filled[i];
      m.t = ref_ts[i];
      f.messages.emplace(name, std::move(m));
    }
    out.frames.push_back(std::move(f));
  }
  return out;
}

AlignedRecording slice(const AlignedRecording& aligned, std::size_t start_idx,
                       std::size_t end_idx) {
  if (start_idx > end_idx || end_idx >= aligned.size())
    throw InputError("slice [" + std::to_string(start_idx) + ", " + std::to_string(end_idx) +
                     "] out of range for " + std::to_string(aligned.size()) + " frames");
  AlignedRecording out;
  out.channel_names = aligned.channel_names;
  out.frames.assign(aligned.frames.begin() + static_cast<std::ptrdiff_t>(start_idx),
                    aligned.frames.begin() + static_cast<std::ptrdiff_t>(end_idx) + 1);
  return out;
}

Recording to_recording(const AlignedRecording& aligned) {
  Recording rec;
  for (const auto& name : aligned.channel_names) {
    Channel ch;
    ch.name = name;
    for (const auto& f : aligned.frames) {
      const Message& m = f.messages.at(name);
      ch.kind = m.kind;
      ch.messages.push_back(m);
    }
    rec.channels.emplace(name, std::move(ch));
  }
  return rec;
}

}  // namespace strap
