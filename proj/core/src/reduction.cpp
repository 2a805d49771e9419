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

#include "strap/reduction.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "strap/error.hpp"

namespace strap {

void ReductionConfig::validate() const {
  if (window < 1 || window % 2 == 0)
    throw InputError("window size must be a positive odd integer, got " + std::to_string(window));
  if (clip < 1) throw InputError("clip length must be >= 1, got " + std::to_string(clip));
  if (warmup < 0) throw InputError("warm-up must be >= 0, got " + std::to_string(warmup));
}

std::vector<FrameVector> smooth(std::span<const FrameVector> vectors, int window) {
  if (window < 1 || window % 2 == 0)
    throw InputError("window size must be a positive odd integer, got " + std::to_string(window));
  if (vectors.empty()) throw InputError("cannot smooth an empty vector stream");

  const std::size_t n = vectors.size();
  const std::size_t width = std::min<std::size_t>(static_cast<std::size_t>(window), n);
  const std::size_t half = static_cast<std::size_t>(window) / 2;

  std::vector<FrameVector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = std::min(i >= half ? i - half : 0, n - width);
    const auto win = vectors.subspan(lo, width);

    // Boyer-Moore vote, then confirm the candidate holds a strict majority.
    std::size_t candidate = 0;
    std::size_t votes = 0;
    for (std::size_t k = 0; k < width; ++k) {
      if (votes == 0) {
        candidate = k;
        votes = 1;
      } else if (same_scene(win[k], win[candidate])) {
        ++votes;
      } else {
        --votes;
      }
    }
    const auto count = static_cast<std::size_t>(std::count_if(
        win.begin(), win.end(), [&](const FrameVector& v) { return same_scene(v, win[candidate]); }));

    FrameVector v = vectors[i];
    if (2 * count > width) v.values = win[candidate].values;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Segment> segment(std::span<const FrameVector> smoothed) {
  if (smoothed.empty()) throw InputError("cannot segment an empty vector stream");
  std::vector<Segment> out;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= smoothed.size(); ++i) {
    if (i == smoothed.size() || !same_scene(smoothed[i], smoothed[i - 1])) {
      Segment s;
      s.id = static_cast<int>(out.size());
      s.start_idx = start;
      s.end_idx = i - 1;
      s.vector = smoothed[start];
      s.warmup_start_idx = start;
      out.push_back(std::move(s));
      start = i;
    }
  }
  return out;
}

std::vector<Segment> clip(std::vector<Segment> segments, int n) {
  if (n < 1) throw InputError("clip length must be >= 1, got " + std::to_string(n));
  for (auto& s : segments)
    if (s.length() > static_cast<std::size_t>(n)) s.end_idx = s.start_idx + static_cast<std::size_t>(n) - 1;
  return segments;
}

std::vector<Segment> dedup(std::vector<Segment> segments) {
  std::set<std::vector<std::uint32_t>> seen;
  std::vector<Segment> out;
  for (auto& s : segments)
    if (seen.insert(s.vector.values).second) out.push_back(std::move(s));
  return out;
}

void attach_warmup(std::vector<Segment>& segments, int warmup) {
  const auto w = static_cast<std::size_t>(std::max(warmup, 0));
  for (auto& s : segments) s.warmup_start_idx = s.start_idx >= w ? s.start_idx - w : 0;
}

std::size_t Reduction::reduced_frames() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.length();
  return n;
}

std::size_t Reduction::warmup_frames() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.warmup_length();
  return n;
}

Reduction reduce_vectors(std::span<const FrameVector> vectors, const ReductionConfig& config) {
  config.validate();
  if (vectors.empty()) throw InputError("cannot reduce an empty recording");
  const auto smoothed = smooth(vectors, config.window);

  Reduction r;
  r.total_frames = vectors.size();
  r.frame_times.reserve(vectors.size());
  for (const auto& v : vectors) r.frame_times.push_back(v.t);
  r.original = segment(smoothed);
  attach_warmup(r.original, config.warmup);
  r.segments = dedup(clip(r.original, config.clip));
  r.vectors.reserve(r.segments.size());
  for (const auto& s : r.segments) r.vectors.push_back(s.vector);
  return r;
}

Reduction reduce_recording(const AlignedRecording& aligned, std::span<const FrameVector> vectors,
                           const ReductionConfig& config) {
  if (vectors.size() != aligned.size())
    throw InputError("expected " + std::to_string(aligned.size()) + " frame vectors, got " +
                     std::to_string(vectors.size()));
  return reduce_vectors(vectors, config);
}

}  // namespace strap
