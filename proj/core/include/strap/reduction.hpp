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
#include <span>
#include <vector>

#include "strap/recording.hpp"
#include "strap/schema.hpp"

namespace strap {

struct ReductionConfig {
  int window = 5;   // sliding-window size, odd
  int clip = 45;    // frames kept per segment (3 s at 15 fps)
  int warmup = 15;  // frames replayed before a segment (1 s at 15 fps)

  /// Throws InputError on an even/non-positive window, clip < 1 or warmup < 0.
  void validate() const;

  friend bool operator==(const ReductionConfig&, const ReductionConfig&) = default;
};

/// A contiguous run of frames sharing one smoothed vector.
struct Segment {
  int id = 0;  // chronological index before dedup
  std::size_t start_idx = 0;
  std::size_t end_idx = 0;  // inclusive
  FrameVector vector;
  std::size_t warmup_start_idx = 0;

  std::size_t length() const { return end_idx - start_idx + 1; }
  std::size_t warmup_length() const { return start_idx - warmup_start_idx; }

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Replaces each vector by the strict majority of the window centred on it.
///
/// Windows are shifted, not truncated, at the edges, so every window holds
/// min(window, N) vectors. Without a strict majority the original vector is
/// kept. Only codes are compared; timestamps of the input are preserved.
std::vector<FrameVector> smooth(std::span<const FrameVector> vectors, int window);

/// Maximal runs of equal consecutive vectors, in order. warmup_start_idx is
/// left equal to start_idx.
std::vector<Segment> segment(std::span<const FrameVector> smoothed);

/// Truncates every segment to its first `n` frames.
std::vector<Segment> clip(std::vector<Segment> segments, int n);

/// Keeps the first segment of each distinct vector, preserving order.
std::vector<Segment> dedup(std::vector<Segment> segments);

/// Sets warmup_start_idx = max(0, start_idx - warmup).
void attach_warmup(std::vector<Segment>& segments, int warmup);

struct Reduction {
  std::size_t total_frames = 0;
  std::vector<Timestamp> frame_times;  // one per input frame
  /// Segmentation output before clipping, with warm-up attached. This is the
  /// "original" suite that reduced segments are measured against.
  std::vector<Segment> original;
  std::vector<Segment> segments;
  std::vector<FrameVector> vectors;  // segment vectors, parallel to `segments`

  std::size_t reduced_frames() const;
  std::size_t warmup_frames() const;
};

/// smooth -> segment -> clip -> dedup over the frame vectors of a recording.
Reduction reduce_vectors(std::span<const FrameVector> vectors, const ReductionConfig& config);
/// As reduce_vectors, after checking there is one vector per aligned frame.
Reduction reduce_recording(const AlignedRecording& aligned, std::span<const FrameVector> vectors,
                           const ReductionConfig& config);

}  // namespace strap
