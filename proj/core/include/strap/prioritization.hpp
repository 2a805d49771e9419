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
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "strap/reduction.hpp"
#include "strap/schema.hpp"

namespace strap {

enum class Strategy { rsc, sc, ch, rd, cc };

std::string_view to_string(Strategy strategy);  // "RSC", "SC", ...
std::optional<Strategy> parse_strategy(std::string_view name);  // case-insensitive

enum class RarityMode {
  indicator,  // weight counts once per nonzero dimension
  literal,    // weight multiplied by the label code
};

std::optional<RarityMode> parse_rarity_mode(std::string_view name);
std::string_view to_string(RarityMode mode);

struct RarityWeights {
  std::vector<double> weights;
  bool normalized = false;
};

/// weight[q] = N / #frames with dimension q nonzero, or 0 for a dimension
/// that is never nonzero; optionally rescaled to sum to 1.
RarityWeights rarity_weights(std::span<const FrameVector> frame_vectors, bool normalize = true);

double rarity_score(const FrameVector& segment_vector, const RarityWeights& weights,
                    RarityMode mode = RarityMode::indicator);

/// Number of nonzero dimensions.
std::size_t semantic_coverage(const FrameVector& vector);

struct PrioritizedPlan {
  Strategy strategy = Strategy::ch;
  std::vector<int> order;      // segment ids in execution order
  std::vector<double> scores;  // score of order[k]
  std::optional<std::uint64_t> rng_seed;

  friend bool operator==(const PrioritizedPlan&, const PrioritizedPlan&) = default;
};

/// Sorts by score descending; equal scores keep ascending segment id.
PrioritizedPlan order_by_score(Strategy strategy, std::span<const Segment> segments,
                               std::span<const double> scores);

PrioritizedPlan prioritize_rsc(std::span<const Segment> segments,
                               std::span<const FrameVector> frame_vectors,
                               RarityMode mode = RarityMode::indicator, bool normalize = true);
PrioritizedPlan prioritize_sc(std::span<const Segment> segments);
PrioritizedPlan prioritize_ch(std::span<const Segment> segments);
PrioritizedPlan prioritize_cc(std::span<const Segment> segments,
                              std::span<const std::int64_t> call_counts);

/// `repetitions` independent shuffles drawn from one generator seeded with
/// `seed`: Fisher-Yates over std::mt19937_64 with rejection-sampled bounds
/// (see uniform_below), so plans are bit-identical on every platform.
std::vector<PrioritizedPlan> prioritize_rd(std::span<const Segment> segments, std::uint64_t seed,
                                           int repetitions = 100);

/// Uniform integer in [0, bound) from raw 64-bit draws, rejecting the biased
/// low tail. Unlike std::uniform_int_distribution, the mapping is fixed.
std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound);
/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform_unit(std::mt19937_64& gen);

}  // namespace strap
