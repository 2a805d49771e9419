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

#include "strap/prioritization.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <string>

#include "strap/error.hpp"

namespace strap {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::rsc: return "RSC";
    case Strategy::sc: return "SC";
    case Strategy::ch: return "CH";
    case Strategy::rd: return "RD";
    case Strategy::cc: return "CC";
  }
  return "CH";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (auto s : {Strategy::rsc, Strategy::sc, Strategy::ch, Strategy::rd, Strategy::cc})
    if (to_string(s) == upper) return s;
  return std::nullopt;
}

std::optional<RarityMode> parse_rarity_mode(std::string_view name) {
  if (name == "indicator") return RarityMode::indicator;
  if (name == "literal") return RarityMode::literal;
  return std::nullopt;
}

std::string_view to_string(RarityMode mode) {
  return mode == RarityMode::literal ? "literal" : "indicator";
}

RarityWeights rarity_weights(std::span<const FrameVector> frame_vectors, bool normalize) {
  if (frame_vectors.empty()) throw InputError("rarity weights need at least one frame vector");
  const std::size_t q = frame_vectors.front().values.size();
  std::vector<std::size_t> nonzero(q, 0);
  for (const auto& v : frame_vectors) {
    if (v.values.size() != q) throw InputError("frame vectors differ in length");
    for (std::size_t i = 0; i < q; ++i)
      if (v.values[i] != 0) ++nonzero[i];
  }
  RarityWeights w{std::vector<double>(q, 0.0), normalize};
  const auto n = static_cast<double>(frame_vectors.size());
  for (std::size_t i = 0; i < q; ++i)
    if (nonzero[i] > 0) w.weights[i] = n / static_cast<double>(nonzero[i]);
  if (normalize) {
    const double total = std::accumulate(w.weights.begin(), w.weights.end(), 0.0);
    if (total > 0)
      for (auto& x : w.weights) x /= total;
  }
  return w;
}

double rarity_score(const FrameVector& segment_vector, const RarityWeights& weights,
                    RarityMode mode) {
  if (segment_vector.values.size() != weights.weights.size())
    throw InputError("segment vector has " + std::to_string(segment_vector.values.size()) +
                     " dimensions, weights have " + std::to_string(weights.weights.size()));
  double score = 0.0;
  for (std::size_t i = 0; i < weights.weights.size(); ++i) {
    const auto v = segment_vector.values[i];
    if (v == 0) continue;
    score += mode == RarityMode::literal ? weights.weights[i] * static_cast<double>(v)
                                         : weights.weights[i];
  }
  return score;
}

std::size_t semantic_coverage(const FrameVector& vector) {
  return static_cast<std::size_t>(
      std::count_if(vector.values.begin(), vector.values.end(), [](auto v) { return v != 0; }));
}

PrioritizedPlan order_by_score(Strategy strategy, std::span<const Segment> segments,
                               std::span<const double> scores) {
  if (scores.size() != segments.size())
    throw InputError("expected " + std::to_string(segments.size()) + " scores, got " +
                     std::to_string(scores.size()));
  std::vector<std::size_t> idx(segments.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return segments[a].id < segments[b].id;
  });
  PrioritizedPlan plan;
  plan.strategy = strategy;
  for (auto i : idx) {
    plan.order.push_back(segments[i].id);
    plan.scores.push_back(scores[i]);
  }
  return plan;
}

PrioritizedPlan prioritize_rsc(std::span<const Segment> segments,
                               std::span<const FrameVector> frame_vectors, RarityMode mode,
                               bool normalize) {
  if (segments.empty()) throw InputError("nothing to prioritize");
  // Scores are summed over raw weights and divided once by the weight total.
  // This equals summing normalized weights, and dividing every score by one
  // positive constant cannot reorder them.
  const auto raw = rarity_weights(frame_vectors, false);
  const double total = std::accumulate(raw.weights.begin(), raw.weights.end(), 0.0);
  std::vector<double> scores;
  scores.reserve(segments.size());
  for (const auto& s : segments) {
    double score = rarity_score(s.vector, raw, mode);
    if (normalize && total > 0) score /= total;
    scores.push_back(score);
  }
  return order_by_score(Strategy::rsc, segments, scores);
}

PrioritizedPlan prioritize_sc(std::span<const Segment> segments) {
  std::vector<double> scores;
  for (const auto& s : segments) scores.push_back(static_cast<double>(semantic_coverage(s.vector)));
  return order_by_score(Strategy::sc, segments, scores);
}

PrioritizedPlan prioritize_ch(std::span<const Segment> segments) {
  return order_by_score(Strategy::ch, segments, std::vector<double>(segments.size(), 0.0));
}

PrioritizedPlan prioritize_cc(std::span<const Segment> segments,
                              std::span<const std::int64_t> call_counts) {
  if (call_counts.size() != segments.size())
    throw InputError("expected " + std::to_string(segments.size()) + " call counts, got " +
                     std::to_string(call_counts.size()));
  std::vector<double> scores(call_counts.begin(), call_counts.end());
  return order_by_score(Strategy::cc, segments, scores);
}

std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound) {
  if (bound == 0) throw InputError("uniform_below: empty range");
  // Draws below (2^64 mod bound) would over-represent small residues.
  const std::uint64_t threshold = (0 - bound) % bound;
  std::uint64_t x = gen();
  while (x < threshold) x = gen();
  return x % bound;
}

double uniform_unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

std::vector<PrioritizedPlan> prioritize_rd(std::span<const Segment> segments, std::uint64_t seed,
                                           int repetitions) {
  if (repetitions < 1) throw InputError("repetitions must be >= 1");
  std::mt19937_64 gen(seed);
  std::vector<PrioritizedPlan> plans;
  plans.reserve(static_cast<std::size_t>(repetitions));
  for (int r = 0; r < repetitions; ++r) {
    PrioritizedPlan plan;
    plan.strategy = Strategy::rd;
    plan.rng_seed = seed;
    for (const auto& s : segments) plan.order.push_back(s.id);
    for (std::size_t i = plan.order.size(); i > 1; --i)
      std::swap(plan.order[i - 1], plan.order[uniform_below(gen, i)]);
    plan.scores.assign(plan.order.size(), 0.0);
    plans.push_back(std::move(plan));
  }
  return plans;
}

}  // namespace strap
