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
#include <numeric>
#include <random>
#include <vector>

#include "strap/error.hpp"
#include "strap/prioritization.hpp"

namespace {

using strap::FrameVector;
using strap::Segment;

FrameVector fv(std::vector<std::uint32_t> values) { return {std::move(values), {}}; }

std::vector<Segment> segments_of(const std::vector<std::vector<std::uint32_t>>& vectors) {
  std::vector<Segment> out;
  for (std::size_t i = 0; i < vectors.size(); ++i)
    out.push_back({static_cast<int>(i), i, i, fv(vectors[i]), i});
  return out;
}

bool is_permutation_of_ids(const strap::PrioritizedPlan& plan, const std::vector<Segment>& segs) {
  std::vector<int> ids, order = plan.order;
  for (const auto& s : segs) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  std::sort(order.begin(), order.end());
  return ids == order;
}

TEST(Rarity, HandComputedWeights) {
  // Dim 0 nonzero in all 4 frames, dim 1 in one, dim 2 never.
  const std::vector<FrameVector> frames{fv({1, 2, 0}), fv({1, 0, 0}), fv({1, 0, 0}), fv({1, 0, 0})};
  const auto raw = strap::rarity_weights(frames, false);
  EXPECT_DOUBLE_EQ(raw.weights[0], 1.0);
  EXPECT_DOUBLE_EQ(raw.weights[1], 4.0);
  EXPECT_EQ(raw.weights[2], 0.0);
  const auto w = strap::rarity_weights(frames);
  EXPECT_TRUE(w.normalized);
  EXPECT_DOUBLE_EQ(w.weights[0], 0.2);
  EXPECT_DOUBLE_EQ(w.weights[1], 0.8);
  EXPECT_DOUBLE_EQ(strap::rarity_score(fv({0, 5, 0}), w), 0.8);
  EXPECT_DOUBLE_EQ(strap::rarity_score(fv({0, 0, 0}), w), 0.0);
  EXPECT_DOUBLE_EQ(strap::rarity_score(fv({3, 5, 0}), w), 1.0);
  EXPECT_DOUBLE_EQ(strap::rarity_score(fv({0, 5, 0}), w, strap::RarityMode::literal), 4.0);
}

TEST(Rarity, UniformAndSingleFrame) {
  const auto w = strap::rarity_weights(std::vector<FrameVector>{fv({1, 1, 1, 1}), fv({2, 2, 2, 2})});
  for (double x : w.weights) EXPECT_DOUBLE_EQ(x, 0.25);
  const auto s = strap::rarity_weights(std::vector<FrameVector>{fv({1, 0, 3})});
  EXPECT_DOUBLE_EQ(s.weights[0], 0.5);
  EXPECT_EQ(s.weights[1], 0.0);
  EXPECT_DOUBLE_EQ(s.weights[2], 0.5);
}

TEST(Rarity, Errors) {
  EXPECT_THROW(strap::rarity_weights(std::vector<FrameVector>{}), strap::InputError);
  EXPECT_THROW(strap::rarity_weights(std::vector<FrameVector>{fv({1}), fv({1, 2})}), strap::InputError);
  const auto w = strap::rarity_weights(std::vector<FrameVector>{fv({1, 1})});
  EXPECT_THROW(strap::rarity_score(fv({1}), w), strap::InputError);
}

TEST(OrderByScore, TieBreakOnId) {
  const auto segs = segments_of({{0}, {0}, {0}});
  const auto p = strap::order_by_score(strap::Strategy::rsc, segs, std::vector<double>{0.3, 0.9, 0.3});
  EXPECT_EQ(p.order, (std::vector<int>{1, 0, 2}));
  EXPECT_EQ(p.scores, (std::vector<double>{0.9, 0.3, 0.3}));
}

TEST(Prioritize, CallCounts) {
  const auto segs = segments_of({{0}, {0}, {0}});
  EXPECT_EQ(strap::prioritize_cc(segs, std::vector<std::int64_t>{5, 9, 9}).order, (std::vector<int>{1, 2, 0}));
  EXPECT_EQ(strap::prioritize_cc(segs, std::vector<std::int64_t>{0, 0, 0}).order, (std::vector<int>{0, 1, 2}));
  EXPECT_THROW(strap::prioritize_cc(segs, std::vector<std::int64_t>{1}), strap::InputError);
}

TEST(Prioritize, SemanticCoverage) {
  const auto segs = segments_of({{1, 1, 1, 1}, {1, 0, 0, 0}, {0, 1, 1, 0}});
  const auto p = strap::prioritize_sc(segs);
  EXPECT_EQ(p.order, (std::vector<int>{0, 2, 1}));
  EXPECT_EQ(p.scores, (std::vector<double>{4, 2, 1}));
  EXPECT_EQ(strap::semantic_coverage(fv({22, 34, 39, 41})), 4u);
  EXPECT_EQ(strap::prioritize_sc(segments_of({{0, 0}, {0, 0}})).order, (std::vector<int>{0, 1}));
}

TEST(Prioritize, Chronological) {
  auto segs = segments_of({{1}, {2}, {3}});
  std::reverse(segs.begin(), segs.end());
  EXPECT_EQ(strap::prioritize_ch(segs).order, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(strap::prioritize_ch(segments_of({{1}})).order, (std::vector<int>{0}));
}

TEST(Prioritize, RscPrefersRareDimensions) {
  const std::vector<FrameVector> frames{fv({1, 0, 0}), fv({1, 0, 0}), fv({1, 1, 0}), fv({1, 0, 1}),
                                        fv({1, 0, 1})};
  const auto segs = segments_of({{1, 0, 0}, {1, 0, 1}, {1, 1, 0}});
  EXPECT_EQ(strap::prioritize_rsc(segs, frames).order, (std::vector<int>{2, 1, 0}));
  EXPECT_EQ(strap::prioritize_rsc(segments_of({{1, 0, 0}}), frames).order, (std::vector<int>{0}));
}

TEST(Prioritize, RandomIsSeededPermutation) {
  const auto segs = segments_of({{1}, {2}, {3}, {4}, {5}});
  const auto a = strap::prioritize_rd(segs, 42, 100);
  EXPECT_EQ(a, strap::prioritize_rd(segs, 42, 100));
  ASSERT_EQ(a.size(), 100u);
  for (const auto& p : a) EXPECT_TRUE(is_permutation_of_ids(p, segs));
  EXPECT_NE(a, strap::prioritize_rd(segs, 43, 100));
  EXPECT_THROW(strap::prioritize_rd(segs, 1, 0), strap::InputError);
}

TEST(Prioritize, RandomPositionsRoughlyUniform) {
  const auto segs = segments_of({{1}, {2}, {3}, {4}});
  std::vector<std::vector<int>> hits(4, std::vector<int>(4, 0));
  for (const auto& p : strap::prioritize_rd(segs, 9, 8000))
    for (std::size_t pos = 0; pos < p.order.size(); ++pos) ++hits[p.order[pos]][pos];
  for (const auto& row : hits)
    for (int h : row) EXPECT_NEAR(h, 2000, 200);
}

TEST(UniformBelow, StaysInRange) {
  std::mt19937_64 gen(1);
  for (std::uint64_t bound : {1ull, 2ull, 3ull, 7ull, 1000ull})
    for (int i = 0; i < 1000; ++i) EXPECT_LT(strap::uniform_below(gen, bound), bound);
  EXPECT_THROW(strap::uniform_below(gen, 0), strap::InputError);
}

TEST(Prioritize, PropertiesOnRandomInstances) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t q = 2 + gen() % 6;
    std::vector<FrameVector> frames;
    for (std::size_t f = 0; f < 3 + gen() % 30; ++f) {
      std::vector<std::uint32_t> v(q);
      for (auto& x : v) x = gen() % 3 == 0 ? 1 + gen() % 3 : 0;
      frames.push_back(fv(v));
    }
    std::vector<std::vector<std::uint32_t>> vs;
    for (std::size_t s = 0; s < 1 + gen() % 8; ++s) vs.push_back(frames[gen() % frames.size()].values);
    const auto segs = segments_of(vs);
    std::vector<std::int64_t> counts;
    for (std::size_t s = 0; s < segs.size(); ++s) counts.push_back(static_cast<std::int64_t>(gen() % 4));
    for (const auto& p : {strap::prioritize_rsc(segs, frames), strap::prioritize_sc(segs),
                          strap::prioritize_cc(segs, counts), strap::prioritize_ch(segs)}) {
      EXPECT_TRUE(is_permutation_of_ids(p, segs));
      EXPECT_TRUE(std::is_sorted(p.scores.rbegin(), p.scores.rend()));
    }
    EXPECT_EQ(strap::prioritize_rsc(segs, frames, strap::RarityMode::indicator, false).order,
              strap::prioritize_rsc(segs, frames).order);
    const auto w = strap::rarity_weights(frames);
    const double sum = std::accumulate(w.weights.begin(), w.weights.end(), 0.0);
    if (sum > 0) {
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
    // Dominance: adding a dimension with positive weight cannot lower the score.
    for (const auto& v : vs)
      for (std::size_t d = 0; d < q; ++d)
        if (v[d] == 0 && w.weights[d] > 0) {
          auto bigger = v;
          bigger[d] = 1;
          EXPECT_GE(strap::rarity_score(fv(bigger), w), strap::rarity_score(fv(v), w));
        }
  }
}

TEST(Strategy, Names) {
  EXPECT_EQ(strap::to_string(strap::Strategy::rsc), "RSC");
  EXPECT_EQ(strap::parse_strategy("rd"), strap::Strategy::rd);
  EXPECT_EQ(strap::parse_strategy("Cc"), strap::Strategy::cc);
  EXPECT_FALSE(strap::parse_strategy("xyz"));
  EXPECT_EQ(strap::parse_rarity_mode("literal"), strap::RarityMode::literal);
}

}  // namespace
