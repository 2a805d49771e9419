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

#include "strap/regression.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <thread>
#include <utility>

#include "strap/error.hpp"
#include "strap/synth.hpp"

namespace strap {

namespace {

constexpr ModuleKind kModules[] = {ModuleKind::traffic_light, ModuleKind::obstacle,
                                   ModuleKind::prediction, ModuleKind::planning};

struct SegmentReplay {
  std::vector<FrameVector> vectors;  // comparable frames only
  CallCounts calls;
};

SegmentReplay replay(const ToyModule& module, const AlignedRecording& aligned, const Segment& s,
                     const SchemaRegistry& registry) {
  std::span<const Frame> frames(aligned.frames.data() + s.warmup_start_idx,
                                s.end_idx - s.warmup_start_idx + 1);
  auto r = replay_segment(module, frames, s.warmup_length());
  std::span<const Message> compared(r.outputs.data() + s.warmup_length(), s.length());
  return {vectorize_messages(compared, registry), std::move(r.call_counts)};
}

std::vector<FrameVector> replay_full(const ToyModule& module, const AlignedRecording& aligned,
                                     const SchemaRegistry& registry) {
  auto r = replay_segment(module, aligned.frames, 0);
  return vectorize_messages(r.outputs, registry);
}

std::span<const FrameVector> range(const std::vector<FrameVector>& v, const Segment& s) {
  return {v.data() + s.start_idx, s.length()};
}

struct Accumulator {
  double apfd = 0.0;
  double top_k = 0.0;
  std::size_t n = 0;

  void add(const PlanEvaluation& e) {
    if (!e.apfd) return;
    apfd += *e.apfd;
    top_k += static_cast<double>(*e.top_k);
    ++n;
  }
  StrategyScore score(Strategy s) const {
    StrategyScore out{s, std::nullopt, std::nullopt, n};
    if (n > 0) {
      out.apfd = apfd / static_cast<double>(n);
      out.top_k = top_k / static_cast<double>(n);
    }
    return out;
  }
};

std::vector<StrategyScore> mean_scores(const std::vector<const BenchmarkResult*>& benchmarks,
                                       std::span<const Strategy> strategies) {
  std::vector<StrategyScore> out;
  for (auto s : strategies) {
    double apfd = 0.0;
    double top_k = 0.0;
    std::size_t n = 0;
    for (const auto* b : benchmarks)
      for (const auto& sc : b->strategies)
        if (sc.strategy == s && sc.apfd) {
          apfd += *sc.apfd;
          top_k += *sc.top_k;
          ++n;
        }
    StrategyScore score{s, std::nullopt, std::nullopt, n};
    if (n > 0) {
      score.apfd = apfd / static_cast<double>(n);
      score.top_k = top_k / static_cast<double>(n);
    }
    out.push_back(score);
  }
  return out;
}

ModuleReport run_module(const AlignedRecording& aligned, ModuleKind kind,
                        const std::vector<const Mutant*>& mutants, const RegressionConfig& config,
                        const SchemaRegistry& registry) {
  ModuleReport rep;
  rep.module = kind;
  rep.frame_vectors = encode_recording(aligned, registry, make_filter(kind, registry));
  rep.reduction = reduce_recording(aligned, rep.frame_vectors, config.reduction);
  const auto& red = rep.reduction;
  rep.reduction_pct = reduction_pct(red.total_frames, red.reduced_frames());
  rep.reduction_pct_with_warmup =
      reduction_pct(red.total_frames,
                    std::min(red.total_frames, red.reduced_frames() + red.warmup_frames()));
  rep.plans = plan_strategies(red, rep.frame_vectors, config.strategies, config.rarity_mode);
  const bool want_rd = std::find(config.strategies.begin(), config.strategies.end(),
                                 Strategy::rd) != config.strategies.end();
  if (want_rd) rep.rd_plans = prioritize_rd(red.segments, config.seed, config.repetitions);

  const ToyModule base(kind);

  // Baselines: the unmutated module over every reduced segment and the full
  // recording. Closed-loop check compares the latter with the recording.
  std::vector<SegmentReplay> baseline(red.segments.size());
  parallel_for(red.segments.size(), config.jobs, [&](std::size_t i) {
    baseline[i] = replay(base, aligned, red.segments[i], registry);
  });
  const auto full_baseline = replay_full(base, aligned, registry);
  const auto recorded =
      vectorize_messages(channel_messages(aligned.frames, base.output_kind()), registry);
  for (const auto& s : red.original)
    rep.closed_loop_faults += compare_outputs(range(recorded, s), range(full_baseline, s), s).is_fault;

  rep.mutants.resize(mutants.size());
  parallel_for(mutants.size(), config.jobs, [&](std::size_t m) {
    const Mutant& mutant = *mutants[m];
    const ToyModule mutated = apply_mutant(base, mutant);
    MutantResult r;
    r.mutant = mutant;
    r.function = base.function_of(mutant.target);
    for (std::size_t i = 0; i < red.segments.size(); ++i) {
      const auto& s = red.segments[i];
      auto v = compare_outputs(baseline[i].vectors, replay(mutated, aligned, s, registry).vectors, s);
      r.detected_by_reduced = r.detected_by_reduced || v.is_fault;
      r.reduced_verdicts.push_back(v);
    }
    const auto full = replay_full(mutated, aligned, registry);
    for (const auto& s : red.original) {
      auto v = compare_outputs(range(full_baseline, s), range(full, s), s);
      r.detected_by_full = r.detected_by_full || v.is_fault;
      r.full_verdicts.push_back(v);
    }
    rep.mutants[m] = std::move(r);
  });

  std::set<std::string> reduced_ids, full_ids;
  for (const auto& r : rep.mutants) {
    if (r.detected_by_reduced) reduced_ids.insert(r.mutant.id);
    if (r.detected_by_full) full_ids.insert(r.mutant.id);
  }
  rep.fault_coverage = fault_coverage(reduced_ids, full_ids);

  // One benchmark per changed function, in the module's function order.
  for (const auto& fn : base.functions()) {
    BenchmarkResult b;
    b.name = std::string(to_string(kind)) + "/" + fn;
    FaultsBySegment faults;
    std::set<std::string> all;
    for (const auto& r : rep.mutants) {
      if (r.function != fn) continue;
      b.mutants.push_back(r.mutant.id);
      all.insert(r.mutant.id);
      for (const auto& v : r.reduced_verdicts)
        if (v.is_fault) faults[v.segment_id].insert(r.mutant.id);
    }
    if (b.mutants.empty()) continue;
    for (const auto& sr : baseline) {
      auto it = sr.calls.find(fn);
      b.call_counts.push_back(it == sr.calls.end() ? 0 : it->second);
    }

    // The detected set does not depend on the plan.
    const auto detection = evaluate_plan(prioritize_ch(red.segments), faults, all);
    b.detected_faults = detection.detected_faults;
    b.undetected_faults = detection.undetected_faults;

    for (auto s : config.strategies) {
      Accumulator acc;
      if (s == Strategy::rd) {
        for (const auto& p : rep.rd_plans) acc.add(evaluate_plan(p, faults, all));
        // The mean over repetitions counts as one benchmark value.
        auto score = acc.score(s);
        if (score.apfd) score.benchmarks = 1;
        b.strategies.push_back(score);
      } else {
        const PrioritizedPlan plan = s == Strategy::cc
                                         ? prioritize_cc(red.segments, b.call_counts)
                                         : rep.plans.at(s);
        acc.add(evaluate_plan(plan, faults, all));
        b.strategies.push_back(acc.score(s));
      }
    }
    rep.benchmarks.push_back(std::move(b));
  }
  std::vector<const BenchmarkResult*> bs;
  for (const auto& b : rep.benchmarks) bs.push_back(&b);
  rep.strategies = mean_scores(bs, config.strategies);
  return rep;
}

}  // namespace

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::map<Strategy, PrioritizedPlan> plan_strategies(const Reduction& reduction,
                                                    std::span<const FrameVector> frame_vectors,
                                                    std::span<const Strategy> strategies,
                                                    RarityMode mode) {
  std::map<Strategy, PrioritizedPlan> plans;
  for (auto s : strategies) {
    switch (s) {
      case Strategy::rsc:
        plans[s] = prioritize_rsc(reduction.segments, frame_vectors, mode);
        break;
      case Strategy::sc: plans[s] = prioritize_sc(reduction.segments); break;
      case Strategy::ch: plans[s] = prioritize_ch(reduction.segments); break;
      case Strategy::rd:
      case Strategy::cc: break;
    }
  }
  return plans;
}

MetricsReport run_regression(const Recording& recording, ModuleKind module,
                             std::span<const Mutant> mutants, const RegressionConfig& config,
                             const SchemaRegistry& registry) {
  config.reduction.validate();
  if (config.repetitions < 1) throw InputError("repetitions must be >= 1");
  std::set<std::string> ids;
  for (const auto& m : mutants) {
    if (!ids.insert(m.id).second) throw InputError("duplicate mutant id '" + m.id + "'");
    if (m.module == ModuleKind::all) throw InputError("mutant '" + m.id + "' names module 'all'");
    if (module != ModuleKind::all && m.module != module)
      throw InputError("mutant '" + m.id + "' targets the " + std::string(to_string(m.module)) +
                       " module but the run is restricted to " + std::string(to_string(module)));
  }

  MetricsReport report;
  report.config = config;
  const AlignedRecording aligned = align_recording(recording);
  report.total_frames = aligned.size();

  std::vector<ModuleKind> kinds;
  for (auto k : kModules) {
    const bool targeted = std::any_of(mutants.begin(), mutants.end(),
                                      [&](const Mutant& m) { return m.module == k; });
    if (module == k || (module == ModuleKind::all && (targeted || mutants.empty())))
      kinds.push_back(k);
  }

  std::size_t reduced = 0, with_warmup = 0, total = 0;
  std::set<std::string> reduced_ids, full_ids;
  for (auto k : kinds) {
    std::vector<const Mutant*> mine;
    for (const auto& m : mutants)
      if (m.module == k) mine.push_back(&m);
    auto rep = run_module(aligned, k, mine, config, registry);
    reduced += rep.reduction.reduced_frames();
    with_warmup += std::min(rep.reduction.total_frames,
                            rep.reduction.reduced_frames() + rep.reduction.warmup_frames());
    total += rep.reduction.total_frames;
    for (const auto& r : rep.mutants) {
      if (r.detected_by_reduced) reduced_ids.insert(r.mutant.id);
      if (r.detected_by_full) full_ids.insert(r.mutant.id);
    }
    report.modules.push_back(std::move(rep));
  }

  report.reduction_pct = reduction_pct(total, reduced);
  report.reduction_pct_with_warmup = reduction_pct(total, with_warmup);
  report.fault_coverage = fault_coverage(reduced_ids, full_ids);
  report.mutant_count = mutants.size();
  report.full_detected = full_ids.size();
  report.reduced_detected = reduced_ids.size();
  std::vector<const BenchmarkResult*> bs;
  for (const auto& m : report.modules)
    for (const auto& b : m.benchmarks) bs.push_back(&b);
  report.strategies = mean_scores(bs, config.strategies);
  return report;
}

}  // namespace strap
