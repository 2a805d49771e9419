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

#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "strap/artifacts.hpp"
#include "strap/error.hpp"
#include "strap/evaluation.hpp"
#include "strap/prioritization.hpp"
#include "strap/recording.hpp"
#include "strap/reduction.hpp"
#include "strap/regression.hpp"
#include "strap/schema.hpp"
#include "strap/synth.hpp"
#include "strap/toy_modules.hpp"

namespace strap::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct Options {
  std::string in;
  std::string out;
  std::string schema;
  std::string module = "all";
  ReductionConfig reduction;
  std::vector<std::string> strategies;
  std::optional<std::uint64_t> seed;
  int repetitions = 100;
  std::string rarity_mode = "indicator";
  int jobs = 1;

  std::string vectors;
  std::string call_counts;
  std::string plan;
  std::string faults;
  std::string script;
  std::string mutants;
  std::string artifacts;
  int count = 10;
};

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("STRAP_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw InputError(std::string("STRAP_SEED is not an unsigned integer: '") + env + "'");
  }
  return 0;
}

ModuleKind resolve_module(const Options& o) {
  auto k = parse_module_kind(o.module);
  if (!k) throw InputError("unknown module '" + o.module + "'");
  return *k;
}

RarityMode resolve_rarity(const Options& o) {
  auto m = parse_rarity_mode(o.rarity_mode);
  if (!m) throw InputError("unknown rarity mode '" + o.rarity_mode + "'");
  return *m;
}

std::vector<Strategy> resolve_strategies(const Options& o, std::vector<Strategy> fallback) {
  if (o.strategies.empty()) return fallback;
  std::vector<Strategy> out;
  for (const auto& name : o.strategies) {
    auto s = parse_strategy(name);
    if (!s) throw InputError("unknown strategy '" + name + "'");
    if (std::find(out.begin(), out.end(), *s) == out.end()) out.push_back(*s);
  }
  return out;
}

SchemaRegistry resolve_schema(const Options& o) {
  return o.schema.empty() ? default_registry() : load_registry(o.schema);
}

Recording read_recording(const std::string& path, std::ostream& err) {
  Warnings warnings;
  auto rec = load_recording(path, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  return rec;
}

std::string recording_text(const Recording& rec) {
  std::ostringstream ss;
  write_recording(ss, rec);
  return ss.str();
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create directory " + dir.string());
}

fs::path sibling_csv(const fs::path& json_path) {
  fs::path p = json_path;
  return p.replace_extension(".csv");
}

void write_plan(const fs::path& json_path, const PrioritizedPlan& plan,
                std::span<const PrioritizedPlan> repetitions) {
  write_file_atomic(json_path, dump(to_json(plan, repetitions)));
  write_file_atomic(sibling_csv(json_path), plan_to_csv(plan));
}

std::string plan_file(Strategy s) { return "plan_" + std::string(to_string(s)) + ".json"; }

std::string summary(const Reduction& r) {
  std::ostringstream ss;
  ss << "segments: " << r.original.size() << " original, " << r.segments.size()
     << " reduced; frames: " << r.total_frames << " -> " << r.reduced_frames()
     << " (+" << r.warmup_frames() << " warm-up); reduction "
     << reduction_pct(r.total_frames, r.reduced_frames());
  return ss.str();
}

int cmd_align(const Options& o, std::ostream& out, std::ostream& err) {
  const auto aligned = align_recording(read_recording(o.in, err));
  write_file_atomic(o.out, recording_text(to_recording(aligned)));
  out << "aligned " << aligned.size() << " frames over " << aligned.channel_names.size()
      << " channels\n";
  return kExitOk;
}

int cmd_vectorize(const Options& o, std::ostream& out, std::ostream& err) {
  const auto registry = resolve_schema(o);
  const auto aligned = align_recording(read_recording(o.in, err));
  const auto vectors =
      encode_recording(aligned, registry, make_filter(resolve_module(o), registry));
  write_file_atomic(o.out, vectors_to_jsonl(vectors));
  out << "vectorized " << vectors.size() << " frames into " << registry.size() << " dimensions\n";
  return kExitOk;
}

int cmd_reduce(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<FrameVector> vectors;
  if (looks_like_vectors(o.in)) {
    vectors = load_vectors(o.in);
  } else {
    const auto registry = resolve_schema(o);
    const auto aligned = align_recording(read_recording(o.in, err));
    vectors = encode_recording(aligned, registry, make_filter(resolve_module(o), registry));
  }
  const auto r = reduce_vectors(vectors, o.reduction);
  write_file_atomic(o.out, dump(to_json(r, o.reduction)));
  out << summary(r) << "\n";
  return kExitOk;
}

int cmd_prioritize(const Options& o, std::ostream& out, std::ostream&) {
  const auto manifest = load_manifest(o.in);
  const auto strategies = resolve_strategies(o, {Strategy::rsc});
  const auto seed = resolve_seed(o);
  const bool to_dir = strategies.size() > 1 || fs::is_directory(o.out);
  if (to_dir) ensure_directory(o.out);

  for (auto s : strategies) {
    PrioritizedPlan plan;
    std::vector<PrioritizedPlan> reps;
    switch (s) {
      case Strategy::rsc: {
        if (o.vectors.empty()) throw InputError("RSC needs --vectors (frame vectors JSONL)");
        const auto vectors = load_vectors(o.vectors);
        plan = prioritize_rsc(manifest.segments, vectors, resolve_rarity(o));
        break;
      }
      case Strategy::sc: plan = prioritize_sc(manifest.segments); break;
      case Strategy::ch: plan = prioritize_ch(manifest.segments); break;
      case Strategy::cc: {
        if (o.call_counts.empty()) throw InputError("CC needs --call-counts");
        const auto counts = call_counts_from_json(load_json(o.call_counts), manifest.segments);
        plan = prioritize_cc(manifest.segments, counts);
        break;
      }
      case Strategy::rd:
        reps = prioritize_rd(manifest.segments, seed, o.repetitions);
        plan = reps.front();
        break;
    }
    const fs::path path = to_dir ? fs::path(o.out) / plan_file(s) : fs::path(o.out);
    write_plan(path, plan, reps);
    out << to_string(s) << ": " << plan.order.size() << " segments -> " << path.string() << "\n";
  }
  return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream&) {
  const auto plan_json = load_json(o.plan);
  std::vector<PrioritizedPlan> plans{plan_from_json(plan_json)};
  if (plan_json.contains("repetitions")) {
    plans.clear();
    for (const auto& order : plan_json.at("repetitions")) {
      PrioritizedPlan p = plan_from_json(plan_json);
      p.order = order.get<std::vector<int>>();
      p.scores.assign(p.order.size(), 0.0);
      plans.push_back(std::move(p));
    }
  }
  if (!o.in.empty()) {
    const auto manifest = load_manifest(o.in);
    std::vector<int> ids;
    for (const auto& s : manifest.segments) ids.push_back(s.id);
    std::sort(ids.begin(), ids.end());
    for (const auto& p : plans) {
      auto sorted = p.order;
      std::sort(sorted.begin(), sorted.end());
      if (sorted != ids) throw InputError("plan is not a permutation of the manifest's segment ids");
    }
  }
  const auto table = fault_table_from_json(load_json(o.faults));

  ojson evaluations = ojson::array();
  double apfd_sum = 0.0;
  double topk_sum = 0.0;
  std::size_t scored = 0;
  for (const auto& p : plans) {
    const auto e = evaluate_plan(p, table.by_segment, table.all);
    evaluations.push_back(to_json(e, p.order.size()));
    if (e.apfd) {
      apfd_sum += *e.apfd;
      topk_sum += static_cast<double>(*e.top_k);
      ++scored;
    }
  }
  ojson result{{"strategy", to_string(plans.front().strategy)}, {"plans", plans.size()}};
  result["apfd"] = scored ? ojson(apfd_sum / static_cast<double>(scored)) : ojson(nullptr);
  result["top_k"] = scored ? ojson(topk_sum / static_cast<double>(scored)) : ojson("none");
  if (!scored) result["status"] = "no faults";
  result["evaluations"] = std::move(evaluations);
  if (!o.out.empty()) write_file_atomic(o.out, dump(result));

  if (scored)
    out << to_string(plans.front().strategy) << ": APFD " << apfd_sum / static_cast<double>(scored)
        << ", Top-K " << topk_sum / static_cast<double>(scored) << "\n";
  else
    out << to_string(plans.front().strategy) << ": no faults detected\n";
  return kExitOk;
}

int cmd_synth_generate(const Options& o, std::ostream& out, std::ostream&) {
  const auto script = load_script(o.script);
  const auto rec = generate_recording(script, resolve_seed(o));
  write_file_atomic(o.out, recording_text(rec));
  out << "generated " << rec.message_count() << " messages on " << rec.channels.size()
      << " channels\n";
  return kExitOk;
}

int cmd_synth_mutate(const Options& o, std::ostream& out, std::ostream&) {
  const auto module = resolve_module(o);
  if (module == ModuleKind::all) throw InputError("synth-mutate needs a single --module");
  const auto mutants = generate_mutants(module, o.count, resolve_seed(o));
  write_file_atomic(o.out, dump(mutants_to_json(mutants)));
  out << "wrote " << mutants.size() << " mutants\n";
  return kExitOk;
}

void write_artifacts(const fs::path& dir, const Recording* generated, const Recording& rec,
                     const MetricsReport& report) {
  ensure_directory(dir);
  if (generated) write_file_atomic(dir / "recording.jsonl", recording_text(*generated));
  write_file_atomic(dir / "aligned.jsonl", recording_text(to_recording(align_recording(rec))));
  for (const auto& m : report.modules) {
    const fs::path md = dir / std::string(to_string(m.module));
    ensure_directory(md);
    write_file_atomic(md / "vectors.jsonl", vectors_to_jsonl(m.frame_vectors));
    write_file_atomic(md / "segments.json", dump(to_json(m.reduction, report.config.reduction)));
    for (const auto& [s, plan] : m.plans) write_plan(md / plan_file(s), plan, {});
    if (!m.rd_plans.empty()) write_plan(md / plan_file(Strategy::rd), m.rd_plans.front(), m.rd_plans);
    for (const auto& b : m.benchmarks) {
      const std::string fn = b.name.substr(b.name.find('/') + 1);
      write_file_atomic(md / ("call_counts_" + fn + ".json"),
                        dump(call_counts_to_json(m.reduction.segments, b.call_counts)));
    }
  }
}

int cmd_run_regression(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.script.empty() == o.in.empty())
    throw InputError("run-regression needs exactly one of --script or --in");
  const auto seed = resolve_seed(o);
  std::optional<Recording> generated;
  if (!o.script.empty()) generated = generate_recording(load_script(o.script), seed);
  const Recording rec = generated ? *generated : read_recording(o.in, err);
  const auto mutants = o.mutants.empty() ? std::vector<Mutant>{} : load_mutants(o.mutants);

  RegressionConfig cfg;
  cfg.reduction = o.reduction;
  cfg.strategies = resolve_strategies(o, cfg.strategies);
  cfg.seed = seed;
  cfg.repetitions = o.repetitions;
  cfg.rarity_mode = resolve_rarity(o);
  cfg.jobs = o.jobs;
  const auto report = run_regression(rec, resolve_module(o), mutants, cfg, resolve_schema(o));

  write_file_atomic(o.out, dump(to_json(report)));
  write_file_atomic(sibling_csv(o.out), report_to_csv(report));
  if (!o.artifacts.empty())
    write_artifacts(o.artifacts, generated ? &*generated : nullptr, rec, report);

  out << "frames " << report.total_frames << ", reduction " << report.reduction_pct
      << ", mutants " << report.mutant_count << " (full " << report.full_detected << ", reduced "
      << report.reduced_detected << "), coverage " << report.fault_coverage << "\n";
  for (const auto& s : report.strategies) {
    out << "  " << to_string(s.strategy) << ": ";
    if (s.apfd)
      out << "APFD " << *s.apfd << ", Top-K " << *s.top_k << "\n";
    else
      out << "no faults\n";
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scenario-based reduction and prioritization of driving recordings", "strap"};
  app.require_subcommand(1);
  Options o;

  auto in = [&](CLI::App* c, bool required, const std::string& help) {
    auto* opt = c->add_option("--in", o.in, help);
    if (required) opt->required();
  };
  auto output = [&](CLI::App* c, bool required, const std::string& help) {
    auto* opt = c->add_option("--out", o.out, help);
    if (required) opt->required();
  };
  auto schema = [&](CLI::App* c) {
    c->add_option("--schema", o.schema, "Schema JSON (default: built-in layout)");
    c->add_option("--module", o.module, "traffic_light|obstacle|prediction|planning|all");
  };
  auto reduction = [&](CLI::App* c) {
    c->add_option("--window", o.reduction.window, "Smoothing window, odd")->capture_default_str();
    c->add_option("--clip", o.reduction.clip, "Frames kept per segment")->capture_default_str();
    c->add_option("--warmup", o.reduction.warmup, "Warm-up frames per segment")
        ->capture_default_str();
  };
  auto strategy = [&](CLI::App* c) {
    c->add_option("--strategies", o.strategies, "Comma-separated: rsc,sc,ch,rd,cc")->delimiter(',');
    c->add_option("--seed", o.seed, "Seed (fallback: STRAP_SEED, then 0)");
    c->add_option("--repetitions", o.repetitions, "RD shuffles")->capture_default_str();
    c->add_option("--rarity-mode", o.rarity_mode, "indicator|literal")->capture_default_str();
  };

  auto* align = app.add_subcommand("align", "Align channels onto the reference channel");
  in(align, true, "Recording JSONL");
  output(align, true, "Aligned recording JSONL");

  auto* vectorize = app.add_subcommand("vectorize", "Encode aligned frames as label vectors");
  in(vectorize, true, "Recording JSONL");
  output(vectorize, true, "Frame vectors JSONL");
  schema(vectorize);

  auto* reduce = app.add_subcommand("reduce", "Smooth, segment, clip and deduplicate");
  in(reduce, true, "Recording JSONL or frame vectors JSONL");
  output(reduce, true, "segments.json");
  schema(reduce);
  reduction(reduce);

  auto* prioritize = app.add_subcommand("prioritize", "Order reduced segments");
  in(prioritize, true, "segments.json");
  output(prioritize, true, "plan.json, or a directory for several strategies");
  strategy(prioritize);
  prioritize->add_option("--vectors", o.vectors, "Frame vectors JSONL (RSC)");
  prioritize->add_option("--call-counts", o.call_counts, "Per-segment call counts JSON (CC)");

  auto* evaluate = app.add_subcommand("evaluate", "Score a plan against known faults");
  evaluate->add_option("--plan", o.plan, "plan.json")->required();
  evaluate->add_option("--faults", o.faults, "Fault table JSON")->required();
  in(evaluate, false, "segments.json to check the plan against");
  output(evaluate, false, "Evaluation JSON");

  auto* generate = app.add_subcommand("synth-generate", "Render a scenario script");
  generate->add_option("--script", o.script, "Scenario script JSON")->required();
  generate->add_option("--seed", o.seed, "Seed (fallback: STRAP_SEED, then 0)");
  output(generate, true, "Recording JSONL");

  auto* mutate = app.add_subcommand("synth-mutate", "Draw random mutants of a toy module");
  mutate->add_option("--module", o.module, "traffic_light|obstacle|prediction|planning")
      ->required();
  mutate->add_option("--count", o.count, "Number of mutants")->capture_default_str();
  mutate->add_option("--seed", o.seed, "Seed (fallback: STRAP_SEED, then 0)");
  output(mutate, true, "Mutants JSON");

  auto* regression = app.add_subcommand("run-regression", "Run the full evaluation pipeline");
  regression->add_option("--script", o.script, "Scenario script JSON");
  in(regression, false, "Recording JSONL");
  regression->add_option("--mutants", o.mutants, "Mutants JSON");
  output(regression, true, "report.json (report.csv is written alongside)");
  regression->add_option("--artifacts", o.artifacts, "Directory for intermediate artifacts");
  regression->add_option("--jobs", o.jobs, "Parallel mutant replays")->capture_default_str();
  schema(regression);
  reduction(regression);
  strategy(regression);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (o.jobs < 1) throw InputError("--jobs must be >= 1");
    if (o.repetitions < 1) throw InputError("--repetitions must be >= 1");
    if (o.count < 0) throw InputError("--count must be >= 0");
    o.reduction.validate();
    if (*align) return cmd_align(o, out, err);
    if (*vectorize) return cmd_vectorize(o, out, err);
    if (*reduce) return cmd_reduce(o, out, err);
    if (*prioritize) return cmd_prioritize(o, out, err);
    if (*evaluate) return cmd_evaluate(o, out, err);
    if (*generate) return cmd_synth_generate(o, out, err);
    if (*mutate) return cmd_synth_mutate(o, out, err);
    if (*regression) return cmd_run_regression(o, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace strap::cli
