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

#include "strap/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <system_error>

#include "strap/error.hpp"

namespace strap {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

template <typename T>
T field(const nlohmann::json& j, const char* key, const std::string& what) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(what + ": missing or invalid '" + key + "'");
  }
}

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

ojson score_json(const StrategyScore& s) {
  ojson j{{"strategy", to_string(s.strategy)}};
  j["apfd"] = s.apfd ? ojson(*s.apfd) : ojson(nullptr);
  j["top_k"] = s.top_k ? ojson(*s.top_k) : ojson("none");
  j["benchmarks"] = s.benchmarks;
  if (!s.apfd) j["status"] = "no faults";
  return j;
}

ojson scores_json(const std::vector<StrategyScore>& scores) {
  ojson out = ojson::array();
  for (const auto& s : scores) out.push_back(score_json(s));
  return out;
}

ojson verdict_json(const FaultVerdict& v) {
  return {{"segment_id", v.segment_id},
          {"mismatched_frames", v.mismatched_frames},
          {"total_frames", v.total_frames},
          {"is_fault", v.is_fault}};
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path() && !fs::exists(path.parent_path()))
    throw InputError("output directory does not exist: " + path.parent_path().string());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InputError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InputError("cannot move output into place at " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json parse_json(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(source + ": " + e.what());
  }
}

nlohmann::json load_json(const fs::path& path) { return parse_json(read_file(path), path.string()); }

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

std::string vectors_to_jsonl(std::span<const FrameVector> vectors) {
  std::string out;
  for (const auto& v : vectors) {
    ojson j{{"t_ns", v.t.ns}, {"values", v.values}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<FrameVector> parse_vectors(std::istream& in) {
  std::vector<FrameVector> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), n);
    }
    try {
      FrameVector v;
      v.t = Timestamp{j.at("t_ns").get<std::int64_t>()};
      v.values = j.at("values").get<std::vector<std::uint32_t>>();
      if (!out.empty() && v.values.size() != out.front().values.size())
        throw ParseError("vector length differs from earlier lines", n);
      out.push_back(std::move(v));
    } catch (const nlohmann::json::exception&) {
      throw ParseError("expected {\"t_ns\": int, \"values\": [non-negative int, ...]}", n);
    }
  }
  if (out.empty()) throw InputError("no frame vectors in input");
  return out;
}

std::vector<FrameVector> load_vectors(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return parse_vectors(in);
  } catch (const ParseError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

bool looks_like_vectors(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    return j.is_object() && j.contains("values") && !j.contains("channel");
  }
  return false;
}

ojson to_json(const Reduction& reduction, const ReductionConfig& config) {
  ojson segments = ojson::array();
  for (const auto& s : reduction.segments)
    segments.push_back({{"id", s.id},
                        {"start_idx", s.start_idx},
                        {"end_idx", s.end_idx},
                        {"warmup_start_idx", s.warmup_start_idx},
                        {"start_t_ns", reduction.frame_times.at(s.start_idx).ns},
                        {"end_t_ns", reduction.frame_times.at(s.end_idx).ns},
                        {"vector", s.vector.values}});
  return {{"config",
           {{"window", config.window},
            {"clip", config.clip},
            {"warmup", config.warmup},
            {"frames", reduction.total_frames}}},
          {"original_segments", reduction.original.size()},
          {"reduced_frames", reduction.reduced_frames()},
          {"warmup_frames", reduction.warmup_frames()},
          {"segments", std::move(segments)}};
}

SegmentManifest manifest_from_json(const nlohmann::json& j) {
  const std::string what = "segment manifest";
  if (!j.is_object()) throw InputError(what + " must be a JSON object");
  SegmentManifest m;
  const auto& cfg = j.contains("config") ? j.at("config") : nlohmann::json::object();
  m.config.window = cfg.value("window", m.config.window);
  m.config.clip = cfg.value("clip", m.config.clip);
  m.config.warmup = cfg.value("warmup", m.config.warmup);
  m.total_frames = cfg.value("frames", std::size_t{0});
  m.original_segments = j.value("original_segments", std::size_t{0});
  std::set<int> ids;
  for (const auto& sj : field<nlohmann::json>(j, "segments", what)) {
    Segment s;
    s.id = field<int>(sj, "id", what);
    s.start_idx = field<std::size_t>(sj, "start_idx", what);
    s.end_idx = field<std::size_t>(sj, "end_idx", what);
    s.warmup_start_idx = sj.value("warmup_start_idx", s.start_idx);
    s.vector.values = field<std::vector<std::uint32_t>>(sj, "vector", what);
    s.vector.t = Timestamp{sj.value("start_t_ns", std::int64_t{0})};
    if (s.end_idx < s.start_idx || s.warmup_start_idx > s.start_idx)
      throw InputError(what + ": segment " + std::to_string(s.id) + " has inconsistent indices");
    if (!ids.insert(s.id).second)
      throw InputError(what + ": duplicate segment id " + std::to_string(s.id));
    m.segments.push_back(std::move(s));
  }
  if (m.segments.empty()) throw InputError(what + " lists no segments");
  return m;
}

SegmentManifest load_manifest(const fs::path& path) {
  try {
    return manifest_from_json(load_json(path));
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw InputError(path.string() + ": " + msg);
  }
}

ojson to_json(const PrioritizedPlan& plan, std::span<const PrioritizedPlan> repetitions) {
  ojson j{{"strategy", to_string(plan.strategy)}};
  j["seed"] = plan.rng_seed ? ojson(*plan.rng_seed) : ojson(nullptr);
  j["order"] = plan.order;
  j["scores"] = plan.scores;
  if (!repetitions.empty()) {
    ojson reps = ojson::array();
    for (const auto& r : repetitions) reps.push_back(r.order);
    j["repetitions"] = std::move(reps);
  }
  return j;
}

PrioritizedPlan plan_from_json(const nlohmann::json& j) {
  const std::string what = "plan";
  PrioritizedPlan p;
  const auto name = field<std::string>(j, "strategy", what);
  auto s = parse_strategy(name);
  if (!s) throw InputError(what + ": unknown strategy '" + name + "'");
  p.strategy = *s;
  if (j.contains("seed") && !j.at("seed").is_null()) p.rng_seed = field<std::uint64_t>(j, "seed", what);
  p.order = field<std::vector<int>>(j, "order", what);
  p.scores = j.contains("scores") ? field<std::vector<double>>(j, "scores", what)
                                  : std::vector<double>(p.order.size(), 0.0);
  if (p.scores.size() != p.order.size())
    throw InputError(what + ": 'scores' and 'order' differ in length");
  std::set<int> seen(p.order.begin(), p.order.end());
  if (seen.size() != p.order.size()) throw InputError(what + ": 'order' repeats a segment id");
  return p;
}

std::string plan_to_csv(const PrioritizedPlan& plan) {
  std::string out = "rank,segment_id,score\n";
  for (std::size_t i = 0; i < plan.order.size(); ++i) {
    ojson score = plan.scores[i];
    out += std::to_string(i + 1) + "," + std::to_string(plan.order[i]) + "," + score.dump() + "\n";
  }
  return out;
}

ojson call_counts_to_json(std::span<const Segment> segments, std::span<const std::int64_t> counts) {
  ojson j = ojson::object();
  for (std::size_t i = 0; i < segments.size(); ++i) j[std::to_string(segments[i].id)] = counts[i];
  return j;
}

std::vector<std::int64_t> call_counts_from_json(const nlohmann::json& j,
                                                std::span<const Segment> segments) {
  if (!j.is_object()) throw InputError("call counts must be an object of segment id -> count");
  std::vector<std::int64_t> out;
  for (const auto& s : segments) {
    auto it = j.find(std::to_string(s.id));
    if (it == j.end() || !it->is_number_integer())
      throw InputError("call counts: no integer count for segment " + std::to_string(s.id));
    out.push_back(it->get<std::int64_t>());
  }
  return out;
}

FaultTable fault_table_from_json(const nlohmann::json& j) {
  const std::string what = "fault table";
  FaultTable t;
  const auto faults = field<nlohmann::json>(j, "faults", what);
  if (!faults.is_object()) throw InputError(what + ": 'faults' must map segment ids to fault lists");
  for (const auto& [key, list] : faults.items()) {
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw InputError(what + ": '" + key + "' is not a segment id");
    }
    try {
      for (const auto& f : list.get<std::vector<std::string>>()) t.by_segment[id].insert(f);
    } catch (const nlohmann::json::exception&) {
      throw InputError(what + ": segment " + key + " must map to a list of fault names");
    }
  }
  if (j.contains("all")) {
    auto all = field<std::vector<std::string>>(j, "all", what);
    t.all.insert(all.begin(), all.end());
  }
  return t;
}

ojson to_json(const Mutant& m) {
  return {{"id", m.id},
          {"module", to_string(m.module)},
          {"target", m.target},
          {"operator", to_string(m.op)},
          {"delta", ojson::parse(m.delta.dump())}};
}

Mutant mutant_from_json(const nlohmann::json& j) {
  const std::string what = "mutant";
  Mutant m;
  m.id = field<std::string>(j, "id", what);
  const auto module = field<std::string>(j, "module", what + " '" + m.id + "'");
  auto k = parse_module_kind(module);
  if (!k || *k == ModuleKind::all)
    throw InputError(what + " '" + m.id + "': unknown module '" + module + "'");
  m.module = *k;
  m.target = field<std::string>(j, "target", what + " '" + m.id + "'");
  const auto op = field<std::string>(j, "operator", what + " '" + m.id + "'");
  auto o = parse_mutation_operator(op);
  if (!o) throw InputError(what + " '" + m.id + "': unknown operator '" + op + "'");
  m.op = *o;
  m.delta = j.value("delta", nlohmann::json());
  // Validates the target and delta up front.
  apply_mutant(ToyModule(m.module), m);
  return m;
}

ojson mutants_to_json(std::span<const Mutant> mutants) {
  ojson out = ojson::array();
  for (const auto& m : mutants) out.push_back(to_json(m));
  return out;
}

std::vector<Mutant> mutants_from_json(const nlohmann::json& j) {
  const nlohmann::json& list = j.is_object() && j.contains("mutants") ? j.at("mutants") : j;
  if (!list.is_array()) throw InputError("mutants file must hold a JSON list");
  std::vector<Mutant> out;
  std::set<std::string> ids;
  for (const auto& mj : list) {
    out.push_back(mutant_from_json(mj));
    if (!ids.insert(out.back().id).second)
      throw InputError("duplicate mutant id '" + out.back().id + "'");
  }
  return out;
}

std::vector<Mutant> load_mutants(const fs::path& path) {
  try {
    return mutants_from_json(load_json(path));
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw InputError(path.string() + ": " + msg);
  }
}

ojson to_json(const PlanEvaluation& e, std::size_t segments) {
  ojson j{{"segments", segments},
          {"detected_faults", e.detected_faults},
          {"undetected_faults", e.undetected_faults}};
  j["apfd"] = e.apfd ? ojson(*e.apfd) : ojson(nullptr);
  j["top_k"] = e.top_k ? ojson(*e.top_k) : ojson("none");
  if (!e.apfd) j["status"] = "no faults";
  return j;
}

ojson to_json(const MetricsReport& r) {
  ojson strategies = ojson::array();
  for (auto s : r.config.strategies) strategies.push_back(to_string(s));
  ojson j{{"config",
           {{"window", r.config.reduction.window},
            {"clip", r.config.reduction.clip},
            {"warmup", r.config.reduction.warmup},
            {"strategies", std::move(strategies)},
            {"seed", r.config.seed},
            {"repetitions", r.config.repetitions},
            {"rarity_mode", to_string(r.config.rarity_mode)}}},
          {"totals",
           {{"frames", r.total_frames},
            {"mutants", r.mutant_count},
            {"detected_by_full", r.full_detected},
            {"detected_by_reduced", r.reduced_detected}}},
          {"reduction_pct", r.reduction_pct},
          {"reduction_pct_with_warmup", r.reduction_pct_with_warmup},
          {"fault_coverage", r.fault_coverage},
          {"strategies", scores_json(r.strategies)}};

  ojson modules = ojson::array();
  for (const auto& m : r.modules) {
    const auto& red = m.reduction;
    ojson benchmarks = ojson::array();
    for (const auto& b : m.benchmarks)
      benchmarks.push_back({{"name", b.name},
                            {"mutants", b.mutants},
                            {"detected_faults", b.detected_faults},
                            {"undetected_faults", b.undetected_faults},
                            {"strategies", scores_json(b.strategies)}});
    ojson mutants = ojson::array();
    for (const auto& mr : m.mutants) {
      ojson reduced = ojson::array();
      for (const auto& v : mr.reduced_verdicts) reduced.push_back(verdict_json(v));
      ojson full = ojson::array();
      for (const auto& v : mr.full_verdicts)
        if (v.is_fault) full.push_back(verdict_json(v));
      mutants.push_back({{"id", mr.mutant.id},
                         {"operator", to_string(mr.mutant.op)},
                         {"target", mr.mutant.target},
                         {"function", mr.function},
                         {"detected_by_reduced", mr.detected_by_reduced},
                         {"detected_by_full", mr.detected_by_full},
                         {"reduced_verdicts", std::move(reduced)},
                         {"full_faulty_segments", std::move(full)}});
    }
    modules.push_back(
        {{"module", to_string(m.module)},
         {"totals",
          {{"frames", red.total_frames},
           {"original_segments", red.original.size()},
           {"reduced_segments", red.segments.size()},
           {"reduced_frames", red.reduced_frames()},
           {"warmup_frames", red.warmup_frames()},
           {"reduced_frames_with_warmup", red.reduced_frames() + red.warmup_frames()}}},
         {"reduction_pct", m.reduction_pct},
         {"reduction_pct_with_warmup", m.reduction_pct_with_warmup},
         {"fault_coverage", m.fault_coverage},
         {"closed_loop_faults", m.closed_loop_faults},
         {"strategies", scores_json(m.strategies)},
         {"benchmarks", std::move(benchmarks)},
         {"mutants", std::move(mutants)}});
  }
  j["modules"] = std::move(modules);
  return j;
}

std::string report_to_csv(const MetricsReport& r) {
  std::string out = "scope,strategy,top_k,apfd,benchmarks\n";
  auto rows = [&](const std::string& scope, const std::vector<StrategyScore>& scores) {
    for (const auto& s : scores)
      out += scope + "," + std::string(to_string(s.strategy)) + "," +
             (s.top_k ? fixed(*s.top_k) : "none") + "," + (s.apfd ? fixed(*s.apfd) : "") + "," +
             std::to_string(s.benchmarks) + "\n";
  };
  rows("overall", r.strategies);
  for (const auto& m : r.modules) rows(std::string(to_string(m.module)), m.strategies);
  return out;
}

}  // namespace strap
