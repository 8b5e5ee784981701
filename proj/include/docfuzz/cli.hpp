// Copyright 2026 The docfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <CLI11.hpp>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "docfuzz/campaign.hpp"
#include "docfuzz/constraints.hpp"
#include "docfuzz/doc_parser.hpp"
#include "docfuzz/enrichment.hpp"
#include "docfuzz/error.hpp"
#include "docfuzz/llm_http.hpp"
#include "docfuzz/log.hpp"
#include "docfuzz/report.hpp"
#include "docfuzz/schema.hpp"

namespace docfuzz::cli {

enum ExitCode : int {
  kExitClean = 0,
  kExitBugs = 1,
  kExitUsage = 2,
  kExitInternal = 3,
  kExitCancelled = 130,
};

// Stage artifact paths, strategy settings and campaign settings. Loaded from
// an optional JSON config file; command-line flags override it.
struct PipelineConfig {
  std::string docs_path;
  std::string sigs_path;
  std::string corpus_path;
  std::string std_path;
  std::string constraints_path;
  std::string report_dir;
  std::string backend = "corpus";
  std::string llm_endpoint;
  std::string llm_model;
  std::string llm_prompt_template;
  std::uint64_t llm_timeout_ms = 60000;
  CampaignConfig campaign;
  std::string log_level = "warn";
};

// ---- Config file ----------------------------------------------------------------

namespace detail {

using docfuzz::detail::ObjectReader;

inline std::vector<std::string> Strings(const Json& j, const std::string& pointer) {
  return StringListFromJson(j, pointer);
}

inline std::pair<std::int64_t, std::int64_t> IntPair(const Json& j, const std::string& pointer) {
  if (!j.is_array() || j.size() != 2) throw SchemaError(pointer, "expected [lo, hi]");
  return {ObjectReader::AsInt(j[0], docfuzz::detail::ChildPointer(pointer, 0)),
          ObjectReader::AsInt(j[1], docfuzz::detail::ChildPointer(pointer, 1))};
}

inline std::size_t NonNegative(std::int64_t v, const std::string& pointer) {
  if (v < 0) throw SchemaError(pointer, "must be non-negative");
  return static_cast<std::size_t>(v);
}

inline void ApplyGenSection(const Json& j, GenConfig& gen) {
  ObjectReader r(j, "/generation");
  if (r.Optional("budget_per_api")) gen.budget_per_api = r.UInt("budget_per_api");
  if (r.Optional("rng_seed")) gen.rng_seed = r.UInt("rng_seed");
  if (const Json* v = r.Optional("dim_range")) {
    auto [lo, hi] = IntPair(*v, r.Path("dim_range"));
    gen.dim_min = NonNegative(lo, r.Path("dim_range"));
    gen.dim_max = NonNegative(hi, r.Path("dim_range"));
  }
  if (const Json* v = r.Optional("extreme_dims")) {
    gen.extreme_dims.clear();
    for (std::size_t i = 0; i < docfuzz::detail::RequireArray(*v, r.Path("extreme_dims")).size();
         ++i) {
      std::string p = docfuzz::detail::ChildPointer(r.Path("extreme_dims"), i);
      gen.extreme_dims.push_back(NonNegative(ObjectReader::AsInt((*v)[i], p), p));
    }
  }
  if (const Json* v = r.Optional("adversarial_ratio")) {
    gen.adversarial_ratio = docfuzz::detail::RequireNumber(*v, r.Path("adversarial_ratio"));
  }
  if (const Json* v = r.Optional("noise_sigma_int")) {
    gen.noise_sigma_int = docfuzz::detail::RequireNumber(*v, r.Path("noise_sigma_int"));
  }
  if (const Json* v = r.Optional("noise_sigma_rel")) {
    gen.noise_sigma_rel = docfuzz::detail::RequireNumber(*v, r.Path("noise_sigma_rel"));
  }
  if (const Json* v = r.Optional("mask_value_range")) {
    std::tie(gen.mask_lo, gen.mask_hi) = IntPair(*v, r.Path("mask_value_range"));
  }
  if (const Json* v = r.Optional("divisors")) {
    gen.divisors.clear();
    for (std::size_t i = 0; i < docfuzz::detail::RequireArray(*v, r.Path("divisors")).size(); ++i) {
      gen.divisors.push_back(
          ObjectReader::AsInt((*v)[i], docfuzz::detail::ChildPointer(r.Path("divisors"), i)));
    }
  }
  if (const Json* v = r.Optional("disable")) {
    for (const auto& name : Strings(*v, r.Path("disable"))) {
      if (!gen.flags.Disable(name)) throw ConfigError("unknown strategy '" + name + "'");
    }
  }
  r.RejectUnknown();
}

inline void ApplyCampaignSection(const Json& j, CampaignConfig& c) {
  ObjectReader r(j, "/campaign");
  if (r.Optional("target")) c.target = r.String("target");
  if (const Json* v = r.Optional("worker")) c.worker_command = Strings(*v, r.Path("worker"));
  if (r.Optional("timeout_ms")) c.timeout_ms = r.UInt("timeout_ms");
  if (r.Optional("parallel_workers")) c.parallel_workers = r.UInt("parallel_workers");
  if (r.Optional("rss_limit_bytes")) c.rss_limit_bytes = r.UInt("rss_limit_bytes");
  if (const Json* v = r.Optional("allowlist")) c.oracle.allowlist = Strings(*v, r.Path("allowlist"));
  if (const Json* v = r.Optional("internal_markers")) {
    c.oracle.internal_markers = Strings(*v, r.Path("internal_markers"));
  }
  r.RejectUnknown();
}

}  // namespace detail

// Reads a JSON config of the form
//   {"paths": {...}, "enrichment": {...}, "generation": {...},
//    "campaign": {...}, "log_level": "info"}
// into `cfg`. Unknown keys are errors.
inline void ApplyConfigFile(const std::string& path, PipelineConfig& cfg) {
  try {
    Json j = docfuzz::detail::ParseJson(docfuzz::detail::ReadTextFile(path));
    docfuzz::detail::ObjectReader r(j, "");
    if (const Json* p = r.Optional("paths")) {
      docfuzz::detail::ObjectReader pr(*p, "/paths");
      auto set = [&](std::string_view key, std::string& dst) {
        if (pr.Optional(key)) dst = pr.String(key);
      };
      set("docs", cfg.docs_path);
      set("sigs", cfg.sigs_path);
      set("corpus", cfg.corpus_path);
      set("std", cfg.std_path);
      set("constraints", cfg.constraints_path);
      set("report", cfg.report_dir);
      pr.RejectUnknown();
    }
    if (const Json* e = r.Optional("enrichment")) {
      docfuzz::detail::ObjectReader er(*e, "/enrichment");
      if (er.Optional("backend")) cfg.backend = er.String("backend");
      if (er.Optional("endpoint")) cfg.llm_endpoint = er.String("endpoint");
      if (er.Optional("model")) cfg.llm_model = er.String("model");
      if (er.Optional("prompt_template")) cfg.llm_prompt_template = er.String("prompt_template");
      if (er.Optional("timeout_ms")) cfg.llm_timeout_ms = er.UInt("timeout_ms");
      er.RejectUnknown();
    }
    if (const Json* g = r.Optional("generation")) detail::ApplyGenSection(*g, cfg.campaign.gen);
    if (const Json* c = r.Optional("campaign")) detail::ApplyCampaignSection(*c, cfg.campaign);
    if (r.Optional("log_level")) cfg.log_level = r.String("log_level");
    r.RejectUnknown();
  } catch (const SchemaError& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

// DOCFUZZ_WORKER (whitespace separated), else the mock worker installed next
// to the running executable.
inline std::vector<std::string> DefaultWorkerCommand() {
  if (const char* env = std::getenv("DOCFUZZ_WORKER"); env && *env) {
    std::vector<std::string> argv;
    std::istringstream in(env);
    for (std::string tok; in >> tok;) argv.push_back(tok);
    return argv;
  }
  std::error_code ec;
  auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (ec) return {};
  auto sibling = self.parent_path() / "docfuzz-mock-worker";
  if (!std::filesystem::exists(sibling, ec)) return {};
  return {sibling.string()};
}

// ---- Stages -------------------------------------------------------------------------

struct ParseStats {
  std::size_t apis = 0;
  std::size_t well_documented = 0;
  std::size_t poorly_documented = 0;
  std::size_t undocumented = 0;
};

inline ParseStats RunParseStage(const std::string& in, const std::string& out) {
  Json j = docfuzz::detail::ParseJson(docfuzz::detail::ReadTextFile(in));
  std::vector<RawApiDoc> docs = RawDocsFromJson(j);
  Json parsed = Json::array();
  ParseStats stats;
  for (const auto& d : docs) {
    ParsedDoc p = ParseDoc(d);
    ++stats.apis;
    switch (p.doc_class) {
      case DocClass::kWellDocumented: ++stats.well_documented; break;
      case DocClass::kPoorlyDocumented: ++stats.poorly_documented; break;
      case DocClass::kUndocumented: ++stats.undocumented; break;
    }
    parsed.push_back(ToJson(p));
  }
  docfuzz::detail::WriteTextFile(out, parsed.dump(2) + "\n");
  return stats;
}

inline std::vector<ParsedDoc> LoadParsedDocs(const std::string& path) {
  Json j = docfuzz::detail::ParseJson(docfuzz::detail::ReadTextFile(path));
  docfuzz::detail::RequireArray(j, "");
  std::vector<ParsedDoc> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(ParsedDocFromJson(j[i], docfuzz::detail::ChildPointer("", i)));
  }
  return out;
}

inline EnrichmentSummary RunEnrichStage(const PipelineConfig& cfg) {
  std::vector<ParsedDoc> docs = LoadParsedDocs(cfg.sigs_path);
  std::vector<StandardizedApiInfo> extra;
  if (!cfg.corpus_path.empty()) {
    extra = InfosFromJsonText(docfuzz::detail::ReadTextFile(cfg.corpus_path));
  }
  EnrichmentBackend backend = CorpusInference{};
  std::unique_ptr<LlmClient> client;
  if (cfg.backend == "llm") {
    if (cfg.llm_endpoint.empty()) throw ConfigError("the llm backend needs an endpoint");
    backend = ExternalLlm{cfg.llm_endpoint, cfg.llm_model, cfg.llm_prompt_template};
    client = std::make_unique<HttpLlmClient>(cfg.llm_endpoint, cfg.llm_model,
                                             std::chrono::milliseconds(cfg.llm_timeout_ms));
  } else if (cfg.backend != "corpus") {
    throw ConfigError("backend must be corpus or llm");
  }
  EnrichmentSummary summary;
  auto infos = StandardizeAll(docs, backend, client.get(), &summary, 2, extra);
  docfuzz::detail::WriteTextFile(cfg.std_path, InfosToJsonText(infos));
  return summary;
}

inline Json RunExtractStage(const std::string& std_path, const std::string& out) {
  auto infos = InfosFromJsonText(docfuzz::detail::ReadTextFile(std_path));
  std::vector<ApiConstraintSet> sets;
  std::size_t total = 0;
  for (const auto& info : infos) {
    sets.push_back(ExtractConstraints(info));
    total += sets.back().constraint_count;
  }
  docfuzz::detail::WriteTextFile(out, ConstraintSetsToJsonText(sets));
  return Json{{"apis", sets.size()}, {"total_constraints", total}};
}

inline CampaignReport RunFuzzStage(const PipelineConfig& cfg, std::atomic<bool>* cancel) {
  auto sets = ConstraintSetsFromJsonText(docfuzz::detail::ReadTextFile(cfg.constraints_path));
  CampaignReport report = RunCampaign(sets, cfg.campaign, cancel);
  WriteCampaignReport(report, cfg.campaign, cfg.report_dir);
  return report;
}

// ---- Entry point ---------------------------------------------------------------------

namespace detail {

inline int FuzzExit(const CampaignReport& report) {
  if (report.cancelled) return kExitCancelled;
  return report.bugs.empty() ? kExitClean : kExitBugs;
}

inline void RequireFile(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError("missing " + what);
  if (!std::filesystem::is_regular_file(path)) throw ConfigError(what + " not found: " + path);
}

}  // namespace detail

// Runs the command line; never throws. `cancel` (optional) stops a running
// campaign between cases.
inline int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
               std::atomic<bool>* cancel = nullptr) {
  CLI::App app{"Documentation-guided API fuzzer", "docfuzz"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  PipelineConfig cfg;
  std::string config_path;
  std::string log_level;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--log-level", log_level, "debug|info|warn|error|off");

  // Flags applied on top of the config file.
  std::optional<std::string> in, out_path, sigs, corpus, std_file, constraints, out_dir, backend,
      target, worker, replay, record, dump_cases, endpoint, model, docs, work;
  std::optional<std::uint64_t> budget, seed, timeout_ms;
  std::optional<std::size_t> workers;
  std::vector<std::string> disable;
  std::size_t sweep_step = 50;
  std::optional<std::string> csv_path;

  auto add_fuzz_flags = [&](CLI::App* sub) {
    sub->add_option("--target", target, "mock or module:<name>");
    sub->add_option("--budget", budget, "cases per API");
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--disable", disable, "type|size|value_noise|value_mask|value_division")
        ->take_all();
    sub->add_option("--workers", workers, "parallel worker lanes");
    sub->add_option("--timeout-ms", timeout_ms, "per-case timeout");
    sub->add_option("--worker", worker, "worker command (whitespace separated)");
    sub->add_option("--dump-cases", dump_cases, "write generated cases as JSONL per API");
    sub->add_option("--record", record, "record worker responses to a transcript");
    sub->add_option("--replay", replay, "replay a recorded transcript instead of a worker")
        ->check(CLI::ExistingFile);
  };

  auto* parse = app.add_subcommand("parse", "Parse raw docstrings into signatures");
  parse->add_option("--in", in, "JSON array of {api_path, body}")->required();
  parse->add_option("--out", out_path, "parsed output")->required();

  auto* enrich = app.add_subcommand("enrich", "Standardize and enrich parsed APIs");
  enrich->add_option("--sigs", sigs, "output of parse")->required();
  enrich->add_option("--corpus", corpus, "extra standardized infos for the parameter corpus");
  enrich->add_option("--backend", backend, "corpus|llm");
  enrich->add_option("--llm-endpoint", endpoint, "http URL of the completion service");
  enrich->add_option("--llm-model", model, "model name sent to the service");
  enrich->add_option("--out", out_path, "standardized output")->required();

  auto* extract = app.add_subcommand("extract", "Extract constraint sets");
  extract->add_option("--std", std_file, "standardized infos")->required();
  extract->add_option("--out", out_path, "constraint sets")->required();

  auto* fuzz = app.add_subcommand("fuzz", "Run a fuzzing campaign");
  fuzz->add_option("--constraints", constraints, "constraint sets");
  fuzz->add_option("--out", out_dir, "report directory");
  add_fuzz_flags(fuzz);

  auto* report = app.add_subcommand("report", "Render a campaign report");
  report->add_option("--in", in, "report directory")->required();
  report->add_option("--csv", csv_path, "budget sweep CSV (default <in>/sweep.csv)");
  report->add_option("--step", sweep_step, "sweep step in cases per API")
      ->check(CLI::PositiveNumber);

  auto* pipeline = app.add_subcommand("pipeline", "parse, enrich, extract, fuzz and report");
  pipeline->add_option("--docs", docs, "JSON array of {api_path, body}");
  pipeline->add_option("--work", work, "directory for every stage artifact")->required();
  pipeline->add_option("--backend", backend, "corpus|llm");
  add_fuzz_flags(pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitClean : kExitUsage;
  }

  try {
    if (!config_path.empty()) ApplyConfigFile(config_path, cfg);
    if (!log_level.empty()) cfg.log_level = log_level;
    auto level = log::ParseLevel(cfg.log_level);
    if (!level) throw ConfigError("unknown log level '" + cfg.log_level + "'");
    log::SetLevel(*level);

    auto apply = [](const std::optional<std::string>& flag, std::string& dst) {
      if (flag) dst = *flag;
    };
    apply(backend, cfg.backend);
    apply(endpoint, cfg.llm_endpoint);
    apply(model, cfg.llm_model);
    CampaignConfig& c = cfg.campaign;
    apply(target, c.target);
    if (budget) c.gen.budget_per_api = *budget;
    if (seed) c.gen.rng_seed = *seed;
    if (workers) c.parallel_workers = *workers;
    if (timeout_ms) c.timeout_ms = *timeout_ms;
    for (const auto& name : disable) {
      if (!c.gen.flags.Disable(name)) throw ConfigError("unknown strategy '" + name + "'");
    }
    if (worker) {
      c.worker_command.clear();
      std::istringstream ws(*worker);
      for (std::string tok; ws >> tok;) c.worker_command.push_back(tok);
    }
    if (c.worker_command.empty()) c.worker_command = DefaultWorkerCommand();
    if (replay) c.replay_path = *replay;
    if (record) c.record_path = *record;
    if (dump_cases) c.dump_cases_dir = *dump_cases;

    if (*parse) {
      detail::RequireFile(*in, "--in");
      ParseStats s = RunParseStage(*in, *out_path);
      out << Json{{"apis", s.apis},
                  {"well_documented", s.well_documented},
                  {"poorly_documented", s.poorly_documented},
                  {"undocumented", s.undocumented}}
                 .dump()
          << "\n";
      return kExitClean;
    }
    if (*enrich) {
      cfg.sigs_path = *sigs;
      apply(corpus, cfg.corpus_path);
      cfg.std_path = *out_path;
      detail::RequireFile(cfg.sigs_path, "--sigs");
      if (!cfg.corpus_path.empty()) detail::RequireFile(cfg.corpus_path, "--corpus");
      EnrichmentSummary s = RunEnrichStage(cfg);
      out << Json{{"standardized", s.standardized},
                  {"enriched", s.enriched},
                  {"skipped", s.skipped.size()}}
                 .dump()
          << "\n";
      return kExitClean;
    }
    if (*extract) {
      detail::RequireFile(*std_file, "--std");
      out << RunExtractStage(*std_file, *out_path).dump() << "\n";
      return kExitClean;
    }
    if (*fuzz) {
      apply(constraints, cfg.constraints_path);
      apply(out_dir, cfg.report_dir);
      detail::RequireFile(cfg.constraints_path, "--constraints");
      if (cfg.report_dir.empty()) throw ConfigError("missing --out");
      c.Check();
      CampaignReport r = RunFuzzStage(cfg, cancel);
      out << RenderTable(CampaignJson(r, c));
      return detail::FuzzExit(r);
    }
    if (*report) {
      std::filesystem::path dir = *in;
      detail::RequireFile((dir / "campaign.json").string(), "campaign.json");
      Json campaign = LoadCampaignJson(dir / "campaign.json");
      std::string csv = SweepCsv(SweepFromCampaign(campaign, sweep_step));
      docfuzz::detail::WriteTextFile(csv_path ? std::filesystem::path(*csv_path)
                                              : dir / "sweep.csv",
                                     csv);
      out << RenderTable(campaign);
      return kExitClean;
    }
    if (*pipeline) {
      std::filesystem::path w = *work;
      apply(docs, cfg.docs_path);
      detail::RequireFile(cfg.docs_path, "--docs");
      cfg.sigs_path = (w / "sigs.json").string();
      cfg.std_path = (w / "std_all.json").string();
      cfg.constraints_path = (w / "constraints.json").string();
      cfg.report_dir = (w / "report").string();
      c.Check();
      std::filesystem::create_directories(w);
      RunParseStage(cfg.docs_path, cfg.sigs_path);
      RunEnrichStage(cfg);
      Json metrics = RunExtractStage(cfg.std_path, cfg.constraints_path);
      log::Info("constraints extracted", metrics);
      CampaignReport r = RunFuzzStage(cfg, cancel);
      Json campaign = CampaignJson(r, c);
      docfuzz::detail::WriteTextFile(w / "report" / "sweep.csv",
                                     SweepCsv(SweepFromCampaign(campaign)));
      out << RenderTable(campaign);
      return detail::FuzzExit(r);
    }
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "docfuzz: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SchemaError& e) {
    err << "docfuzz: invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    log::Error("fatal", {{"error", e.what()}});
    err << "docfuzz: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace docfuzz::cli
