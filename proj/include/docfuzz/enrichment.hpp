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

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "docfuzz/doc_parser.hpp"
#include "docfuzz/error.hpp"
#include "docfuzz/keywords.hpp"
#include "docfuzz/log.hpp"
#include "docfuzz/schema.hpp"

namespace docfuzz {

namespace detail {

// Appends `candidate` to `params` if the prefix stays valid; otherwise
// retries without dependencies and finally with an unconstrained parameter.
inline void AppendValidParam(std::vector<ParamInfo>& params, ParamInfo candidate) {
  auto valid_with = [&](const ParamInfo& p) {
    StandardizedApiInfo probe;
    probe.api_name = "probe";
    probe.params = params;
    probe.params.push_back(p);
    return Validate(probe).empty();
  };
  if (valid_with(candidate)) {
    params.push_back(std::move(candidate));
    return;
  }
  ParamInfo no_deps = candidate;
  no_deps.description.depends_on.clear();
  if (valid_with(no_deps)) {
    params.push_back(std::move(no_deps));
    return;
  }
  ParamInfo bare;
  bare.name = candidate.name;
  bare.description.raw_text = candidate.description.raw_text;
  params.push_back(std::move(bare));
}

}  // namespace detail

inline StandardizedApiInfo StandardizeWellDocumented(
    const SignatureInfo& sig, const std::vector<ParamDescription>& descs) {
  StandardizedApiInfo info;
  info.api_name = sig.api_name;
  info.output_count = sig.outputs.size();
  info.provenance = Provenance::kParsed;
  for (const auto& name : sig.inputs) {
    auto it = std::find_if(descs.begin(), descs.end(),
                           [&](const ParamDescription& d) { return d.name == name; });
    std::string text = it == descs.end() ? std::string() : it->text;
    detail::AppendValidParam(info.params,
                             keywords::InferParamInfo(name, text, info.params));
  }
  return info;
}

// ---- Parameter corpus -------------------------------------------------------

inline std::string NormalizeParamName(std::string_view name) {
  std::string out = detail::ToLower(name);
  while (!out.empty() && std::isdigit(static_cast<unsigned char>(out.back()))) {
    out.pop_back();
  }
  return out;
}

struct CorpusEntry {
  ParamInfo info;
  std::string source_api;
};

class ParamCorpus {
 public:
  void Add(const ParamInfo& info, const std::string& source_api) {
    entries_[NormalizeParamName(info.name)].push_back({info, source_api});
  }

  // Keeps each bucket ordered by (source_api, name).
  void Sort() {
    for (auto& [key, bucket] : entries_) {
      std::stable_sort(bucket.begin(), bucket.end(),
                       [](const CorpusEntry& a, const CorpusEntry& b) {
                         if (a.source_api != b.source_api) return a.source_api < b.source_api;
                         return a.info.name < b.info.name;
                       });
    }
  }

  const std::vector<CorpusEntry>* Bucket(std::string_view normalized) const {
    auto it = entries_.find(std::string(normalized));
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [key, bucket] : entries_) n += bucket.size();
    return n;
  }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, std::vector<CorpusEntry>>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::vector<CorpusEntry>> entries_;
};

inline ParamCorpus BuildParamCorpus(const std::vector<StandardizedApiInfo>& infos) {
  ParamCorpus corpus;
  for (const auto& info : infos) {
    if (info.provenance != Provenance::kParsed) continue;
    for (const auto& p : info.params) corpus.Add(p, info.api_name);
  }
  corpus.Sort();
  return corpus;
}

namespace detail {

// Pattern identity ignores the parameter name and its dependency edges,
// which refer to names local to the source API.
inline std::string PatternKey(const ParamInfo& p) {
  ParamInfo copy = p;
  copy.name.clear();
  copy.description.depends_on.clear();
  return ToJson(copy).dump();
}

// Most frequent pattern among `entries`; ties go to the smallest source_api.
inline const CorpusEntry* MostFrequentPattern(const std::vector<const CorpusEntry*>& entries) {
  std::map<std::string, std::pair<std::size_t, const CorpusEntry*>> counts;
  for (const CorpusEntry* e : entries) {
    auto& slot = counts[PatternKey(e->info)];
    ++slot.first;
    if (!slot.second || e->source_api < slot.second->source_api) slot.second = e;
  }
  const CorpusEntry* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [key, slot] : counts) {
    const auto& [count, entry] = slot;
    if (count > best_count ||
        (count == best_count && entry->source_api < best->source_api)) {
      best = entry;
      best_count = count;
    }
  }
  return best;
}

}  // namespace detail

// Pattern adopted for parameter `name`, or nullopt when the corpus has none.
inline std::optional<CorpusEntry> LookupCorpus(const ParamCorpus& corpus,
                                               std::string_view name) {
  const auto* bucket = corpus.Bucket(NormalizeParamName(name));
  if (!bucket || bucket->empty()) return std::nullopt;
  std::vector<const CorpusEntry*> exact;
  std::vector<const CorpusEntry*> all;
  for (const auto& e : *bucket) {
    all.push_back(&e);
    if (e.info.name == name) exact.push_back(&e);
  }
  const CorpusEntry* pick = detail::MostFrequentPattern(exact.empty() ? all : exact);
  return *pick;
}

// ---- Backends ---------------------------------------------------------------

struct CorpusInference {};

struct ExternalLlm {
  std::string endpoint;
  std::string model;
  std::string prompt_template;  // replaces the default task text when set
};

using EnrichmentBackend = std::variant<CorpusInference, ExternalLlm>;

// Sends one prompt and returns the model's text reply. Throws
// BackendUnavailable on transport failure.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string Complete(const std::string& prompt) = 0;
};

inline std::string RenderLlmPrompt(const SignatureInfo& sig,
                                   const std::vector<StandardizedApiInfo>& exemplars,
                                   std::string_view task_override = {}) {
  std::string out;
  out += "## Input\n";
  out += "Raw API documentation:\n";
  out += RenderSignature(sig) + "\n\n";
  out += "## Task\n";
  if (!task_override.empty()) {
    out += std::string(task_override) + "\n\n";
  } else {
    out +=
        "Build the standardized information for this API.\n"
        "- Names inside the parentheses and outside brackets are inputs.\n"
        "- Names after the arrow and names inside brackets are outputs.\n"
        "- For each input give flag, default, type_domain, size_spec and "
        "description.\n"
        "- Where the documentation is silent, infer the parameter from the "
        "examples of documented APIs with similar parameter names.\n\n";
  }
  if (!exemplars.empty()) {
    out += "## Examples\n";
    for (const auto& e : exemplars) {
      out += "```json\n" + ToJson(e).dump(2) + "\n```\n";
    }
    out += "\n";
  }
  out += "## Output\n";
  out +=
      "Reply with exactly one JSON object with the fields api_name, params, "
      "output_count and provenance (\"enriched\").\n";
  return out;
}

// Extracts the JSON object from a model reply (fenced or bare) and checks
// that it describes `sig`.
inline StandardizedApiInfo ParseLlmReply(std::string_view reply, const SignatureInfo& sig) {
  std::size_t open = reply.find('{');
  std::size_t close = reply.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw SchemaError("", "reply contains no JSON object");
  }
  StandardizedApiInfo info = ApiInfoFromJsonText(reply.substr(open, close - open + 1));
  info.provenance = Provenance::kEnriched;
  info.api_name = sig.api_name;
  auto report = Validate(info);
  if (!report.empty()) throw InvalidApiInfo("invalid reply: " + ToString(report.front()));
  if (info.params.size() != sig.inputs.size()) {
    throw InvalidApiInfo("reply parameter count does not match the signature");
  }
  for (std::size_t i = 0; i < sig.inputs.size(); ++i) {
    if (info.params[i].name != sig.inputs[i]) {
      throw InvalidApiInfo("reply parameter order does not match the signature");
    }
  }
  info.output_count = sig.outputs.size();
  return info;
}

inline StandardizedApiInfo EnrichFromCorpus(const SignatureInfo& sig,
                                            const ParamCorpus& corpus) {
  StandardizedApiInfo info;
  info.api_name = sig.api_name;
  info.output_count = sig.outputs.size();
  info.provenance = Provenance::kEnriched;
  for (const auto& name : sig.inputs) {
    ParamInfo candidate;
    candidate.name = name;
    if (auto hit = LookupCorpus(corpus, name)) {
      candidate = hit->info;
      candidate.name = name;
      // Keep only edges whose source exists under the same name here.
      std::erase_if(candidate.description.depends_on, [&](const DependencyEdge& e) {
        return info.find(e.source) == nullptr;
      });
    } else {
      candidate.type_domain = {ScalarType::kFloat32};
    }
    detail::AppendValidParam(info.params, std::move(candidate));
  }
  return info;
}

// Never throws for backend failures: any problem with the external model
// falls back to corpus inference.
inline StandardizedApiInfo EnrichPoorlyDocumented(
    const SignatureInfo& sig, const ParamCorpus& corpus, const EnrichmentBackend& backend,
    LlmClient* client = nullptr, const std::vector<StandardizedApiInfo>& exemplars = {}) {
  if (const auto* llm = std::get_if<ExternalLlm>(&backend); llm && client) {
    try {
      std::string reply =
          client->Complete(RenderLlmPrompt(sig, exemplars, llm->prompt_template));
      return ParseLlmReply(reply, sig);
    } catch (const BackendUnavailable& e) {
      log::Warn("llm backend unavailable, using corpus inference",
                {{"api", sig.api_name}, {"error", e.what()}});
    } catch (const Error& e) {
      log::Warn("llm reply rejected, using corpus inference",
                {{"api", sig.api_name}, {"error", e.what()}});
    }
  }
  return EnrichFromCorpus(sig, corpus);
}

// ---- Whole-corpus stage -------------------------------------------------------

struct EnrichmentSummary {
  std::size_t standardized = 0;
  std::size_t enriched = 0;
  std::vector<std::string> skipped;  // api paths with no usable signature
};

inline std::vector<StandardizedApiInfo> StandardizeAll(
    const std::vector<ParsedDoc>& docs, const EnrichmentBackend& backend,
    LlmClient* client = nullptr, EnrichmentSummary* summary = nullptr,
    std::size_t exemplar_count = 2, const std::vector<StandardizedApiInfo>& extra_corpus = {}) {
  EnrichmentSummary local;
  EnrichmentSummary& sum = summary ? *summary : local;
  std::vector<std::optional<StandardizedApiInfo>> slots(docs.size());
  std::vector<StandardizedApiInfo> documented;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& d = docs[i];
    if (d.doc_class != DocClass::kWellDocumented || !d.signature) continue;
    StandardizedApiInfo info = StandardizeWellDocumented(*d.signature, d.params);
    info.api_name = TargetApiName(d.doc, *d.signature);
    documented.push_back(info);
    slots[i] = std::move(info);
    ++sum.standardized;
  }
  std::vector<StandardizedApiInfo> corpus_infos = documented;
  for (const auto& info : extra_corpus) {
    if (info.provenance == Provenance::kParsed) corpus_infos.push_back(info);
  }
  ParamCorpus corpus = BuildParamCorpus(corpus_infos);
  std::vector<StandardizedApiInfo> exemplars(
      documented.begin(),
      documented.begin() + static_cast<std::ptrdiff_t>(
                               std::min(exemplar_count, documented.size())));
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& d = docs[i];
    if (slots[i]) continue;
    if (d.doc_class == DocClass::kUndocumented || !d.signature) {
      sum.skipped.push_back(d.doc.api_path);
      continue;
    }
    StandardizedApiInfo info =
        EnrichPoorlyDocumented(*d.signature, corpus, backend, client, exemplars);
    info.api_name = TargetApiName(d.doc, *d.signature);
    slots[i] = std::move(info);
    ++sum.enriched;
  }
  std::vector<StandardizedApiInfo> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

}  // namespace docfuzz
