// Copyright 2026 The rexamine Authors
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

#include "rexamine/serialize.hpp"

#include "rexamine/error.hpp"
#include "rexamine/text.hpp"

namespace rexamine {

using nlohmann::json;

SiteId::SiteId(std::string code) : code_(std::move(code)) {
  if (code_.empty()) throw Error(ErrorCode::kInvalidArgument, "site id must be non-empty");
}

std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kFalseFinding: return "false_finding";
    case ErrorCategory::kOmittedFinding: return "omitted_finding";
    case ErrorCategory::kWrongLocation: return "wrong_location";
    case ErrorCategory::kWrongPosition: return "wrong_position";
    case ErrorCategory::kWrongSeverity: return "wrong_severity";
    case ErrorCategory::kFalseComparison: return "false_comparison";
    case ErrorCategory::kOmittedComparison: return "omitted_comparison";
  }
  return "unknown";
}

std::optional<ErrorCategory> parse_error_category(std::string_view name) {
  for (ErrorCategory c : kAllErrorCategories) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

void validate(const CandidateBundle& b) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kInvalidArgument, "bundle " + b.report_id + ": " + why);
  };
  if (b.report_id.empty()) fail("empty report_id");
  if (text::is_blank(b.standardized_text)) fail("blank standardized_text");
  if (text::is_blank(b.candidate_text)) fail("blank candidate_text");
  const bool deterministic = b.provenance.method == GenerationMethod::kDeterministic;
  if (deterministic != b.manifest.has_value()) fail("manifest must be present iff method is deterministic");
  if (deterministic && !b.provenance.seed) fail("deterministic provenance needs a seed");
  if (!deterministic && b.provenance.model_id.empty()) fail("llm provenance needs a model_id");
}

namespace {

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::kParseError, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) throw Error(ErrorCode::kParseError, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::string optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) throw Error(ErrorCode::kParseError, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

void to_json(json& j, const SiteId& s) { j = s.code(); }

void to_json(json& j, const ReportRecord& r) {
  j = json{{"report_id", r.report_id}, {"site", r.site.code()}, {"text", r.text}};
  if (!r.sections.empty()) j["sections"] = r.sections;
  if (!r.language_note.empty()) j["language_note"] = r.language_note;
}

ReportRecord report_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "record must be a JSON object");
  ReportRecord r;
  r.report_id = require_string(j, "report_id");
  const std::string site = require_string(j, "site");
  if (site.empty()) throw Error(ErrorCode::kParseError, "field 'site' is empty");
  r.site = SiteId(site);
  r.text = require_string(j, "text");
  if (auto it = j.find("sections"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw Error(ErrorCode::kParseError, "field 'sections' must be an object");
    for (const auto& [name, value] : it->items()) {
      if (!value.is_string()) throw Error(ErrorCode::kParseError, "section '" + name + "' must be a string");
      r.sections.emplace(name, value.get<std::string>());
    }
  }
  r.language_note = optional_string(j, "language_note");
  return r;
}

void to_json(json& j, const InjectedError& e) {
  j = json{{"category", to_string(e.category)},
           {"sentence_index", e.sentence_index},
           {"before", e.before},
           {"after", e.after}};
}

InjectedError injected_error_from_json(const json& j) {
  InjectedError e;
  const std::string cat = require_string(j, "category");
  auto parsed = parse_error_category(cat);
  if (!parsed) throw Error(ErrorCode::kParseError, "unknown error category '" + cat + "'");
  e.category = *parsed;
  const json& idx = require(j, "sentence_index");
  if (!idx.is_number_unsigned()) throw Error(ErrorCode::kParseError, "sentence_index must be unsigned");
  e.sentence_index = idx.get<std::size_t>();
  e.before = require_string(j, "before");
  e.after = require_string(j, "after");
  return e;
}

void to_json(json& j, const GenerationProvenance& p) {
  j = json{{"method", p.method == GenerationMethod::kLlm ? "llm" : "deterministic"},
           {"model_id", p.model_id},
           {"prompt_version", p.prompt_version},
           {"timestamp", p.timestamp.iso()}};
  if (p.seed) j["seed"] = *p.seed;
}

GenerationProvenance provenance_from_json(const json& j) {
  GenerationProvenance p;
  const std::string method = require_string(j, "method");
  if (method == "llm") {
    p.method = GenerationMethod::kLlm;
  } else if (method == "deterministic") {
    p.method = GenerationMethod::kDeterministic;
  } else {
    throw Error(ErrorCode::kParseError, "unknown generation method '" + method + "'");
  }
  p.model_id = optional_string(j, "model_id");
  p.prompt_version = optional_string(j, "prompt_version");
  if (auto it = j.find("seed"); it != j.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) throw Error(ErrorCode::kParseError, "seed must be unsigned");
    p.seed = it->get<std::uint64_t>();
  }
  p.timestamp = UtcInstant::parse(require_string(j, "timestamp"));
  return p;
}

void to_json(json& j, const CandidateBundle& b) {
  j = json{{"report_id", b.report_id},
           {"standardized_text", b.standardized_text},
           {"candidate_text", b.candidate_text},
           {"provenance", b.provenance}};
  if (b.manifest) j["manifest"] = *b.manifest;
}

CandidateBundle bundle_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "bundle must be a JSON object");
  CandidateBundle b;
  b.report_id = require_string(j, "report_id");
  b.standardized_text = require_string(j, "standardized_text");
  b.candidate_text = require_string(j, "candidate_text");
  b.provenance = provenance_from_json(require(j, "provenance"));
  if (auto it = j.find("manifest"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorCode::kParseError, "manifest must be an array");
    std::vector<InjectedError> manifest;
    for (const auto& e : *it) manifest.push_back(injected_error_from_json(e));
    b.manifest = std::move(manifest);
  }
  return b;
}

}  // namespace rexamine
