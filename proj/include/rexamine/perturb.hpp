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

#pragma once

// Candidate generation: style standardization and error injection through
// the LLM gateway, plus a rule-based perturber whose manifest records every
// edit exactly.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rexamine/gateway.hpp"
#include "rexamine/types.hpp"

namespace rexamine {

// Byte range of one sentence. Spans never include surrounding whitespace;
// the text between consecutive spans is whitespace only.
struct SentenceSpan {
  std::size_t offset = 0;
  std::size_t length = 0;

  std::size_t end() const { return offset + length; }
  std::string_view in(std::string_view text) const { return text.substr(offset, length); }
  bool operator==(const SentenceSpan&) const = default;
};

// Sentence boundaries: '.', '!' or '?' (plus closing quotes/brackets)
// followed by whitespace or end of text, and every line break. A period
// after a known abbreviation ("Rt.", "Lt.", "vs.", "e.g.", "No." before a
// number, ...) does not end a sentence.
std::vector<SentenceSpan> segment_sentences(std::string_view text);

enum class PromptName { kStandardize, kInjectErrors, kJudge };

struct PromptTemplate {
  PromptName name{};
  std::string version;
  std::string body;  // {placeholder} fields

  // "standardize.v1" etc.; recorded in provenance.
  std::string id() const;

  // Substitute every {key}. Unknown placeholders are left as they are.
  std::string render(const std::map<std::string, std::string>& fields) const;
};

// The built-in templates (embedded from prompts/*.txt).
const PromptTemplate& builtin_prompt(PromptName name);

struct LlmOptions {
  std::string model_id = "gpt-4";
  double temperature = 0.0;
  int max_tokens = 1024;
};

struct Generation {
  std::string text;
  GenerationProvenance provenance;

  bool operator==(const Generation&) const = default;
};

// Text handed to the standardization prompt: the findings and impression
// sections when the record has them, the whole report otherwise.
std::string standardization_input(const ReportRecord& report);

// Errors: gateway errors, EmptyGeneration on a blank reply.
Generation standardize(const ReportRecord& report, LlmGateway& gateway, const LlmOptions& options = {});
Generation inject_errors_llm(std::string_view standardized, LlmGateway& gateway,
                             const LlmOptions& options = {});

struct DeterministicInjection {
  std::string candidate;
  std::vector<InjectedError> manifest;  // ordered by sentence_index
};

// k rule-based errors on k distinct sentences. Same (text, k, seed) gives
// the same result. Throws NotEnoughMaterial when fewer than k sentences are
// eligible.
DeterministicInjection inject_errors_deterministic(std::string_view standardized, std::size_t k,
                                                   std::uint64_t seed);

// Rebuild a candidate from the standardized text and a manifest. Untouched
// sentences and the whitespace between kept sentences are copied byte for
// byte. Throws InvalidArgument when an entry does not match the text.
std::string apply_manifest(std::string_view standardized, std::span<const InjectedError> manifest);

// Categories whose rule can edit this sentence (empty for headers such as
// "Impression:").
std::vector<ErrorCategory> applicable_categories(std::string_view sentence);

std::size_t eligible_sentence_count(std::string_view text);

// Per-report error count for synthetic runs: uniform on {1, 2, 3, 4},
// derived from (run seed, report id).
std::size_t default_error_count(std::uint64_t run_seed, std::string_view report_id);

// Per-report seed derived from the run seed.
std::uint64_t report_seed(std::uint64_t run_seed, std::string_view report_id);

}  // namespace rexamine
