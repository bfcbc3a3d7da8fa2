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

// Domain records shared across modules: reports, generated bundles, and the
// seven-category error taxonomy used by both the perturber and the expert
// annotation service.

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rexamine/time.hpp"

namespace rexamine {

// Site (hospital / country) tag. Case-sensitive, non-empty.
class SiteId {
 public:
  SiteId() = default;
  explicit SiteId(std::string code);

  const std::string& code() const { return code_; }

  auto operator<=>(const SiteId&) const = default;

 private:
  std::string code_;
};

struct ReportRecord {
  std::string report_id;
  SiteId site;
  std::string text;
  std::map<std::string, std::string> sections;
  std::string language_note;

  bool operator==(const ReportRecord&) const = default;
};

enum class ErrorCategory {
  kFalseFinding,
  kOmittedFinding,
  kWrongLocation,
  kWrongPosition,
  kWrongSeverity,
  kFalseComparison,
  kOmittedComparison,
};

inline constexpr std::array<ErrorCategory, 7> kAllErrorCategories{
    ErrorCategory::kFalseFinding,   ErrorCategory::kOmittedFinding,  ErrorCategory::kWrongLocation,
    ErrorCategory::kWrongPosition,  ErrorCategory::kWrongSeverity,   ErrorCategory::kFalseComparison,
    ErrorCategory::kOmittedComparison,
};

// Wire names: false_finding, omitted_finding, ...
std::string_view to_string(ErrorCategory c);
std::optional<ErrorCategory> parse_error_category(std::string_view name);

// One edit made by the deterministic perturber. `before` is the whole
// sentence at `sentence_index` of the standardized text and `after` its
// replacement; an empty `after` deletes the sentence.
struct InjectedError {
  ErrorCategory category{};
  std::size_t sentence_index = 0;
  std::string before;
  std::string after;

  bool operator==(const InjectedError&) const = default;
};

enum class GenerationMethod { kLlm, kDeterministic };

struct GenerationProvenance {
  GenerationMethod method = GenerationMethod::kLlm;
  std::string model_id;
  std::string prompt_version;
  std::optional<std::uint64_t> seed;
  UtcInstant timestamp;

  bool operator==(const GenerationProvenance&) const = default;
};

struct CandidateBundle {
  std::string report_id;
  std::string standardized_text;
  std::string candidate_text;
  GenerationProvenance provenance;
  std::optional<std::vector<InjectedError>> manifest;

  bool operator==(const CandidateBundle&) const = default;
};

// Throws Error(kInvalidArgument) when a bundle breaks its invariants
// (blank texts, manifest/method mismatch, provenance fields missing).
void validate(const CandidateBundle& bundle);

}  // namespace rexamine
