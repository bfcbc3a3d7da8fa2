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

// Metric suite. Every score is also reported in the "higher = worse"
// direction: similarity metrics are negated, count/penalty metrics are kept.

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rexamine/gateway.hpp"
#include "rexamine/perturb.hpp"

namespace rexamine {

enum class MetricKind { kBleu2, kEmbedCosine, kLlmJudge, kExternal };

class MetricId {
 public:
  static MetricId bleu2() { return MetricId(MetricKind::kBleu2, "bleu2"); }
  static MetricId embed_cosine() { return MetricId(MetricKind::kEmbedCosine, "embed_cosine"); }
  static MetricId llm_judge() { return MetricId(MetricKind::kLlmJudge, "llm_judge"); }
  // Adapter names share one namespace with the native metric names.
  static MetricId external(std::string adapter_name);

  // "bleu2", "embed_cosine", "llm_judge" or "external:<adapter>".
  static MetricId parse(std::string_view wire);
  std::string wire() const;

  MetricKind kind() const { return kind_; }
  // Display name: the native name or the adapter name.
  const std::string& name() const { return name_; }

  // Ordered by display name.
  bool operator==(const MetricId& o) const { return kind_ == o.kind_ && name_ == o.name_; }
  std::strong_ordering operator<=>(const MetricId& o) const {
    if (auto c = name_ <=> o.name_; c != 0) return c;
    return kind_ <=> o.kind_;
  }

 private:
  MetricId(MetricKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}
  MetricKind kind_;
  std::string name_;
};

enum class PairStyle { kVsOriginal, kVsStandardized };

std::string_view to_string(PairStyle p);
std::optional<PairStyle> parse_pair_style(std::string_view s);

struct MetricScore {
  MetricId metric = MetricId::bleu2();
  std::string report_id;
  PairStyle pair = PairStyle::kVsOriginal;
  double raw = 0.0;
  double standardized_direction = 0.0;
};

// scores.jsonl rows. score_from_json throws ParseError.
nlohmann::json to_json(const MetricScore& s);
MetricScore score_from_json(const nlohmann::json& j);

// -raw for higher-better metrics, raw otherwise.
double standardize_direction(double raw, bool higher_better);

// Throws InvalidArgument on non-finite raw.
MetricScore make_score(MetricId metric, std::string report_id, PairStyle pair, double raw, bool higher_better);

// Native metric directions: bleu2 and embed_cosine are similarities.
bool native_higher_better(MetricKind kind);

// Lowercase, split on whitespace, strip leading/trailing ASCII punctuation;
// internal punctuation survives ("r/o", "x-ray").
std::vector<std::string> bleu_tokenize(std::string_view text);

// Sentence-level BLEU with n = 1, 2, uniform weights, clipped counts, no
// smoothing, brevity penalty exp(1 - r/c) when c < r. Throws EmptyText.
double bleu2(std::string_view candidate, std::string_view reference);
double bleu2_tokens(std::span<const std::string> candidate, std::span<const std::string> reference);

// Cosine of two equal-length vectors, clamped to [-1, 1]. Throws
// ZeroVector / DimensionMismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

double embed_cosine(std::string_view candidate, std::string_view reference, LlmGateway& gateway);

// Parse {"corrections":[{"line": int, "reason": str}, ...]} (optionally
// inside a ```json fence) and return the distinct flagged lines. Throws
// MalformedJudgeOutput on anything else, including line numbers outside
// 1..line_count.
std::vector<int> parse_judge_output(std::string_view reply, std::size_t line_count);

struct JudgeResult {
  std::size_t count = 0;
  std::vector<int> lines;
};

// Ask the model which candidate lines (sentence spans) need correction.
// One reprompt on malformed output, then MalformedJudgeOutput.
JudgeResult llm_judge(std::string_view candidate, std::string_view reference, LlmGateway& gateway,
                      const LlmOptions& options = {});

// The two chat requests llm_judge may send (initial, reprompt). Exposed for
// fixture authoring.
ChatRequest judge_request(std::string_view candidate, std::string_view reference, const LlmOptions& options);
ChatRequest judge_reprompt(const ChatRequest& first, std::string_view bad_reply);

}  // namespace rexamine
