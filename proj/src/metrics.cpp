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

#include "rexamine/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "json.hpp"
#include "rexamine/error.hpp"
#include "rexamine/kernels/kernels.hpp"
#include "rexamine/text.hpp"

namespace rexamine {

using nlohmann::json;

MetricId MetricId::external(std::string adapter_name) {
  if (adapter_name.empty()) throw Error(ErrorCode::kInvalidArgument, "adapter name must be non-empty");
  if (adapter_name == "bleu2" || adapter_name == "embed_cosine" || adapter_name == "llm_judge") {
    throw Error(ErrorCode::kInvalidArgument, "adapter name '" + adapter_name + "' shadows a native metric");
  }
  return MetricId(MetricKind::kExternal, std::move(adapter_name));
}

MetricId MetricId::parse(std::string_view wire) {
  if (wire == "bleu2") return bleu2();
  if (wire == "embed_cosine") return embed_cosine();
  if (wire == "llm_judge") return llm_judge();
  constexpr std::string_view kPrefix = "external:";
  if (wire.substr(0, kPrefix.size()) == kPrefix) return external(std::string(wire.substr(kPrefix.size())));
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(wire) + "'");
}

std::string MetricId::wire() const {
  return kind_ == MetricKind::kExternal ? "external:" + name_ : name_;
}

std::string_view to_string(PairStyle p) {
  return p == PairStyle::kVsOriginal ? "vs_original" : "vs_standardized";
}

std::optional<PairStyle> parse_pair_style(std::string_view s) {
  if (s == "vs_original") return PairStyle::kVsOriginal;
  if (s == "vs_standardized") return PairStyle::kVsStandardized;
  return std::nullopt;
}

double standardize_direction(double raw, bool higher_better) { return higher_better ? -raw : raw; }

MetricScore make_score(MetricId metric, std::string report_id, PairStyle pair, double raw, bool higher_better) {
  if (!std::isfinite(raw)) {
    throw Error(ErrorCode::kInvalidArgument, metric.name() + " produced a non-finite score for " + report_id);
  }
  return MetricScore{std::move(metric), std::move(report_id), pair, raw, standardize_direction(raw, higher_better)};
}

json to_json(const MetricScore& s) {
  return json{{"metric", s.metric.wire()},
              {"report_id", s.report_id},
              {"pair", std::string(to_string(s.pair))},
              {"raw", s.raw},
              {"standardized_direction", s.standardized_direction}};
}

MetricScore score_from_json(const json& j) {
  try {
    auto pair = parse_pair_style(j.at("pair").get<std::string>());
    if (!pair) throw Error(ErrorCode::kParseError, "bad pair style '" + j.at("pair").get<std::string>() + "'");
    MetricId metric = MetricId::parse(j.at("metric").get<std::string>());
    return MetricScore{std::move(metric), j.at("report_id").get<std::string>(), *pair, j.at("raw").get<double>(),
                       j.at("standardized_direction").get<double>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("score row: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError) throw;
    throw Error(ErrorCode::kParseError, std::string("score row: ") + e.what());
  }
}

bool native_higher_better(MetricKind kind) {
  return kind == MetricKind::kBleu2 || kind == MetricKind::kEmbedCosine;
}

// ---------------------------------------------------------------------------
// BLEU-2

namespace {

bool is_ascii_punct(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

}  // namespace

std::vector<std::string> bleu_tokenize(std::string_view input) {
  const std::string lowered = text::to_lower(input);
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < lowered.size()) {
    while (i < lowered.size() && text::is_space(lowered[i])) ++i;
    std::size_t j = i;
    while (j < lowered.size() && !text::is_space(lowered[j])) ++j;
    std::size_t b = i;
    std::size_t e = j;
    while (b < e && is_ascii_punct(lowered[b])) ++b;
    while (e > b && is_ascii_punct(lowered[e - 1])) --e;
    if (e > b) tokens.emplace_back(lowered.substr(b, e - b));
    i = j;
  }
  return tokens;
}

double bleu2_tokens(std::span<const std::string> cand, std::span<const std::string> ref) {
  if (cand.empty() || ref.empty()) throw Error(ErrorCode::kEmptyText, "BLEU-2 needs at least one token on each side");

  std::map<std::string_view, std::size_t> ref_uni;
  for (const auto& t : ref) ++ref_uni[t];
  std::map<std::string_view, std::size_t> cand_uni;
  for (const auto& t : cand) ++cand_uni[t];
  std::size_t uni_matches = 0;
  for (const auto& [tok, n] : cand_uni) {
    auto it = ref_uni.find(tok);
    if (it != ref_uni.end()) uni_matches += std::min(n, it->second);
  }
  if (uni_matches == 0) return 0.0;

  using Bigram = std::pair<std::string_view, std::string_view>;
  std::map<Bigram, std::size_t> ref_bi;
  for (std::size_t i = 0; i + 1 < ref.size(); ++i) ++ref_bi[{ref[i], ref[i + 1]}];
  std::map<Bigram, std::size_t> cand_bi;
  for (std::size_t i = 0; i + 1 < cand.size(); ++i) ++cand_bi[{cand[i], cand[i + 1]}];

  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double p1 = static_cast<double>(uni_matches) / c;
  double p2 = 0.0;
  if (cand.size() == 1) {
    // No candidate bigrams: full credit only when the reference has none either.
    p2 = ref.size() == 1 ? 1.0 : 0.0;
  } else {
    std::size_t bi_matches = 0;
    for (const auto& [bg, n] : cand_bi) {
      auto it = ref_bi.find(bg);
      if (it != ref_bi.end()) bi_matches += std::min(n, it->second);
    }
    p2 = static_cast<double>(bi_matches) / (c - 1.0);
  }
  if (p2 == 0.0) return 0.0;
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return bp * std::sqrt(p1 * p2);
}

double bleu2(std::string_view candidate, std::string_view reference) {
  const auto c = bleu_tokenize(candidate);
  const auto r = bleu_tokenize(reference);
  return bleu2_tokens(c, r);
}

// ---------------------------------------------------------------------------
// Embedding cosine

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cosine of vectors with lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  const double na = kernels::dot(a, a);
  const double nb = kernels::dot(b, b);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  const double cos = kernels::dot(a, b) / std::sqrt(na * nb);
  return std::clamp(cos, -1.0, 1.0);
}

double embed_cosine(std::string_view candidate, std::string_view reference, LlmGateway& gateway) {
  if (text::is_blank(candidate) || text::is_blank(reference)) {
    throw Error(ErrorCode::kEmptyText, "embed_cosine needs non-empty texts");
  }
  const std::vector<std::string> texts{std::string(candidate), std::string(reference)};
  const auto vecs = gateway.embed(texts);
  return cosine_similarity(vecs[0].values, vecs[1].values);
}

// ---------------------------------------------------------------------------
// LLM judge

namespace {

constexpr const char* kJudgeSystem =
    "You are a meticulous radiologist. Reply with a single JSON object and nothing else.";

std::string numbered_lines(std::string_view candidate, std::size_t* count) {
  const auto spans = segment_sentences(candidate);
  std::string out;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    out += std::to_string(i + 1) + ". ";
    out += spans[i].in(candidate);
    out += '\n';
  }
  if (count != nullptr) *count = spans.size();
  return out;
}

[[noreturn]] void malformed(const std::string& why) { throw Error(ErrorCode::kMalformedJudgeOutput, why); }

std::string_view strip_fence(std::string_view s) {
  s = text::trim(s);
  if (s.substr(0, 3) != "```") return s;
  auto nl = s.find('\n');
  if (nl == std::string_view::npos) return s;
  s.remove_prefix(nl + 1);
  s = text::trim(s);
  if (s.size() >= 3 && s.substr(s.size() - 3) == "```") s.remove_suffix(3);
  return text::trim(s);
}

}  // namespace

std::vector<int> parse_judge_output(std::string_view reply, std::size_t line_count) {
  json j;
  try {
    j = json::parse(strip_fence(reply));
  } catch (const json::parse_error&) {
    malformed("reply is not JSON");
  }
  if (!j.is_object() || !j.contains("corrections") || !j["corrections"].is_array()) {
    malformed("reply lacks a 'corrections' array");
  }
  std::set<int> lines;
  for (const auto& item : j["corrections"]) {
    if (!item.is_object() || !item.contains("line") || !item["line"].is_number_integer()) {
      malformed("correction without an integer 'line'");
    }
    if (item.contains("reason") && !item["reason"].is_string()) malformed("'reason' must be a string");
    const long long line = item["line"].get<long long>();
    if (line < 1 || static_cast<unsigned long long>(line) > line_count) {
      malformed("line " + std::to_string(line) + " outside 1.." + std::to_string(line_count));
    }
    lines.insert(static_cast<int>(line));
  }
  return {lines.begin(), lines.end()};
}

ChatRequest judge_request(std::string_view candidate, std::string_view reference, const LlmOptions& options) {
  const PromptTemplate& tmpl = builtin_prompt(PromptName::kJudge);
  ChatRequest req;
  req.model_id = options.model_id;
  req.system = kJudgeSystem;
  req.user = tmpl.render({{"reference", std::string(reference)}, {"candidate", numbered_lines(candidate, nullptr)}});
  req.temperature = options.temperature;
  req.max_tokens = options.max_tokens;
  return req;
}

ChatRequest judge_reprompt(const ChatRequest& first, std::string_view bad_reply) {
  ChatRequest req = first;
  constexpr std::size_t kMaxEcho = 500;
  std::string echo(bad_reply.substr(0, kMaxEcho));
  req.user += "\n\nYour previous reply did not follow the required JSON schema:\n" + echo +
              "\n\nReply again with JSON only: {\"corrections\": [{\"line\": <int>, \"reason\": \"<str>\"}]}";
  return req;
}

JudgeResult llm_judge(std::string_view candidate, std::string_view reference, LlmGateway& gateway,
                      const LlmOptions& options) {
  if (text::is_blank(candidate) || text::is_blank(reference)) {
    throw Error(ErrorCode::kEmptyText, "llm_judge needs non-empty texts");
  }
  std::size_t line_count = 0;
  numbered_lines(candidate, &line_count);
  const ChatRequest first = judge_request(candidate, reference, options);
  const ChatResponse reply = gateway.chat(first);
  try {
    auto lines = parse_judge_output(reply.text, line_count);
    return JudgeResult{lines.size(), std::move(lines)};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kMalformedJudgeOutput) throw;
  }
  const ChatResponse retry = gateway.chat(judge_reprompt(first, reply.text));
  auto lines = parse_judge_output(retry.text, line_count);
  return JudgeResult{lines.size(), std::move(lines)};
}

}  // namespace rexamine
