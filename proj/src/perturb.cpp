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

#include "rexamine/perturb.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <random>
#include <set>

#include "prompts.generated.hpp"
#include "rexamine/error.hpp"
#include "rexamine/text.hpp"

namespace rexamine {

// ---------------------------------------------------------------------------
// Sentence segmentation

namespace {

constexpr std::array<std::string_view, 14> kAbbreviations{
    "rt", "lt", "dr", "mr", "mrs", "ms", "vs", "approx", "e.g", "i.e", "fig", "cf", "st", "resp"};

bool is_closer(char c) { return c == ')' || c == ']' || c == '"' || c == '\''; }

// True when the period at `dot` (inside [start, dot]) ends an abbreviation
// rather than the sentence. `next` is the index just past the closers.
bool period_is_abbreviation(std::string_view text, std::size_t start, std::size_t dot, std::size_t next) {
  std::size_t w = dot;
  while (w > start && !text::is_space(text[w - 1])) --w;
  std::string word;
  for (std::size_t i = w; i < dot; ++i) {
    char c = text[i];
    if (word.empty() && (c == '(' || c == '[')) continue;
    word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (word.empty()) return false;
  if (std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end()) return true;
  if (word == "no") {
    // "No. 2 tube" is a number sign; "No." alone is a sentence.
    std::size_t k = next;
    while (k < text.size() && text[k] == ' ') ++k;
    return k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]));
  }
  return false;
}

}  // namespace

std::vector<SentenceSpan> segment_sentences(std::string_view text) {
  std::vector<SentenceSpan> spans;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    while (i < n && text::is_space(text[i])) ++i;
    if (i >= n) break;
    const std::size_t start = i;
    std::size_t j = start;
    std::size_t end = n;
    while (j < n) {
      const char c = text[j];
      if (c == '\n') {
        end = j;
        break;
      }
      if (c == '.' || c == '!' || c == '?') {
        std::size_t k = j + 1;
        while (k < n && is_closer(text[k])) ++k;
        if (k >= n || text::is_space(text[k])) {
          if (c == '.' && period_is_abbreviation(text, start, j, k)) {
            j = k;
            continue;
          }
          end = k;
          break;
        }
        j = k;
        continue;
      }
      ++j;
    }
    if (j >= n) end = n;
    std::size_t trimmed = end;
    while (trimmed > start && text::is_space(text[trimmed - 1])) --trimmed;
    spans.push_back({start, trimmed - start});
    i = end;
  }
  return spans;
}

// ---------------------------------------------------------------------------
// Prompt templates

std::string PromptTemplate::id() const {
  std::string base;
  switch (name) {
    case PromptName::kStandardize: base = "standardize"; break;
    case PromptName::kInjectErrors: base = "inject_errors"; break;
    case PromptName::kJudge: base = "judge"; break;
  }
  return base + "." + version;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& fields) const {
  std::string out;
  out.reserve(body.size());
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      auto close = body.find('}', i + 1);
      if (close != std::string::npos) {
        auto it = fields.find(body.substr(i + 1, close - i - 1));
        if (it != fields.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(body[i++]);
  }
  return out;
}

const PromptTemplate& builtin_prompt(PromptName name) {
  static const PromptTemplate standardize{PromptName::kStandardize, "v1", prompts::embedded::kStandardizeV1};
  static const PromptTemplate inject{PromptName::kInjectErrors, "v1", prompts::embedded::kInjectErrorsV1};
  static const PromptTemplate judge{PromptName::kJudge, "v1", prompts::embedded::kJudgeV1};
  switch (name) {
    case PromptName::kStandardize: return standardize;
    case PromptName::kInjectErrors: return inject;
    case PromptName::kJudge: return judge;
  }
  return standardize;
}

// ---------------------------------------------------------------------------
// LLM-backed generation

std::string standardization_input(const ReportRecord& report) {
  auto findings = report.sections.find("findings");
  auto impression = report.sections.find("impression");
  if (findings == report.sections.end() && impression == report.sections.end()) return report.text;
  std::string out;
  if (findings != report.sections.end()) out += "Findings: " + findings->second;
  if (impression != report.sections.end()) {
    if (!out.empty()) out += "\n\n";
    out += "Impression: " + impression->second;
  }
  return out;
}

namespace {

Generation run_prompt(PromptName name, const std::string& input, LlmGateway& gateway,
                      const LlmOptions& options) {
  if (text::is_blank(input)) throw Error(ErrorCode::kInvalidArgument, "input text is empty");
  const PromptTemplate& tmpl = builtin_prompt(name);
  ChatRequest req{options.model_id, "", tmpl.render({{"report", input}}), options.temperature,
                  options.max_tokens};
  ChatResponse resp = gateway.chat(req);
  if (text::is_blank(resp.text)) {
    throw Error(ErrorCode::kEmptyGeneration, tmpl.id() + " returned a blank reply");
  }
  GenerationProvenance prov;
  prov.method = GenerationMethod::kLlm;
  prov.model_id = options.model_id;
  prov.prompt_version = tmpl.id();
  prov.timestamp = resp.recorded_at;
  return Generation{std::move(resp.text), std::move(prov)};
}

}  // namespace

Generation standardize(const ReportRecord& report, LlmGateway& gateway, const LlmOptions& options) {
  return run_prompt(PromptName::kStandardize, standardization_input(report), gateway, options);
}

Generation inject_errors_llm(std::string_view standardized, LlmGateway& gateway, const LlmOptions& options) {
  return run_prompt(PromptName::kInjectErrors, std::string(standardized), gateway, options);
}

// ---------------------------------------------------------------------------
// Rule-based perturbation

namespace {

using WordMap = std::vector<std::pair<std::string_view, std::string_view>>;

const WordMap kLocationSwaps{{"left", "right"}, {"right", "left"}, {"upper", "lower"}, {"lower", "upper"}};

const WordMap kPositionSwaps{{"proximal", "distal"}, {"distal", "proximal"},   {"above", "below"},
                             {"below", "above"},     {"superior", "inferior"}, {"inferior", "superior"},
                             {"medial", "lateral"},  {"lateral", "medial"}};

const WordMap kSeveritySwaps{{"mild", "moderate"},       {"moderate", "severe"},   {"severe", "mild"},
                             {"mildly", "moderately"},   {"moderately", "severely"},
                             {"severely", "mildly"},     {"small", "large"},       {"large", "small"}};

constexpr std::array<std::string_view, 17> kComparisonWords{
    "compared", "comparison", "prior",    "previous", "previously", "unchanged", "stable",
    "interval", "again",      "new",      "increased", "decreased", "improved",  "worsened",
    "since",    "persistent", "redemonstrated"};

constexpr std::array<std::string_view, 3> kComparisonTemplates{
    "This is new compared with the prior study.",
    "This has worsened since the previous radiograph.",
    "This is unchanged from the prior examination.",
};

bool is_word_char(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Calls fn(begin, length) for each run of ASCII letters.
template <typename Fn>
void for_each_word(std::string_view s, Fn&& fn) {
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_word_char(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_word_char(s[j])) ++j;
    fn(i, j - i);
    i = j;
  }
}

std::string match_case(std::string_view original, std::string_view replacement) {
  std::string out(replacement);
  bool all_upper = original.size() > 1 &&
                   std::all_of(original.begin(), original.end(), [](char c) { return std::isupper(static_cast<unsigned char>(c)); });
  if (all_upper) {
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  } else if (!original.empty() && std::isupper(static_cast<unsigned char>(original[0]))) {
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  }
  return out;
}

const std::string_view* lookup(const WordMap& map, std::string_view word) {
  const std::string w = lower(word);
  for (const auto& [from, to] : map) {
    if (from == w) return &to;
  }
  return nullptr;
}

bool has_word(std::string_view s, const WordMap& map) {
  bool found = false;
  for_each_word(s, [&](std::size_t b, std::size_t n) { found = found || lookup(map, s.substr(b, n)) != nullptr; });
  return found;
}

// All swaps happen in one pass, so left->right never turns back into left.
std::string swap_words(std::string_view s, const WordMap& map) {
  std::string out;
  std::size_t last = 0;
  for_each_word(s, [&](std::size_t b, std::size_t n) {
    if (const auto* to = lookup(map, s.substr(b, n))) {
      out.append(s.substr(last, b - last));
      out += match_case(s.substr(b, n), *to);
      last = b + n;
    }
  });
  out.append(s.substr(last));
  return out;
}

bool mentions_comparison(std::string_view s) {
  bool found = false;
  for_each_word(s, [&](std::size_t b, std::size_t n) {
    const std::string w = lower(s.substr(b, n));
    if (std::find(kComparisonWords.begin(), kComparisonWords.end(), w) != kComparisonWords.end()) found = true;
  });
  return found;
}

std::optional<std::size_t> ifind(std::string_view hay, std::string_view needle) {
  const std::string h = lower(hay);
  const std::string n = lower(needle);
  auto pos = h.find(n);
  if (pos == std::string::npos) return std::nullopt;
  return pos;
}

std::string splice(std::string_view s, std::size_t pos, std::size_t len, std::string_view with) {
  std::string out(s.substr(0, pos));
  out += with;
  out += s.substr(pos + len);
  return out;
}

// Presence <-> absence flip. Rules are tried in order; the first that
// applies wins.
std::optional<std::string> negate(std::string_view s) {
  // "No X." -> "X is present."
  if (s.size() > 3 && lower(s.substr(0, 3)) == "no " ) {
    std::string_view rest = text::trim(s.substr(3));
    char terminal = '.';
    if (!rest.empty() && (rest.back() == '.' || rest.back() == '!' || rest.back() == '?')) {
      terminal = rest.back();
      rest.remove_suffix(1);
    }
    rest = text::trim(rest);
    if (!rest.empty() && is_word_char(rest.front())) {
      std::string out(rest);
      out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
      out += " is present";
      out.push_back(terminal);
      return out;
    }
  }
  struct Rewrite {
    std::string_view from;
    std::string_view to;
  };
  static constexpr std::array<Rewrite, 8> kRewrites{{
      {"there is no ", "there is "},
      {"there are no ", "there are "},
      {" without ", " with "},
      {" is not ", " is "},
      {" are not ", " are "},
      {" is present", " is absent"},
      {" are present", " are absent"},
      {"there is ", "there is no "},
  }};
  for (const auto& r : kRewrites) {
    if (auto pos = ifind(s, r.from)) {
      std::string to(r.to);
      if (std::isupper(static_cast<unsigned char>(s[*pos]))) {
        to[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(to[0])));
      }
      return splice(s, *pos, r.from.size(), to);
    }
  }
  return std::nullopt;
}

bool is_header(std::string_view s) {
  if (s.empty() || s.back() == ':') return true;
  return std::none_of(s.begin(), s.end(), [](char c) { return is_word_char(c); });
}

bool is_specific(ErrorCategory c) {
  return c != ErrorCategory::kOmittedFinding && c != ErrorCategory::kFalseComparison;
}

bool is_deletion(ErrorCategory c) {
  return c == ErrorCategory::kOmittedFinding || c == ErrorCategory::kOmittedComparison;
}

std::string apply_rule(ErrorCategory c, std::string_view sentence, std::mt19937_64& rng) {
  switch (c) {
    case ErrorCategory::kFalseFinding: return *negate(sentence);
    case ErrorCategory::kWrongLocation: return swap_words(sentence, kLocationSwaps);
    case ErrorCategory::kWrongPosition: return swap_words(sentence, kPositionSwaps);
    case ErrorCategory::kWrongSeverity: return swap_words(sentence, kSeveritySwaps);
    case ErrorCategory::kOmittedFinding:
    case ErrorCategory::kOmittedComparison: return {};
    case ErrorCategory::kFalseComparison: {
      std::uniform_int_distribution<std::size_t> pick(0, kComparisonTemplates.size() - 1);
      return std::string(sentence) + " " + std::string(kComparisonTemplates[pick(rng)]);
    }
  }
  return std::string(sentence);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::vector<ErrorCategory> applicable_categories(std::string_view sentence) {
  std::vector<ErrorCategory> out;
  if (is_header(sentence)) return out;
  const bool comparison = mentions_comparison(sentence);
  if (negate(sentence)) out.push_back(ErrorCategory::kFalseFinding);
  if (!comparison) out.push_back(ErrorCategory::kOmittedFinding);
  if (has_word(sentence, kLocationSwaps)) out.push_back(ErrorCategory::kWrongLocation);
  if (has_word(sentence, kPositionSwaps)) out.push_back(ErrorCategory::kWrongPosition);
  if (has_word(sentence, kSeveritySwaps)) out.push_back(ErrorCategory::kWrongSeverity);
  if (!comparison) out.push_back(ErrorCategory::kFalseComparison);
  if (comparison) out.push_back(ErrorCategory::kOmittedComparison);
  return out;
}

std::size_t eligible_sentence_count(std::string_view text) {
  std::size_t n = 0;
  for (const auto& span : segment_sentences(text)) {
    if (!applicable_categories(span.in(text)).empty()) ++n;
  }
  return n;
}

DeterministicInjection inject_errors_deterministic(std::string_view standardized, std::size_t k,
                                                   std::uint64_t seed) {
  const auto spans = segment_sentences(standardized);
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (!applicable_categories(spans[i].in(standardized)).empty()) eligible.push_back(i);
  }
  if (eligible.size() < k) {
    throw Error(ErrorCode::kNotEnoughMaterial, "eligible sentences " + std::to_string(eligible.size()) +
                                                   ", requested " + std::to_string(k));
  }

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i + 1 < eligible.size(); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, eligible.size() - 1);
    std::swap(eligible[i], eligible[pick(rng)]);
  }

  std::vector<InjectedError> manifest;
  std::size_t deletions = 0;
  for (std::size_t n = 0; n < k; ++n) {
    const std::size_t idx = eligible[n];
    const std::string_view sentence = spans[idx].in(standardized);
    const auto all = applicable_categories(sentence);
    std::vector<ErrorCategory> cats;
    std::copy_if(all.begin(), all.end(), std::back_inserter(cats), is_specific);
    if (cats.empty()) cats = all;
    // At least one sentence must survive.
    if (deletions + 1 >= spans.size()) {
      std::erase_if(cats, is_deletion);
      if (cats.empty()) cats.push_back(ErrorCategory::kFalseComparison);
    }
    std::uniform_int_distribution<std::size_t> pick(0, cats.size() - 1);
    const ErrorCategory cat = cats[pick(rng)];
    if (is_deletion(cat)) ++deletions;
    manifest.push_back(InjectedError{cat, idx, std::string(sentence), apply_rule(cat, sentence, rng)});
  }
  std::sort(manifest.begin(), manifest.end(),
            [](const InjectedError& a, const InjectedError& b) { return a.sentence_index < b.sentence_index; });
  std::string candidate = apply_manifest(standardized, manifest);
  return DeterministicInjection{std::move(candidate), std::move(manifest)};
}

std::string apply_manifest(std::string_view standardized, std::span<const InjectedError> manifest) {
  const auto spans = segment_sentences(standardized);
  std::vector<const InjectedError*> edit(spans.size(), nullptr);
  for (const auto& e : manifest) {
    if (e.sentence_index >= spans.size()) {
      throw Error(ErrorCode::kInvalidArgument, "manifest sentence_index " + std::to_string(e.sentence_index) +
                                                   " out of range (" + std::to_string(spans.size()) + ")");
    }
    if (edit[e.sentence_index] != nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "manifest edits sentence " + std::to_string(e.sentence_index) + " twice");
    }
    if (spans[e.sentence_index].in(standardized) != e.before) {
      throw Error(ErrorCode::kInvalidArgument,
                  "manifest 'before' does not match sentence " + std::to_string(e.sentence_index));
    }
    edit[e.sentence_index] = &e;
  }
  if (spans.empty()) return std::string(standardized);

  std::string out(standardized.substr(0, spans.front().offset));
  std::optional<std::size_t> previous_kept;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const bool deleted = edit[i] != nullptr && edit[i]->after.empty();
    if (deleted) continue;
    if (previous_kept) {
      const std::size_t p = *previous_kept;
      out += standardized.substr(spans[p].end(), spans[p + 1].offset - spans[p].end());
    }
    out += edit[i] != nullptr ? std::string_view(edit[i]->after) : spans[i].in(standardized);
    previous_kept = i;
  }
  out += standardized.substr(spans.back().end());
  return out;
}

std::uint64_t report_seed(std::uint64_t run_seed, std::string_view report_id) {
  // splitmix64 finalizer over the mixed inputs
  std::uint64_t z = run_seed ^ fnv1a(report_id);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::size_t default_error_count(std::uint64_t run_seed, std::string_view report_id) {
  std::mt19937_64 rng(report_seed(run_seed, report_id) ^ 0x6b436f756e74ULL);
  std::uniform_int_distribution<std::size_t> pick(1, 4);
  return pick(rng);
}

}  // namespace rexamine
