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

// Stage drivers shared by the CLI and the integration tests: standardize,
// inject errors, score both pair styles, and assemble the audit input.
// Each stage works per report on a bounded pool of worker threads; output
// order never depends on scheduling.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rexamine/adapter.hpp"
#include "rexamine/annotate.hpp"
#include "rexamine/audit.hpp"
#include "rexamine/corpus.hpp"
#include "rexamine/gateway.hpp"
#include "rexamine/metrics.hpp"
#include "rexamine/perturb.hpp"

namespace rexamine::pipeline {

// Run fn(0..n-1) on up to `jobs` threads. The first exception (lowest
// index) is rethrown after every worker has stopped.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

struct StandardizedReport {
  std::string report_id;
  Generation generation;

  bool operator==(const StandardizedReport&) const = default;
};

// Ordered as `reports`.
std::vector<StandardizedReport> standardize_all(const std::vector<ReportRecord>& reports, LlmGateway& gateway,
                                                const LlmOptions& options, std::size_t jobs);

void write_standardized(const std::filesystem::path& path, const std::vector<StandardizedReport>& rows);
std::vector<StandardizedReport> read_standardized(const std::filesystem::path& path);

enum class InjectionMethod { kLlm, kDeterministic };

std::optional<InjectionMethod> parse_injection_method(std::string_view s);

inline constexpr std::string_view kRulesVersion = "rules.v1";

struct PerturbOptions {
  InjectionMethod method = InjectionMethod::kDeterministic;
  LlmOptions llm;
  std::uint64_t seed = 0;
  // Deterministic only: errors per report. Unset draws 1..4 per report;
  // either way the count is capped by the eligible sentences.
  std::optional<std::size_t> errors_per_report;
  std::size_t jobs = 4;
};

// One bundle per standardized report, ordered by report id. `gateway` may
// be null for the deterministic method.
std::vector<CandidateBundle> perturb_all(const std::vector<StandardizedReport>& standardized,
                                         const PerturbOptions& options, LlmGateway* gateway);

struct ScoreOptions {
  std::vector<MetricId> metrics;       // native metrics
  std::vector<AdapterConfig> adapters;  // external metrics
  LlmOptions judge;
  std::size_t jobs = 4;
};

// Text a candidate is compared against in the vs_original pairing: the
// same section text the standardizer was given.
std::string original_reference(const ReportRecord& report);

// Both pair styles for every bundle and metric, sorted by (metric, report,
// pair). `gateway` may be null when no metric needs it.
std::vector<MetricScore> score_all(const Corpus& corpus, const std::vector<CandidateBundle>& bundles,
                                   const ScoreOptions& options, LlmGateway* gateway);

void write_scores(const std::filesystem::path& path, const std::vector<MetricScore>& scores);
std::vector<MetricScore> read_scores(const std::filesystem::path& path);

// Export table rebuilt from an annotation ledger file (latest submission
// per report and reviewer). Throws ParseError, UnknownReport.
annotate::ExportTable table_from_ledger(const std::filesystem::path& ledger, const Corpus& corpus);

// Mean total per report over the exported rows.
std::map<std::string, double> expert_totals(const annotate::ExportTable& table);

// Agreement over reports with exactly two reviewer rows; nullopt when fewer
// than two such reports exist or the totals are constant.
std::optional<stats::AgreementResult> overlap_agreement(const annotate::ExportTable& table);

// Audit input over every bundled report.
audit::AuditInput audit_input(const Corpus& corpus, const std::vector<CandidateBundle>& bundles,
                              std::vector<MetricScore> scores, std::map<std::string, double> expert_totals);

}  // namespace rexamine::pipeline
