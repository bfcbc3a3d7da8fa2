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

// Audit aggregation: per (metric, site) style-sensitivity t-tests with a
// Bonferroni threshold, per-style Spearman agreement with expert totals,
// cross-site summary rows, and the report emitters.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rexamine/metrics.hpp"
#include "rexamine/stats.hpp"
#include "rexamine/types.hpp"

namespace rexamine::audit {

struct AuditInput {
  std::map<std::string, SiteId> report_sites;  // every report under audit
  std::vector<MetricScore> scores;
  std::map<std::string, double> expert_totals;  // report -> expert score
};

enum class TestCount {
  kMetricsTimesSites,  // |metrics| x |sites|, the default
  kTestableCells,      // only cells where a t-test could be run
};

struct AuditConfig {
  double alpha = 0.05;
  TestCount test_count = TestCount::kMetricsTimesSites;
  std::optional<std::size_t> n_tests;  // fixed override, wins over test_count
};

enum class CellStatus {
  kTested,
  kNoStyleSensitivity,  // identical differences on every report (zero variance)
  kUntestable,          // too few reports
};

std::string_view to_string(CellStatus s);

struct AuditCell {
  MetricId metric = MetricId::bleu2();
  SiteId site;
  std::size_t n = 0;
  CellStatus status = CellStatus::kTested;
  std::optional<stats::TTestResult> ttest;
  bool significant = false;
  std::optional<double> rho_original;
  std::optional<double> rho_standardized;
  std::string note;  // reason for exclusions / missing correlations
};

struct MetricSummaryRow {
  MetricId metric = MetricId::bleu2();
  std::optional<double> mean_t;
  std::optional<double> min_t;
  std::optional<double> max_t;
  std::size_t significant_sites = 0;
  std::size_t tested_sites = 0;
  std::size_t total_sites = 0;
};

struct CorrelationCell {
  MetricId metric = MetricId::bleu2();
  SiteId site;
  PairStyle pair = PairStyle::kVsOriginal;
  std::optional<double> rho;
  std::string note;
};

struct AuditResult {
  double alpha = 0.05;
  std::size_t n_tests = 0;
  double threshold = 0.0;
  std::vector<AuditCell> cells;             // metric name, then site code
  std::vector<MetricSummaryRow> summaries;  // metric name
  std::vector<std::string> warnings;
  std::optional<stats::AgreementResult> agreement;  // inter-rater, when available
};

// Errors: MissingScores (report, metric, pair), MissingAnnotation (report).
AuditResult run_audit(const AuditInput& input, const AuditConfig& cfg = {});

// Cross-site rows per metric from tested cells only: mean/min/max t and the
// number of significant sites.
std::vector<MetricSummaryRow> summarize(const std::vector<AuditCell>& cells);

// Spearman rho of direction-standardized metric scores against expert
// totals for every (metric, site, pair style). An ideal metric gets +1.
std::vector<CorrelationCell> correlate_with_experts(const AuditInput& input);

enum class ReportFormat { kMarkdown, kCsv, kJson };

std::optional<ReportFormat> parse_report_format(std::string_view s);

// CSV headers, fixed.
inline constexpr std::string_view kCellsCsvHeader =
    "metric,site,status,n,t_stat,df,p_two_sided,mean_diff,significant,rho_original,rho_standardized,note";
inline constexpr std::string_view kSummaryCsvHeader =
    "metric,mean_t,min_t,max_t,significant_sites,tested_sites,total_sites";
inline constexpr std::string_view kCorrelationsCsvHeader = "metric,site,ground_truth,rho";

// Write the report into `out_dir`; returns the files written. Output is a
// pure function of `result`: rows ordered by metric name then site code, t
// and rho with 2 decimals, p in scientific notation. Throws IoError.
std::vector<std::filesystem::path> emit_report(const AuditResult& result, ReportFormat format,
                                               const std::filesystem::path& out_dir);

// Text of each emitted file, keyed by file name.
std::map<std::string, std::string> render_report(const AuditResult& result, ReportFormat format);

// Full-precision round trip for handing results between CLI stages.
nlohmann::json to_json(const AuditResult& result);
AuditResult audit_from_json(const nlohmann::json& j);

}  // namespace rexamine::audit
