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

#include <random>

#include "doctest.h"
#include "rexamine/audit.hpp"
#include "rexamine/io.hpp"
#include "support/check.hpp"
#include "support/support.hpp"

using namespace rexamine;
using namespace rexamine::audit;

namespace {

// Reports r<site>-<i> with expert totals cycling through 0..5 and metrics:
//   "oracle"    expert total on both pairings (style-blind)
//   "sensitive" oracle + noise, standardized pairing 0.5 lower
//   "inverse"   negated oracle
AuditInput synthetic_input(std::size_t sites, std::size_t per_site, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.1);
  AuditInput in;
  for (std::size_t s = 0; s < sites; ++s) {
    for (std::size_t i = 0; i < per_site; ++i) {
      std::string id = testing::site_code(s) + "-" + std::to_string(i);
      double total = static_cast<double>((i * 7 + s) % 6);
      in.report_sites.emplace(id, SiteId(testing::site_code(s)));
      in.expert_totals[id] = total;
      for (PairStyle p : {PairStyle::kVsOriginal, PairStyle::kVsStandardized}) {
        in.scores.push_back(make_score(MetricId::external("oracle"), id, p, total, false));
        in.scores.push_back(make_score(MetricId::external("inverse"), id, p, total, true));
      }
      double base = total + noise(rng);
      in.scores.push_back(make_score(MetricId::external("sensitive"), id, PairStyle::kVsOriginal, base, false));
      in.scores.push_back(
          make_score(MetricId::external("sensitive"), id, PairStyle::kVsStandardized, base - 0.5 + noise(rng), false));
    }
  }
  return in;
}

AuditCell tested_cell(const char* metric, const char* site, double t) {
  AuditCell c;
  c.metric = MetricId::external(metric);
  c.site = SiteId(site);
  c.n = 10;
  c.ttest = stats::TTestResult{t, 9, 0.01, -0.5, 10};
  return c;
}

}  // namespace

TEST_SUITE("audit") {
  TEST_CASE("one cell per metric and site") {
    auto r = run_audit(synthetic_input(6, 20, 1));
    CHECK(r.cells.size() == 3 * 6);
    CHECK(r.n_tests == 18);
    CHECK(r.threshold == 0.05 / 18);
    CHECK(r.summaries.size() == 3);
    for (std::size_t i = 1; i < r.cells.size(); ++i) {
      const auto& a = r.cells[i - 1];
      const auto& b = r.cells[i];
      CHECK((a.metric < b.metric || (a.metric == b.metric && a.site < b.site)));
    }
  }

  TEST_CASE("style-blind metric yields untestable cells with a reason") {
    auto r = run_audit(synthetic_input(6, 20, 2));
    std::size_t flagged = 0;
    for (const auto& c : r.cells) {
      if (c.metric.name() == "oracle" || c.metric.name() == "inverse") {
        CHECK(c.status == CellStatus::kNoStyleSensitivity);
        CHECK_FALSE(c.ttest.has_value());
        CHECK_FALSE(c.significant);
        CHECK(c.note.find("no detectable style sensitivity") != std::string::npos);
        ++flagged;
      }
    }
    CHECK(flagged == 12);
    CHECK(r.warnings.size() == 12);
    for (const auto& s : r.summaries) {
      if (s.metric.name() == "oracle") {
        CHECK(s.tested_sites == 0);
        CHECK_FALSE(s.mean_t.has_value());
        CHECK(s.significant_sites == 0);
      }
    }
  }

  TEST_CASE("style-sensitive metric is significant everywhere with t < 0") {
    auto r = run_audit(synthetic_input(6, 20, 3));
    for (const auto& c : r.cells) {
      if (c.metric.name() != "sensitive") continue;
      REQUIRE(c.ttest.has_value());
      CHECK(c.ttest->t_stat < 0);
      CHECK(c.significant);
    }
    auto row = std::find_if(r.summaries.begin(), r.summaries.end(),
                            [](const MetricSummaryRow& s) { return s.metric.name() == "sensitive"; });
    CHECK(row->significant_sites == 6);
    CHECK(*row->min_t <= *row->mean_t);
    CHECK(*row->mean_t <= *row->max_t);
  }

  TEST_CASE("significance flag matches the threshold") {
    auto in = synthetic_input(3, 8, 4);
    for (double alpha : {0.05, 1e-6, 0.5}) {
      AuditConfig cfg;
      cfg.alpha = alpha;
      auto r = run_audit(in, cfg);
      for (const auto& c : r.cells) {
        CHECK(c.significant == (c.ttest && c.ttest->p_two_sided < r.threshold));
      }
    }
  }

  TEST_CASE("expert agreement per pairing") {
    auto r = run_audit(synthetic_input(6, 20, 5));
    for (const auto& c : r.cells) {
      REQUIRE(c.rho_original.has_value());
      REQUIRE(c.rho_standardized.has_value());
      if (c.metric.name() == "oracle") {
        CHECK(*c.rho_original == 1.0);
        CHECK(*c.rho_standardized == 1.0);
      }
      if (c.metric.name() == "inverse") CHECK(*c.rho_original == -1.0);
    }
    auto corr = correlate_with_experts(synthetic_input(6, 20, 5));
    CHECK(corr.size() == 3 * 6 * 2);
    for (const auto& c : corr) {
      if (c.metric.name() == "oracle") CHECK(c.rho == 1.0);
    }
  }

  TEST_CASE("test count options") {
    AuditInput in = synthetic_input(6, 10, 6);
    CHECK(run_audit(in).n_tests == 18);
    AuditConfig testable;
    testable.test_count = TestCount::kTestableCells;
    CHECK(run_audit(in, testable).n_tests == 6);
    AuditConfig fixed;
    fixed.n_tests = 42;
    auto r = run_audit(in, fixed);
    CHECK(r.n_tests == 42);
    CHECK(r.threshold == 0.05 / 42);
  }

  TEST_CASE("missing inputs") {
    auto in = synthetic_input(2, 5, 7);
    auto no_expert = in;
    no_expert.expert_totals.erase(no_expert.expert_totals.begin());
    REX_CHECK_ERROR(run_audit(no_expert), ErrorCode::kMissingAnnotation);
    auto no_score = in;
    no_score.scores.pop_back();
    REX_CHECK_ERROR(run_audit(no_score), ErrorCode::kMissingScores);
    auto empty = in;
    empty.scores.clear();
    REX_CHECK_ERROR(run_audit(empty), ErrorCode::kMissingScores);
  }

  TEST_CASE("single-report sites are untestable") {
    AuditInput in;
    in.report_sites.emplace("a", SiteId("US"));
    in.expert_totals["a"] = 1;
    in.scores.push_back(make_score(MetricId::bleu2(), "a", PairStyle::kVsOriginal, 0.3, true));
    in.scores.push_back(make_score(MetricId::bleu2(), "a", PairStyle::kVsStandardized, 0.5, true));
    auto r = run_audit(in);
    REQUIRE(r.cells.size() == 1);
    CHECK(r.cells[0].status == CellStatus::kUntestable);
    CHECK_FALSE(r.cells[0].note.empty());
    CHECK_FALSE(r.cells[0].rho_original.has_value());
  }

  TEST_CASE("summary aggregation") {
    std::vector<AuditCell> cells{tested_cell("m", "A", -2.0), tested_cell("m", "B", -3.0), tested_cell("m", "C", -4.0)};
    cells[0].significant = true;
    auto rows = summarize(cells);
    REQUIRE(rows.size() == 1);
    CHECK(*rows[0].mean_t == -3.0);
    CHECK(*rows[0].min_t == -4.0);
    CHECK(*rows[0].max_t == -2.0);
    CHECK(rows[0].significant_sites == 1);
    AuditResult r;
    r.cells = cells;
    r.summaries = rows;
    r.n_tests = 3;
    r.threshold = 0.05 / 3;
    auto csv = render_report(r, ReportFormat::kCsv).at("summary.csv");
    CHECK(csv == std::string(kSummaryCsvHeader) + "\nm,-3.00,-4.00,-2.00,1,3,3\n");
  }

  TEST_CASE("reports are deterministic and round-trip") {
    auto r = run_audit(synthetic_input(6, 12, 8));
    r.agreement = stats::AgreementResult{0.8, {0.9, 10}};
    for (auto fmt : {ReportFormat::kMarkdown, ReportFormat::kCsv, ReportFormat::kJson}) {
      CHECK(render_report(r, fmt) == render_report(r, fmt));
      auto back = audit_from_json(to_json(r));
      CHECK(render_report(back, fmt) == render_report(r, fmt));
    }
    auto csv = render_report(r, ReportFormat::kCsv);
    CHECK(csv.at("cells.csv").rfind(std::string(kCellsCsvHeader) + "\n", 0) == 0);
    CHECK(csv.at("correlations.csv").rfind(std::string(kCorrelationsCsvHeader) + "\n", 0) == 0);
    auto md = render_report(r, ReportFormat::kMarkdown).at("audit.md");
    CHECK(md.find("| Metric | Mean t-stat | Min t-stat | Max t-stat | Significant sites |") != std::string::npos);
    CHECK(md.find("no detectable style sensitivity") != std::string::npos);
    CHECK(md.find("e-") != std::string::npos);

    testing::TempDir dir;
    auto files = emit_report(r, ReportFormat::kCsv, dir / "out");
    CHECK(files.size() == 3);
    CHECK(io::read_file(dir / "out" / "summary.csv") == csv.at("summary.csv"));
    io::write_file_atomic(dir / "blocker", "x");
    REX_CHECK_ERROR(emit_report(r, ReportFormat::kMarkdown, dir / "blocker" / "sub"), ErrorCode::kIoError);
    CHECK(parse_report_format("md") == ReportFormat::kMarkdown);
  }
}
