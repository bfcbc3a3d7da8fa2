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

#include "rexamine/audit.hpp"


#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "rexamine/error.hpp"
#include "rexamine/io.hpp"

namespace rexamine::audit {
namespace {

using nlohmann::json;

constexpr std::string_view kNoSensitivity = "no detectable style sensitivity";

struct ScoreTable {
  // metric -> report -> [vs_original, vs_standardized]
  std::map<MetricId, std::map<std::string, std::array<std::optional<double>, 2>>> by_metric;
};

std::size_t slot(PairStyle p) { return p == PairStyle::kVsOriginal ? 0 : 1; }

ScoreTable tabulate(const AuditInput& input) {
  ScoreTable t;
  for (const auto& s : input.scores) {
    if (!input.report_sites.contains(s.report_id)) continue;
    t.by_metric[s.metric][s.report_id][slot(s.pair)] = s.standardized_direction;
  }
  return t;
}

std::vector<SiteId> sites_of(const AuditInput& input) {
  std::set<SiteId> sites;
  for (const auto& [id, site] : input.report_sites) sites.insert(site);
  return {sites.begin(), sites.end()};
}

std::vector<std::string> reports_at(const AuditInput& input, const SiteId& site) {
  std::vector<std::string> out;
  for (const auto& [id, s] : input.report_sites) {
    if (s == site) out.push_back(id);
  }
  return out;
}

void check_complete(const AuditInput& input, const ScoreTable& table) {
  if (input.report_sites.empty()) throw Error(ErrorCode::kEmptyCorpus, "no reports to audit");
  for (const auto& [id, site] : input.report_sites) {
    if (!input.expert_totals.contains(id)) throw Error(ErrorCode::kMissingAnnotation, "report " + id);
  }
  for (const auto& [metric, rows] : table.by_metric) {
    for (const auto& [id, site] : input.report_sites) {
      auto it = rows.find(id);
      for (PairStyle p : {PairStyle::kVsOriginal, PairStyle::kVsStandardized}) {
        if (it == rows.end() || !it->second[slot(p)]) {
          throw Error(ErrorCode::kMissingScores,
                      "report " + id + ", metric " + metric.name() + ", pair " + std::string(to_string(p)));
        }
      }
    }
  }
}

struct Columns {
  std::vector<double> original, standardized, expert;
};

Columns columns(const AuditInput& input, const ScoreTable& table, const MetricId& metric, const SiteId& site) {
  Columns c;
  const auto& rows = table.by_metric.at(metric);
  for (const auto& id : reports_at(input, site)) {
    const auto& r = rows.at(id);
    c.original.push_back(*r[0]);
    c.standardized.push_back(*r[1]);
    c.expert.push_back(input.expert_totals.at(id));
  }
  return c;
}

std::optional<double> try_rho(std::span<const double> x, std::span<const double> y, std::string& note,
                              std::string_view label) {
  try {
    return stats::spearman_rho(x, y).rho;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kConstantInput && e.code() != ErrorCode::kTooFewSamples) throw;
    if (!note.empty()) note += "; ";
    note += "rho " + std::string(label) + " undefined (" + std::string(to_string(e.code())) + ")";
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// formatting

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string opt2(const std::optional<double>& v) { return v ? fixed2(*v) : ""; }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string md_cell(const std::optional<double>& v) { return v ? fixed2(*v) : "n/a"; }

std::string render_markdown(const AuditResult& r) {
  std::set<SiteId> site_set;
  for (const auto& c : r.cells) site_set.insert(c.site);
  std::vector<SiteId> sites(site_set.begin(), site_set.end());

  std::ostringstream o;
  o << "# Style-sensitivity audit\n\n";
  o << "Paired t-tests on direction-standardized scores (higher = worse), d = standardized pair - original pair. "
       "Negative t means the standardized pairing scored lower.\n\n";
  o << "- alpha: " << fixed2(r.alpha) << "\n";
  o << "- tests: " << r.n_tests << "\n";
  o << "- Bonferroni threshold: " << sci(r.threshold) << "\n\n";

  o << "## Summary\n\n";
  o << "| Metric | Mean t-stat | Min t-stat | Max t-stat | Significant sites |\n";
  o << "|---|---|---|---|---|\n";
  for (const auto& s : r.summaries) {
    o << "| " << s.metric.name() << " | " << md_cell(s.mean_t) << " | " << md_cell(s.min_t) << " | "
      << md_cell(s.max_t) << " | " << s.significant_sites << "/" << s.total_sites << " |\n";
  }

  o << "\n## Per-site t-tests\n\n";
  o << "| Metric | Site | n | t | df | p | Significant |\n";
  o << "|---|---|---|---|---|---|---|\n";
  for (const auto& c : r.cells) {
    o << "| " << c.metric.name() << " | " << c.site.code() << " | " << c.n << " | ";
    if (c.ttest) {
      o << fixed2(c.ttest->t_stat) << " | " << fixed2(c.ttest->df) << " | " << sci(c.ttest->p_two_sided) << " | "
        << (c.significant ? "yes" : "no") << " |\n";
    } else {
      o << "- | - | - | " << (c.status == CellStatus::kNoStyleSensitivity ? kNoSensitivity : c.note) << " |\n";
    }
  }

  o << "\n## Agreement with expert scores (Spearman rho)\n\n";
  o << "| Metric | Ground truth |";
  for (const auto& s : sites) o << " " << s.code() << " |";
  o << "\n|---|---|";
  for (std::size_t i = 0; i < sites.size(); ++i) o << "---|";
  o << "\n";
  std::set<MetricId> metrics;
  for (const auto& c : r.cells) metrics.insert(c.metric);
  for (const auto& m : metrics) {
    for (int style = 0; style < 2; ++style) {
      o << "| " << m.name() << " | " << (style == 0 ? "Original" : "Standardized") << " |";
      for (const auto& s : sites) {
        auto it = std::find_if(r.cells.begin(), r.cells.end(),
                               [&](const AuditCell& c) { return c.metric == m && c.site == s; });
        std::optional<double> v;
        if (it != r.cells.end()) v = style == 0 ? it->rho_original : it->rho_standardized;
        o << " " << md_cell(v) << " |";
      }
      o << "\n";
    }
  }

  if (r.agreement) {
    o << "\n## Inter-rater agreement (overlap set)\n\n";
    o << "- exact match rate: " << fixed2(r.agreement->exact_match_rate) << "\n";
    o << "- Spearman rho: " << fixed2(r.agreement->spearman.rho) << " (n = " << r.agreement->spearman.n << ")\n";
  }

  if (!r.warnings.empty()) {
    o << "\n## Notes\n\n";
    for (const auto& w : r.warnings) o << "- " << w << "\n";
  }
  return o.str();
}

std::string render_cells_csv(const AuditResult& r) {
  std::ostringstream o;
  o << kCellsCsvHeader << "\n";
  for (const auto& c : r.cells) {
    o << csv_field(c.metric.name()) << "," << csv_field(c.site.code()) << "," << to_string(c.status) << "," << c.n
      << ",";
    if (c.ttest) {
      o << fixed2(c.ttest->t_stat) << "," << fixed2(c.ttest->df) << "," << sci(c.ttest->p_two_sided) << ","
        << fixed2(c.ttest->mean_diff) << ",";
    } else {
      o << ",,,,";
    }
    o << (c.significant ? "true" : "false") << "," << opt2(c.rho_original) << "," << opt2(c.rho_standardized) << ","
      << csv_field(c.note) << "\n";
  }
  return o.str();
}

std::string render_summary_csv(const AuditResult& r) {
  std::ostringstream o;
  o << kSummaryCsvHeader << "\n";
  for (const auto& s : r.summaries) {
    o << csv_field(s.metric.name()) << "," << opt2(s.mean_t) << "," << opt2(s.min_t) << "," << opt2(s.max_t) << ","
      << s.significant_sites << "," << s.tested_sites << "," << s.total_sites << "\n";
  }
  return o.str();
}

std::string render_correlations_csv(const AuditResult& r) {
  std::ostringstream o;
  o << kCorrelationsCsvHeader << "\n";
  for (const auto& c : r.cells) {
    o << csv_field(c.metric.name()) << "," << csv_field(c.site.code()) << ",original," << opt2(c.rho_original)
      << "\n";
    o << csv_field(c.metric.name()) << "," << csv_field(c.site.code()) << ",standardized,"
      << opt2(c.rho_standardized) << "\n";
  }
  return o.str();
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::optional<CellStatus> parse_status(std::string_view s) {
  if (s == "tested") return CellStatus::kTested;
  if (s == "no_style_sensitivity") return CellStatus::kNoStyleSensitivity;
  if (s == "untestable") return CellStatus::kUntestable;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(CellStatus s) {
  switch (s) {
    case CellStatus::kTested: return "tested";
    case CellStatus::kNoStyleSensitivity: return "no_style_sensitivity";
    case CellStatus::kUntestable: return "untestable";
  }
  return "?";
}

std::vector<CorrelationCell> correlate_with_experts(const AuditInput& input) {
  ScoreTable table = tabulate(input);
  check_complete(input, table);
  std::vector<CorrelationCell> out;
  for (const auto& [metric, rows] : table.by_metric) {
    for (const auto& site : sites_of(input)) {
      Columns c = columns(input, table, metric, site);
      for (PairStyle p : {PairStyle::kVsOriginal, PairStyle::kVsStandardized}) {
        CorrelationCell cell{metric, site, p, std::nullopt, {}};
        const auto& xs = p == PairStyle::kVsOriginal ? c.original : c.standardized;
        cell.rho = try_rho(xs, c.expert, cell.note, to_string(p));
        out.push_back(std::move(cell));
      }
    }
  }
  return out;
}

std::vector<MetricSummaryRow> summarize(const std::vector<AuditCell>& cells) {
  std::map<MetricId, MetricSummaryRow> rows;
  std::map<MetricId, double> sums;
  for (const auto& cell : cells) {
    auto& row = rows.try_emplace(cell.metric).first->second;
    row.metric = cell.metric;
    ++row.total_sites;
    if (!cell.ttest) continue;
    double t = cell.ttest->t_stat;
    row.min_t = row.min_t ? std::min(*row.min_t, t) : t;
    row.max_t = row.max_t ? std::max(*row.max_t, t) : t;
    sums[cell.metric] += t;
    ++row.tested_sites;
    if (cell.significant) ++row.significant_sites;
  }
  std::vector<MetricSummaryRow> out;
  for (auto& [metric, row] : rows) {
    if (row.tested_sites > 0) {
      double mean = sums[metric] / static_cast<double>(row.tested_sites);
      row.mean_t = std::clamp(mean, *row.min_t, *row.max_t);
    }
    out.push_back(std::move(row));
  }
  return out;
}

AuditResult run_audit(const AuditInput& input, const AuditConfig& cfg) {
  ScoreTable table = tabulate(input);
  check_complete(input, table);
  if (table.by_metric.empty()) throw Error(ErrorCode::kMissingScores, "no metric scores supplied");
  const auto sites = sites_of(input);

  AuditResult result;
  result.alpha = cfg.alpha;

  for (const auto& [metric, rows] : table.by_metric) {
    for (const auto& site : sites) {
      Columns c = columns(input, table, metric, site);
      AuditCell cell;
      cell.metric = metric;
      cell.site = site;
      cell.n = c.original.size();
      try {
        cell.ttest = stats::paired_t_test(c.original, c.standardized);
        cell.status = CellStatus::kTested;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kZeroVariance) {
          cell.status = CellStatus::kNoStyleSensitivity;
          cell.note = std::string(kNoSensitivity);
        } else if (e.code() == ErrorCode::kTooFewSamples) {
          cell.status = CellStatus::kUntestable;
          cell.note = "too few reports for a t-test";
        } else {
          throw;
        }
        result.warnings.push_back(metric.name() + " at " + site.code() + ": " + cell.note +
                                  "; excluded from the summary");
      }
      std::string rho_note;
      cell.rho_original = try_rho(c.original, c.expert, rho_note, "original");
      cell.rho_standardized = try_rho(c.standardized, c.expert, rho_note, "standardized");
      if (!rho_note.empty()) cell.note = cell.note.empty() ? rho_note : cell.note + "; " + rho_note;
      result.cells.push_back(std::move(cell));
    }
  }

  std::size_t testable = static_cast<std::size_t>(
      std::count_if(result.cells.begin(), result.cells.end(), [](const AuditCell& c) { return c.ttest.has_value(); }));
  if (cfg.n_tests) {
    result.n_tests = *cfg.n_tests;
  } else if (cfg.test_count == TestCount::kTestableCells) {
    result.n_tests = std::max<std::size_t>(testable, 1);
  } else {
    result.n_tests = table.by_metric.size() * sites.size();
  }
  stats::SignificanceConfig sig{cfg.alpha, result.n_tests};
  result.threshold = stats::bonferroni_threshold(sig);

  for (auto& cell : result.cells) {
    cell.significant = cell.ttest && cell.ttest->p_two_sided < result.threshold;
  }

  result.summaries = summarize(result.cells);
  return result;
}

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "markdown" || s == "md") return ReportFormat::kMarkdown;
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "json") return ReportFormat::kJson;
  return std::nullopt;
}

std::map<std::string, std::string> render_report(const AuditResult& result, ReportFormat format) {
  switch (format) {
    case ReportFormat::kMarkdown: return {{"audit.md", render_markdown(result)}};
    case ReportFormat::kCsv:
      return {{"cells.csv", render_cells_csv(result)},
              {"summary.csv", render_summary_csv(result)},
              {"correlations.csv", render_correlations_csv(result)}};
    case ReportFormat::kJson: return {{"audit.json", to_json(result).dump(2) + "\n"}};
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown report format");
}

std::vector<std::filesystem::path> emit_report(const AuditResult& result, ReportFormat format,
                                               const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto& [name, text] : render_report(result, format)) {
    auto path = out_dir / name;
    io::write_file_atomic(path, text);
    written.push_back(path);
  }
  return written;
}

json to_json(const AuditResult& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    json jc{{"metric", c.metric.wire()},
            {"site", c.site.code()},
            {"n", c.n},
            {"status", std::string(to_string(c.status))},
            {"significant", c.significant},
            {"rho_original", opt_json(c.rho_original)},
            {"rho_standardized", opt_json(c.rho_standardized)},
            {"note", c.note}};
    if (c.ttest) {
      jc["ttest"] = json{{"t_stat", c.ttest->t_stat},
                         {"df", c.ttest->df},
                         {"p_two_sided", c.ttest->p_two_sided},
                         {"mean_diff", c.ttest->mean_diff},
                         {"n", c.ttest->n}};
    } else {
      jc["ttest"] = nullptr;
    }
    cells.push_back(std::move(jc));
  }
  json summaries = json::array();
  for (const auto& s : r.summaries) {
    summaries.push_back(json{{"metric", s.metric.wire()},
                             {"mean_t", opt_json(s.mean_t)},
                             {"min_t", opt_json(s.min_t)},
                             {"max_t", opt_json(s.max_t)},
                             {"significant_sites", s.significant_sites},
                             {"tested_sites", s.tested_sites},
                             {"total_sites", s.total_sites}});
  }
  json j{{"alpha", r.alpha},
         {"n_tests", r.n_tests},
         {"threshold", r.threshold},
         {"cells", std::move(cells)},
         {"summaries", std::move(summaries)},
         {"warnings", r.warnings}};
  if (r.agreement) {
    j["agreement"] = json{{"exact_match_rate", r.agreement->exact_match_rate},
                          {"spearman_rho", r.agreement->spearman.rho},
                          {"n", r.agreement->spearman.n}};
  }
  return j;
}

AuditResult audit_from_json(const json& j) {
  try {
    AuditResult r;
    r.alpha = j.at("alpha").get<double>();
    r.n_tests = j.at("n_tests").get<std::size_t>();
    r.threshold = j.at("threshold").get<double>();
    for (const auto& jc : j.at("cells")) {
      AuditCell c;
      c.metric = MetricId::parse(jc.at("metric").get<std::string>());
      c.site = SiteId(jc.at("site").get<std::string>());
      c.n = jc.at("n").get<std::size_t>();
      auto status = parse_status(jc.at("status").get<std::string>());
      if (!status) throw Error(ErrorCode::kParseError, "bad cell status");
      c.status = *status;
      c.significant = jc.at("significant").get<bool>();
      c.rho_original = opt_from(jc, "rho_original");
      c.rho_standardized = opt_from(jc, "rho_standardized");
      c.note = jc.at("note").get<std::string>();
      if (!jc.at("ttest").is_null()) {
        const auto& t = jc.at("ttest");
        c.ttest = stats::TTestResult{t.at("t_stat").get<double>(), t.at("df").get<double>(),
                                     t.at("p_two_sided").get<double>(), t.at("mean_diff").get<double>(),
                                     t.at("n").get<std::size_t>()};
      }
      r.cells.push_back(std::move(c));
    }
    for (const auto& js : j.at("summaries")) {
      MetricSummaryRow s;
      s.metric = MetricId::parse(js.at("metric").get<std::string>());
      s.mean_t = opt_from(js, "mean_t");
      s.min_t = opt_from(js, "min_t");
      s.max_t = opt_from(js, "max_t");
      s.significant_sites = js.at("significant_sites").get<std::size_t>();
      s.tested_sites = js.at("tested_sites").get<std::size_t>();
      s.total_sites = js.at("total_sites").get<std::size_t>();
      r.summaries.push_back(std::move(s));
    }
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (j.contains("agreement")) {
      const auto& a = j.at("agreement");
      r.agreement = stats::AgreementResult{a.at("exact_match_rate").get<double>(),
                                           {a.at("spearman_rho").get<double>(), a.at("n").get<std::size_t>()}};
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("audit json: ") + e.what());
  }
}

}  // namespace rexamine::audit
