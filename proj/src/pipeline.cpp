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

#include "rexamine/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "rexamine/error.hpp"
#include "rexamine/io.hpp"
#include "rexamine/serialize.hpp"
#include "rexamine/text.hpp"

namespace rexamine::pipeline {
namespace {

using nlohmann::json;

template <typename T, typename F>
std::vector<T> read_jsonl(const std::filesystem::path& path, F&& parse) {
  std::istringstream in(io::read_file(path));
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

template <typename T, typename F>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& rows, F&& render) {
  std::string out;
  for (const auto& r : rows) {
    out += render(r).dump();
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

}  // namespace

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

std::vector<StandardizedReport> standardize_all(const std::vector<ReportRecord>& reports, LlmGateway& gateway,
                                                const LlmOptions& options, std::size_t jobs) {
  std::vector<StandardizedReport> out(reports.size());
  parallel_for(reports.size(), jobs, [&](std::size_t i) {
    out[i] = StandardizedReport{reports[i].report_id, standardize(reports[i], gateway, options)};
  });
  return out;
}

void write_standardized(const std::filesystem::path& path, const std::vector<StandardizedReport>& rows) {
  write_jsonl(path, rows, [](const StandardizedReport& r) {
    json prov;
    to_json(prov, r.generation.provenance);
    return json{{"report_id", r.report_id}, {"text", r.generation.text}, {"provenance", prov}};
  });
}

std::vector<StandardizedReport> read_standardized(const std::filesystem::path& path) {
  return read_jsonl<StandardizedReport>(path, [](const json& j) {
    return StandardizedReport{j.at("report_id").get<std::string>(),
                              Generation{j.at("text").get<std::string>(), provenance_from_json(j.at("provenance"))}};
  });
}

std::optional<InjectionMethod> parse_injection_method(std::string_view s) {
  if (s == "llm") return InjectionMethod::kLlm;
  if (s == "deterministic") return InjectionMethod::kDeterministic;
  return std::nullopt;
}

std::vector<CandidateBundle> perturb_all(const std::vector<StandardizedReport>& standardized,
                                         const PerturbOptions& options, LlmGateway* gateway) {
  if (options.method == InjectionMethod::kLlm && gateway == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "LLM injection needs a gateway");
  }
  std::vector<CandidateBundle> out(standardized.size());
  parallel_for(standardized.size(), options.jobs, [&](std::size_t i) {
    const auto& s = standardized[i];
    CandidateBundle b;
    b.report_id = s.report_id;
    b.standardized_text = s.generation.text;
    if (options.method == InjectionMethod::kLlm) {
      Generation g = inject_errors_llm(s.generation.text, *gateway, options.llm);
      b.candidate_text = std::move(g.text);
      b.provenance = std::move(g.provenance);
    } else {
      std::size_t eligible = eligible_sentence_count(s.generation.text);
      std::size_t want = options.errors_per_report.value_or(default_error_count(options.seed, s.report_id));
      std::size_t k = std::min(want, eligible);
      if (k == 0) throw Error(ErrorCode::kNotEnoughMaterial, s.report_id + " has no editable sentence");
      if (k < want) spdlog::debug("{}: {} errors requested, {} eligible sentences", s.report_id, want, eligible);
      std::uint64_t seed = report_seed(options.seed, s.report_id);
      auto inj = inject_errors_deterministic(s.generation.text, k, seed);
      b.candidate_text = std::move(inj.candidate);
      b.manifest = std::move(inj.manifest);
      b.provenance.method = GenerationMethod::kDeterministic;
      b.provenance.prompt_version = std::string(kRulesVersion);
      b.provenance.seed = seed;
      b.provenance.timestamp = UtcInstant::reproducible_now();
    }
    validate(b);
    out[i] = std::move(b);
  });
  std::sort(out.begin(), out.end(),
            [](const CandidateBundle& a, const CandidateBundle& b) { return a.report_id < b.report_id; });
  return out;
}

std::string original_reference(const ReportRecord& report) { return standardization_input(report); }

std::vector<MetricScore> score_all(const Corpus& corpus, const std::vector<CandidateBundle>& bundles,
                                   const ScoreOptions& options, LlmGateway* gateway) {
  for (const auto& m : options.metrics) {
    if (m.kind() == MetricKind::kExternal) {
      throw Error(ErrorCode::kInvalidArgument, "external metric " + m.name() + " must be given as an adapter");
    }
    if ((m.kind() == MetricKind::kEmbedCosine || m.kind() == MetricKind::kLlmJudge) && gateway == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, m.name() + " needs a gateway");
    }
  }

  std::vector<std::string> originals;
  originals.reserve(bundles.size());
  for (const auto& b : bundles) originals.push_back(original_reference(corpus.at(b.report_id)));

  std::vector<MetricScore> out;
  std::mutex mu;
  for (const auto& metric : options.metrics) {
    bool higher_better = native_higher_better(metric.kind());
    parallel_for(bundles.size(), options.jobs, [&](std::size_t i) {
      const auto& b = bundles[i];
      std::vector<MetricScore> local;
      for (PairStyle pair : {PairStyle::kVsOriginal, PairStyle::kVsStandardized}) {
        const std::string& ref = pair == PairStyle::kVsOriginal ? originals[i] : b.standardized_text;
        double raw = 0.0;
        switch (metric.kind()) {
          case MetricKind::kBleu2: raw = bleu2(b.candidate_text, ref); break;
          case MetricKind::kEmbedCosine: raw = embed_cosine(b.candidate_text, ref, *gateway); break;
          case MetricKind::kLlmJudge:
            raw = static_cast<double>(llm_judge(b.candidate_text, ref, *gateway, options.judge).count);
            break;
          case MetricKind::kExternal: break;
        }
        local.push_back(make_score(metric, b.report_id, pair, raw, higher_better));
      }
      std::lock_guard lock(mu);
      for (auto& s : local) out.push_back(std::move(s));
    });
  }

  for (const auto& cfg : options.adapters) {
    std::vector<TextPair> pairs;
    pairs.reserve(bundles.size() * 2);
    for (std::size_t i = 0; i < bundles.size(); ++i) {
      pairs.emplace_back(bundles[i].candidate_text, originals[i]);
      pairs.emplace_back(bundles[i].candidate_text, bundles[i].standardized_text);
    }
    AdapterHandshake hs;
    std::vector<double> raw = external_score(cfg, pairs, &hs);
    MetricId metric = MetricId::external(hs.name);
    for (std::size_t i = 0; i < bundles.size(); ++i) {
      out.push_back(make_score(metric, bundles[i].report_id, PairStyle::kVsOriginal, raw[2 * i], hs.higher_better));
      out.push_back(
          make_score(metric, bundles[i].report_id, PairStyle::kVsStandardized, raw[2 * i + 1], hs.higher_better));
    }
  }

  std::sort(out.begin(), out.end(), [](const MetricScore& a, const MetricScore& b) {
    return std::tie(a.metric, a.report_id, a.pair) < std::tie(b.metric, b.report_id, b.pair);
  });
  return out;
}

void write_scores(const std::filesystem::path& path, const std::vector<MetricScore>& scores) {
  write_jsonl(path, scores, [](const MetricScore& s) { return to_json(s); });
}

std::vector<MetricScore> read_scores(const std::filesystem::path& path) {
  return read_jsonl<MetricScore>(path, [](const json& j) { return score_from_json(j); });
}

annotate::ExportTable table_from_ledger(const std::filesystem::path& ledger, const Corpus& corpus) {
  struct Latest {
    annotate::ExpertAnnotation annotation;
    std::uint64_t version = 0;
  };
  std::map<std::pair<std::string, std::string>, Latest> latest;
  for (auto& [a, version] : read_jsonl<std::pair<annotate::ExpertAnnotation, std::uint64_t>>(
           ledger, [](const json& j) {
             auto a = annotate::annotation_from_json(j.at("annotation"));
             a.reviewer_id = j.at("annotation").at("reviewer_id").get<std::string>();
             return std::make_pair(std::move(a), j.at("version").get<std::uint64_t>());
           })) {
    auto& slot = latest[{a.report_id, a.reviewer_id}];
    if (version >= slot.version) slot = Latest{std::move(a), version};
  }
  annotate::ExportTable t;
  for (auto& [key, l] : latest) {
    const SiteId& site = corpus.at(key.first).site;
    t.site_totals[site] += l.annotation.total;
    auto& cats = t.site_category_totals[site];
    for (const auto& [cat, n] : l.annotation.counts) cats[cat] += n;
    t.rows.push_back(annotate::ExportRow{std::move(l.annotation), site, l.version});
  }
  return t;
}

std::map<std::string, double> expert_totals(const annotate::ExportTable& table) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& row : table.rows) {
    auto& [sum, n] = acc[row.annotation.report_id];
    sum += static_cast<double>(row.annotation.total);
    ++n;
  }
  std::map<std::string, double> out;
  for (const auto& [id, sn] : acc) out[id] = sn.first / sn.second;
  return out;
}

std::optional<stats::AgreementResult> overlap_agreement(const annotate::ExportTable& table) {
  std::map<std::string, std::vector<const annotate::ExportRow*>> by_report;
  for (const auto& row : table.rows) by_report[row.annotation.report_id].push_back(&row);
  std::map<std::string, double> first, second;
  for (const auto& [id, rows] : by_report) {
    if (rows.size() != 2) continue;
    first[id] = static_cast<double>(rows[0]->annotation.total);
    second[id] = static_cast<double>(rows[1]->annotation.total);
  }
  if (first.size() < 2) return std::nullopt;
  try {
    return stats::agreement_overlap(first, second);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kConstantInput) throw;
    spdlog::warn("inter-rater agreement undefined: {}", e.what());
    return std::nullopt;
  }
}

audit::AuditInput audit_input(const Corpus& corpus, const std::vector<CandidateBundle>& bundles,
                              std::vector<MetricScore> scores, std::map<std::string, double> expert_totals) {
  audit::AuditInput in;
  for (const auto& b : bundles) in.report_sites.emplace(b.report_id, corpus.at(b.report_id).site);
  in.scores = std::move(scores);
  in.expert_totals = std::move(expert_totals);
  return in;
}

}  // namespace rexamine::pipeline
