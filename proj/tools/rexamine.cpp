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

// rexamine: command-line driver for the audit pipeline.
//
// Every stage reads and writes files in --workdir:
//   ingest         reports.jsonl
//   standardize    standardized.jsonl
//   perturb        bundles.jsonl
//   score          scores.jsonl
//   annotate-serve annotations.jsonl (ledger)
//   analyze        audit.json
//   report         audit.md | cells.csv, summary.csv, correlations.csv | audit.json

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rexamine/annotate.hpp"
#include "rexamine/annotate_server.hpp"
#include "rexamine/audit.hpp"
#include "rexamine/corpus.hpp"
#include "rexamine/error.hpp"
#include "rexamine/gateway.hpp"
#include "rexamine/io.hpp"
#include "rexamine/pipeline.hpp"

namespace fs = std::filesystem;
using namespace rexamine;

namespace {

struct Common {
  fs::path workdir = ".";
  std::uint64_t seed = 0;
  std::string mode = "replay";
  std::size_t jobs = 4;
  std::string model = "gpt-4";
  std::string cache_dir;
  int verbosity = 0;
};

fs::path in_work(const Common& c, std::string_view name) { return c.workdir / name; }

Corpus load_reports(const Common& c) {
  return Corpus::ingest(in_work(c, "reports.jsonl"), CorpusFormat::kJsonl);
}

GatewayConfig gateway_config(const Common& c) {
  GatewayConfig cfg = GatewayConfig::from_env();
  auto mode = parse_run_mode(c.mode);
  if (!mode) throw Error(ErrorCode::kInvalidArgument, "--mode must be online, record or replay");
  cfg.mode = *mode;
  cfg.parallelism = std::max<std::size_t>(1, c.jobs);
  if (!c.cache_dir.empty()) cfg.cache_dir = c.cache_dir;
  return cfg;
}

void log_gateway(const LlmGateway& g) {
  auto s = g.stats();
  spdlog::info("gateway: {} network calls, {} retries, {} cache hits, {} cache writes", s.network_calls, s.retries,
               s.cache_hits, s.cache_writes);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::atomic<annotate::AnnotationServer*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-site style-sensitivity audit for report evaluation metrics"};
  app.set_config("--config", "", "TOML config file");
  app.require_subcommand(1);

  Common c;
  app.add_option("--workdir", c.workdir, "Directory holding the stage files")->capture_default_str();
  app.add_option("--seed", c.seed, "Run seed")->capture_default_str();
  app.add_option("--mode", c.mode, "LLM access: online, record or replay")
      ->check(CLI::IsMember({"online", "record", "replay"}))
      ->capture_default_str();
  app.add_option("--jobs", c.jobs, "Parallel workers / concurrent requests")->capture_default_str();
  app.add_option("--model", c.model, "Chat model id")->capture_default_str();
  app.add_option("--cache-dir", c.cache_dir, "Response cache directory (default $REXAMINE_CACHE_DIR or .rexamine-cache)");
  app.add_flag("-v,--verbose", c.verbosity, "More logging (repeatable)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a corpus and write reports.jsonl");
  fs::path input;
  std::string format = "jsonl";
  std::optional<std::size_t> per_site;
  ingest->add_option("input", input, "Corpus file")->required();
  ingest->add_option("--format", format)->check(CLI::IsMember({"jsonl", "csv"}))->capture_default_str();
  ingest->add_option("--sample-per-site", per_site, "Keep a seeded sample of k reports per site");

  // standardize
  auto* stdz = app.add_subcommand("standardize", "Rewrite every report into the common style");

  // perturb
  auto* perturb = app.add_subcommand("perturb", "Inject errors into the standardized reports");
  std::string method = "deterministic";
  std::optional<std::size_t> errors;
  perturb->add_option("--method", method)->check(CLI::IsMember({"llm", "deterministic"}))->capture_default_str();
  perturb->add_option("--errors", errors, "Deterministic errors per report (default 1-4 drawn per report)");

  // score
  auto* score = app.add_subcommand("score", "Score candidates against both references");
  std::vector<std::string> metric_names{"bleu2"};
  std::vector<std::string> adapters;
  std::size_t adapter_timeout_s = 60;
  score->add_option("--metric", metric_names, "bleu2, embed_cosine, llm_judge")->capture_default_str();
  score->add_option("--adapter", adapters, "External metric: name=command line");
  score->add_option("--adapter-timeout", adapter_timeout_s, "Seconds per pair")->capture_default_str();

  // annotate-serve
  auto* serve = app.add_subcommand("annotate-serve", "Serve the expert annotation API");
  std::vector<std::string> reviewer_tokens;
  std::vector<std::string> admin_tokens;
  std::size_t overlap = 10;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ground_truth = "original";
  std::optional<fs::path> static_dir;
  serve->add_option("--reviewer", reviewer_tokens, "reviewer:token (at least two)")->required();
  serve->add_option("--admin-token", admin_tokens, "Token allowed to export");
  serve->add_option("--overlap", overlap, "Reports shown to two reviewers")->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--ground-truth", ground_truth)
      ->check(CLI::IsMember({"original", "standardized"}))
      ->capture_default_str();
  serve->add_option("--static-dir", static_dir, "UI assets to serve at /");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Run the t-tests and correlations");
  fs::path annotations;
  double alpha = 0.05;
  std::optional<std::size_t> n_tests;
  bool testable_only = false;
  analyze->add_option("--annotations", annotations, "Annotation ledger (.jsonl) or export (.json)")
      ->capture_default_str();
  analyze->add_option("--alpha", alpha)->capture_default_str();
  analyze->add_option("--n-tests", n_tests, "Fixed Bonferroni family size");
  analyze->add_flag("--testable-only", testable_only, "Count only cells where a t-test ran");

  // report
  auto* report = app.add_subcommand("report", "Render audit.json");
  std::string report_format = "markdown";
  fs::path out_dir;
  report->add_option("--format", report_format)
      ->check(CLI::IsMember({"markdown", "csv", "json"}))
      ->capture_default_str();
  report->add_option("--out", out_dir, "Output directory (default: workdir)");

  CLI11_PARSE(app, argc, argv);

  auto logger = spdlog::stderr_color_mt("rexamine");
  spdlog::set_default_logger(logger);
  spdlog::set_level(c.verbosity >= 2 ? spdlog::level::trace
                    : c.verbosity == 1 ? spdlog::level::debug
                                       : spdlog::level::info);

  try {
    fs::create_directories(c.workdir);

    if (*ingest) {
      Corpus corpus = Corpus::ingest(input, format == "csv" ? CorpusFormat::kCsv : CorpusFormat::kJsonl);
      if (per_site) corpus = Corpus::from_records(sample_per_site(corpus, *per_site, c.seed));
      corpus.export_jsonl(in_work(c, "reports.jsonl"));
      spdlog::info("{} reports from {} sites", corpus.size(), corpus.sites().size());
    } else if (*stdz) {
      Corpus corpus = load_reports(c);
      LlmGateway gateway(gateway_config(c));
      LlmOptions llm;
      llm.model_id = c.model;
      auto rows = pipeline::standardize_all(corpus.records(), gateway, llm, c.jobs);
      pipeline::write_standardized(in_work(c, "standardized.jsonl"), rows);
      log_gateway(gateway);
    } else if (*perturb) {
      auto rows = pipeline::read_standardized(in_work(c, "standardized.jsonl"));
      pipeline::PerturbOptions opt;
      opt.method = *pipeline::parse_injection_method(method);
      opt.llm.model_id = c.model;
      opt.seed = c.seed;
      opt.errors_per_report = errors;
      opt.jobs = c.jobs;
      std::optional<LlmGateway> gateway;
      if (opt.method == pipeline::InjectionMethod::kLlm) gateway.emplace(gateway_config(c));
      auto bundles = pipeline::perturb_all(rows, opt, gateway ? &*gateway : nullptr);
      write_bundles(in_work(c, "bundles.jsonl"), bundles);
      if (gateway) log_gateway(*gateway);
      spdlog::info("{} bundles", bundles.size());
    } else if (*score) {
      Corpus corpus = load_reports(c);
      auto bundles = read_bundles(in_work(c, "bundles.jsonl"));
      pipeline::ScoreOptions opt;
      opt.jobs = c.jobs;
      opt.judge.model_id = c.model;
      bool needs_gateway = false;
      for (const auto& name : metric_names) {
        MetricId m = MetricId::parse(name);
        needs_gateway |= m.kind() != MetricKind::kBleu2;
        opt.metrics.push_back(m);
      }
      for (const auto& spec : adapters) {
        auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw Error(ErrorCode::kInvalidArgument, "--adapter expects name=command, got '" + spec + "'");
        }
        AdapterConfig a;
        a.name = spec.substr(0, eq);
        a.argv = split(spec.substr(eq + 1), ' ');
        a.per_pair_timeout = std::chrono::seconds(adapter_timeout_s);
        opt.adapters.push_back(std::move(a));
      }
      std::optional<LlmGateway> gateway;
      if (needs_gateway) gateway.emplace(gateway_config(c));
      auto scores = pipeline::score_all(corpus, bundles, opt, gateway ? &*gateway : nullptr);
      pipeline::write_scores(in_work(c, "scores.jsonl"), scores);
      if (gateway) log_gateway(*gateway);
      spdlog::info("{} scores", scores.size());
    } else if (*serve) {
      Corpus corpus = load_reports(c);
      auto bundles = read_bundles(in_work(c, "bundles.jsonl"));
      annotate::ServerConfig cfg;
      cfg.host = host;
      cfg.port = port;
      cfg.static_dir = static_dir;
      std::vector<std::string> reviewers;
      for (const auto& rt : reviewer_tokens) {
        auto colon = rt.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == rt.size()) {
          throw Error(ErrorCode::kInvalidArgument, "--reviewer expects reviewer:token");
        }
        reviewers.push_back(rt.substr(0, colon));
        cfg.reviewer_tokens[rt.substr(colon + 1)] = rt.substr(0, colon);
      }
      cfg.admin_tokens.insert(admin_tokens.begin(), admin_tokens.end());

      std::vector<annotate::ReviewPair> pairs;
      std::vector<std::string> ids;
      for (const auto& b : bundles) {
        const auto& rec = corpus.at(b.report_id);
        pairs.push_back({b.report_id, rec.site, pipeline::original_reference(rec), b.standardized_text,
                         b.candidate_text});
        ids.push_back(b.report_id);
      }
      auto assignments = annotate::create_assignments(ids, reviewers, overlap, c.seed);
      annotate::AnnotationStore store(std::move(assignments), std::move(pairs),
                                      {in_work(c, "annotations.jsonl"), *annotate::parse_ground_truth_style(ground_truth)});
      annotate::AnnotationServer server(store, cfg);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.run();
      g_server = nullptr;
    } else if (*analyze) {
      Corpus corpus = load_reports(c);
      auto bundles = read_bundles(in_work(c, "bundles.jsonl"));
      auto scores = pipeline::read_scores(in_work(c, "scores.jsonl"));
      fs::path ann = annotations.empty() ? in_work(c, "annotations.jsonl") : annotations;
      annotate::ExportTable table = ann.extension() == ".json"
                                        ? annotate::export_from_json(nlohmann::json::parse(io::read_file(ann)))
                                        : pipeline::table_from_ledger(ann, corpus);
      audit::AuditConfig cfg;
      cfg.alpha = alpha;
      cfg.n_tests = n_tests;
      if (testable_only) cfg.test_count = audit::TestCount::kTestableCells;
      auto result = audit::run_audit(
          pipeline::audit_input(corpus, bundles, std::move(scores), pipeline::expert_totals(table)), cfg);
      result.agreement = pipeline::overlap_agreement(table);
      for (const auto& w : result.warnings) spdlog::warn("{}", w);
      io::write_file_atomic(in_work(c, "audit.json"), audit::to_json(result).dump(2) + "\n");
      spdlog::info("{} cells, {} tests, threshold {:.4e}", result.cells.size(), result.n_tests, result.threshold);
    } else if (*report) {
      auto result = audit::audit_from_json(nlohmann::json::parse(io::read_file(in_work(c, "audit.json"))));
      auto written = audit::emit_report(result, *audit::parse_report_format(report_format),
                                        out_dir.empty() ? c.workdir : out_dir);
      for (const auto& p : written) std::cout << p.string() << "\n";
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const nlohmann::json::exception& e) {
    spdlog::error("ParseError: {}", e.what());
    return 1;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("IoError: {}", e.what());
    return 1;
  }
  return 0;
}
