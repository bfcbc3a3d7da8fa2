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

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "httplib.h"
#include "rexamine/annotate.hpp"
#include "rexamine/annotate_server.hpp"
#include "rexamine/io.hpp"
#include "support/check.hpp"
#include "support/support.hpp"

using namespace rexamine;
using namespace rexamine::annotate;
using nlohmann::json;

namespace {

std::vector<std::string> report_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("R" + std::to_string(1000 + i));
  return ids;
}

std::vector<ReviewPair> pairs_for(const std::vector<std::string>& ids) {
  std::vector<ReviewPair> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.push_back(ReviewPair{ids[i], SiteId(testing::site_code(i % 3)), "original " + ids[i],
                             "FINDINGS:\nstandardized " + ids[i], "candidate " + ids[i]});
  }
  return out;
}

ExpertAnnotation annotation(std::string report, std::string reviewer, std::array<std::int64_t, 7> n) {
  ExpertAnnotation a;
  a.report_id = std::move(report);
  a.reviewer_id = std::move(reviewer);
  for (std::size_t i = 0; i < 7; ++i) {
    a.counts[kAllErrorCategories[i]] = n[i];
    a.total += n[i];
  }
  return a;
}

void check_invariants(const std::vector<Assignment>& as, const std::vector<std::string>& ids, std::size_t k) {
  std::map<std::string, int> unique_seen;
  std::map<std::string, int> overlap_seen;
  for (const auto& a : as) {
    std::set<std::string> u(a.unique_reports.begin(), a.unique_reports.end());
    for (const auto& r : a.overlap_reports) CHECK_FALSE(u.contains(r));
    for (const auto& r : a.unique_reports) ++unique_seen[r];
    for (const auto& r : a.overlap_reports) ++overlap_seen[r];
  }
  CHECK(overlap_seen.size() == k);
  for (const auto& [r, c] : overlap_seen) {
    CHECK(c == 2);
    CHECK_FALSE(unique_seen.contains(r));
  }
  for (const auto& [r, c] : unique_seen) CHECK(c == 1);
  CHECK(unique_seen.size() + overlap_seen.size() == ids.size());
}

struct Fixture {
  testing::TempDir dir;
  std::vector<std::string> ids = report_ids(12);
  std::vector<Assignment> assignments = create_assignments(ids, {"alice", "bob"}, 2, 7);

  std::unique_ptr<AnnotationStore> open(GroundTruthStyle gt = GroundTruthStyle::kOriginal) {
    return std::make_unique<AnnotationStore>(assignments, pairs_for(ids),
                                             AnnotationStore::Options{dir / "annotations.jsonl", gt});
  }
  const Assignment& of(const std::string& reviewer) const {
    return *std::find_if(assignments.begin(), assignments.end(),
                         [&](const Assignment& a) { return a.reviewer_id == reviewer; });
  }
};

}  // namespace

TEST_SUITE("annotate") {
  TEST_CASE("assignment split for 240 reports") {
    auto ids = report_ids(240);
    auto as = create_assignments(ids, {"r1", "r2"}, 10, 42);
    REQUIRE(as.size() == 2);
    for (const auto& a : as) {
      CHECK(a.unique_reports.size() == 115);
      CHECK(a.overlap_reports.size() == 10);
      CHECK(a.unique_reports.size() + a.overlap_reports.size() == 125);
    }
    check_invariants(as, ids, 10);
    CHECK(as == create_assignments(ids, {"r1", "r2"}, 10, 42));
    CHECK(as != create_assignments(ids, {"r1", "r2"}, 10, 43));
    auto shuffled = ids;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(as == create_assignments(shuffled, {"r1", "r2"}, 10, 42));
  }

  TEST_CASE("zero overlap is a disjoint partition") {
    auto ids = report_ids(31);
    auto as = create_assignments(ids, {"a", "b", "c"}, 0, 1);
    check_invariants(as, ids, 0);
    for (const auto& a : as) {
      CHECK(a.overlap_reports.empty());
      CHECK(a.unique_reports.size() >= 10);
      CHECK(a.unique_reports.size() <= 11);
    }
  }

  TEST_CASE("randomized assignment invariants") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
      std::size_t n = std::uniform_int_distribution<std::size_t>(0, 60)(rng);
      std::size_t r = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
      std::size_t k = n == 0 ? 0 : std::uniform_int_distribution<std::size_t>(0, n)(rng);
      std::vector<std::string> reviewers;
      for (std::size_t i = 0; i < r; ++i) reviewers.push_back("rev" + std::to_string(i));
      auto ids = report_ids(n);
      check_invariants(create_assignments(ids, reviewers, k, rng()), ids, k);
    }
  }

  TEST_CASE("assignment errors") {
    REX_CHECK_ERROR(create_assignments(report_ids(5), {"a"}, 0, 1), ErrorCode::kTooFewReviewers);
    REX_CHECK_ERROR(create_assignments(report_ids(5), {"a", "b"}, 6, 1), ErrorCode::kOverlapTooLarge);
    REX_CHECK_ERROR(create_assignments({"x", "x"}, {"a", "b"}, 0, 1), ErrorCode::kDuplicateId);
    REX_CHECK_ERROR(create_assignments(report_ids(5), {"a", "a"}, 0, 1), ErrorCode::kDuplicateId);
  }

  TEST_CASE("validation") {
    auto ok = annotation("R1", "alice", {1, 0, 2, 0, 0, 1, 0});
    CHECK(ok.total == 4);
    validate(ok);
    auto bad_total = ok;
    bad_total.total = 5;
    REX_CHECK_ERROR(validate(bad_total), ErrorCode::kTotalMismatch);
    auto missing = ok;
    missing.counts.erase(ErrorCategory::kWrongSeverity);
    missing.total = 4;
    REX_CHECK_ERROR(validate(missing), ErrorCode::kCategoryMissing);
    auto negative = annotation("R1", "alice", {-1, 0, 0, 0, 0, 0, 0});
    REX_CHECK_ERROR(validate(negative), ErrorCode::kInvalidArgument);

    json j = to_json(ok);
    CHECK(annotation_from_json(j) == ok);
    j["counts"].erase("wrong_severity");
    REX_CHECK_ERROR(annotation_from_json(j), ErrorCode::kCategoryMissing);
  }

  TEST_CASE("submit, history and latest wins") {
    Fixture f;
    auto store = f.open();
    const std::string report = f.of("alice").unique_reports.front();
    auto r1 = store->submit(annotation(report, "alice", {1, 0, 2, 0, 0, 1, 0}));
    CHECK(r1.version == 1);
    CHECK_FALSE(r1.duplicate);
    auto bad = annotation(report, "alice", {1, 0, 2, 0, 0, 1, 0});
    bad.total = 5;
    REX_CHECK_ERROR(store->submit(bad), ErrorCode::kTotalMismatch);
    REX_CHECK_ERROR(store->submit(annotation(report, "bob", {0, 0, 0, 0, 0, 0, 0})), ErrorCode::kNotAssigned);
    REX_CHECK_ERROR(store->submit(annotation(report, "carol", {0, 0, 0, 0, 0, 0, 0})), ErrorCode::kUnknownReviewer);

    auto r2 = store->submit(annotation(report, "alice", {0, 0, 0, 0, 0, 0, 1}));
    CHECK(r2.version == 2);
    auto hist = store->history(report, "alice");
    REQUIRE(hist.size() == 2);
    CHECK(hist[0].total == 4);
    CHECK(hist[1].total == 1);
    auto table = store->export_annotations();
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0].annotation.total == 1);
    CHECK(table.rows[0].version == 2);

    Submission stale{annotation(report, "alice", {2, 0, 0, 0, 0, 0, 0}), std::nullopt, 1};
    REX_CHECK_ERROR(store->submit(stale), ErrorCode::kVersionConflict);
    stale.expected_version = 2;
    CHECK(store->submit(stale).version == 3);
  }

  TEST_CASE("idempotency keys store one annotation") {
    Fixture f;
    auto store = f.open();
    const std::string report = f.of("bob").unique_reports.front();
    Submission s{annotation(report, "bob", {1, 1, 0, 0, 0, 0, 0}), "click-1", std::nullopt};
    auto a = store->submit(s);
    auto b = store->submit(s);
    CHECK_FALSE(a.duplicate);
    CHECK(b.duplicate);
    CHECK(a.version == b.version);
    CHECK(store->history(report, "bob").size() == 1);
    auto ledger = io::read_file(f.dir / "annotations.jsonl");
    CHECK(std::count(ledger.begin(), ledger.end(), '\n') == 1);
  }

  TEST_CASE("ledger survives a restart") {
    Fixture f;
    ExportTable before;
    {
      auto store = f.open();
      for (const auto& r : f.of("alice").unique_reports) store->submit(annotation(r, "alice", {0, 1, 0, 0, 0, 0, 2}));
      store->submit(Submission{annotation(f.of("bob").overlap_reports[0], "bob", {1, 0, 0, 0, 0, 0, 0}), "k",
                               std::nullopt});
      before = store->export_annotations();
    }
    auto store = f.open();
    CHECK(store->export_annotations() == before);
    CHECK(store->submit(Submission{annotation(f.of("bob").overlap_reports[0], "bob", {1, 0, 0, 0, 0, 0, 0}), "k",
                                   std::nullopt})
              .duplicate);

    auto ledger = f.dir / "annotations.jsonl";
    io::write_file_atomic(ledger, io::read_file(ledger) + "{\"annotation\": {\"rep");
    auto reopened = f.open();
    CHECK(reopened->export_annotations() == before);
    auto text = io::read_file(ledger);
    CHECK(text.back() == '\n');
  }

  TEST_CASE("corrupt ledger line is an error") {
    Fixture f;
    io::write_file_atomic(f.dir / "annotations.jsonl", "not json\n{}\n");
    REX_CHECK_ERROR(f.open(), ErrorCode::kParseError);
  }

  TEST_CASE("export round trip and site rollup") {
    Fixture f;
    auto store = f.open();
    std::int64_t grand = 0;
    for (const auto& a : f.assignments) {
      for (const auto& r : a.unique_reports) {
        auto ann = annotation(r, a.reviewer_id, {1, 2, 0, 0, 3, 0, 1});
        grand += ann.total;
        store->submit(ann);
      }
    }
    auto table = store->export_annotations();
    CHECK(table.rows.size() == f.ids.size() - 2);
    std::int64_t sum = 0;
    for (const auto& [site, t] : table.site_totals) sum += t;
    CHECK(sum == grand);
    for (const auto& row : table.rows) {
      CHECK(row.annotation.counts.size() == 7);
      CHECK(row.annotation.counts.at(ErrorCategory::kWrongSeverity) == 3);
    }
    CHECK(export_from_json(to_json(table)) == table);
    CHECK(store->export_annotations() == table);
    CHECK(to_json(store->export_annotations()).dump() == to_json(table).dump());
  }

  TEST_CASE("queue shows pending items in stable order without scores") {
    Fixture f;
    auto store = f.open();
    auto view = store->queue_for("alice");
    const auto& a = f.of("alice");
    CHECK(view.assigned == a.unique_reports.size() + a.overlap_reports.size());
    CHECK(view.pending.size() == view.assigned);
    CHECK(view.completed == 0);
    store->submit(annotation(view.pending[1].report_id, "alice", {0, 0, 0, 0, 0, 0, 0}));
    auto after = store->queue_for("alice");
    CHECK(after.pending.size() == view.pending.size() - 1);
    CHECK(after.completed == 1);
    CHECK(after.pending[0].report_id == view.pending[0].report_id);
    CHECK(after.pending[1].report_id == view.pending[2].report_id);
    for (const auto& item : after.pending) {
      CHECK(item.ground_truth_text.rfind("original ", 0) == 0);
      json j = to_json(item);
      std::set<std::string> keys;
      for (const auto& [k, v] : j.items()) keys.insert(k);
      CHECK(keys == std::set<std::string>{"report_id", "ground_truth_text", "candidate_text", "status", "version"});
    }
    REX_CHECK_ERROR(store->queue_for("carol"), ErrorCode::kUnknownReviewer);

    auto std_store = Fixture{}.open(GroundTruthStyle::kStandardized);
    CHECK(std_store->queue_for("alice").pending[0].ground_truth_text.rfind("FINDINGS:", 0) == 0);
  }

  TEST_CASE("agreement over overlap reports") {
    Fixture f;
    auto store = f.open();
    REX_CHECK_ERROR(store->agreement(), ErrorCode::kTooFewSamples);
    std::int64_t n = 0;
    for (const auto& r : f.of("alice").overlap_reports) {
      ++n;
      store->submit(annotation(r, "alice", {n, 0, 0, 0, 0, 0, 0}));
      store->submit(annotation(r, "bob", {0, 0, 0, 0, 0, 0, n}));
    }
    auto ag = store->agreement();
    CHECK(ag.exact_match_rate == 1.0);
    CHECK(ag.spearman.rho == doctest::Approx(1.0).epsilon(1e-12));
    auto totals = store->expert_totals();
    CHECK(totals.size() == 2);
  }

  TEST_CASE("HTTP API") {
    Fixture f;
    auto store = f.open();
    ServerConfig cfg;
    cfg.port = 0;
    cfg.reviewer_tokens = {{"tok-a", "alice"}, {"tok-b", "bob"}};
    cfg.admin_tokens = {"tok-admin"};
    AnnotationServer server(*store, cfg);
    int port = server.start();
    httplib::Client cli("127.0.0.1", port);
    auto auth = [](const std::string& t) { return httplib::Headers{{"Authorization", "Bearer " + t}}; };

    auto health = cli.Get("/api/health");
    REQUIRE(health);
    CHECK(health->status == 200);

    CHECK(cli.Get("/api/queue/alice")->status == 401);
    CHECK(cli.Get("/api/queue/alice", auth("nope"))->status == 401);
    CHECK(cli.Get("/api/queue/alice", auth("tok-b"))->status == 403);
    CHECK(cli.Get("/api/queue/alice", auth("tok-admin"))->status == 200);
    CHECK(cli.Get("/api/export", auth("tok-a"))->status == 403);

    auto q = cli.Get("/api/queue/alice", auth("tok-a"));
    REQUIRE(q->status == 200);
    json queue = json::parse(q->body);
    CHECK(queue.at("items").size() == queue.at("assigned").get<std::size_t>());
    std::string report = queue.at("items")[0].at("report_id");
    CHECK(q->body.find("score") == std::string::npos);
    CHECK(q->body.find("manifest") == std::string::npos);

    auto pair = cli.Get("/api/pair/" + report, auth("tok-a"));
    CHECK(pair->status == 200);
    CHECK(pair->body.find("score") == std::string::npos);
    CHECK(cli.Get("/api/pair/" + report, auth("tok-b"))->status == 403);
    CHECK(cli.Get("/api/pair/NOPE", auth("tok-a"))->status == 404);

    json body = to_json(annotation(report, "alice", {1, 0, 2, 0, 0, 1, 0}));
    body.erase("submitted_at");
    body["idempotency_key"] = "dbl";
    auto first = cli.Post("/api/annotation", auth("tok-a"), body.dump(), "application/json");
    auto second = cli.Post("/api/annotation", auth("tok-a"), body.dump(), "application/json");
    CHECK(first->status == 201);
    CHECK(second->status == 200);
    CHECK(json::parse(second->body).at("duplicate") == true);

    json wrong = body;
    wrong["total"] = 5;
    wrong.erase("idempotency_key");
    CHECK(cli.Post("/api/annotation", auth("tok-a"), wrong.dump(), "application/json")->status == 422);
    wrong = body;
    wrong.erase("idempotency_key");
    wrong["expected_version"] = 0;
    CHECK(cli.Post("/api/annotation", auth("tok-a"), wrong.dump(), "application/json")->status == 409);
    CHECK(cli.Post("/api/annotation", auth("tok-a"), "{oops", "application/json")->status == 400);
    CHECK(cli.Post("/api/annotation", auth("tok-b"), body.dump(), "application/json")->status == 400);
    wrong = body;
    wrong.erase("reviewer_id");
    wrong.erase("idempotency_key");
    auto err = cli.Post("/api/annotation", auth("tok-b"), wrong.dump(), "application/json");
    CHECK(err->status == 403);
    CHECK(json::parse(err->body).at("error") == "NotAssigned");

    auto exported = cli.Get("/api/export", auth("tok-admin"));
    REQUIRE(exported->status == 200);
    auto table = export_from_json(json::parse(exported->body));
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0].annotation.total == 4);
    CHECK(table.rows[0].annotation.counts.at(ErrorCategory::kWrongLocation) == 2);
    server.stop();
  }

  TEST_CASE("status mapping") {
    CHECK(http_status(ErrorCode::kParseError) == 400);
    CHECK(http_status(ErrorCode::kNotAssigned) == 403);
    CHECK(http_status(ErrorCode::kUnknownReport) == 404);
    CHECK(http_status(ErrorCode::kVersionConflict) == 409);
    CHECK(http_status(ErrorCode::kTotalMismatch) == 422);
    CHECK(http_status(ErrorCode::kIoError) == 500);
  }
}
