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
#include <fstream>
#include <set>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "rexamine/corpus.hpp"
#include "rexamine/io.hpp"
#include "rexamine/serialize.hpp"
#include "support/check.hpp"
#include "support/support.hpp"

using namespace rexamine;
using nlohmann::json;

namespace {

std::string jsonl_corpus(std::size_t sites, std::size_t per_site) {
  std::string out;
  for (const auto& r : testing::synthetic_corpus(sites, per_site, 3)) {
    json j;
    to_json(j, r.record);
    out += j.dump() + "\n";
  }
  return out;
}

CandidateBundle bundle_for(const std::string& id, const std::string& candidate) {
  CandidateBundle b;
  b.report_id = id;
  b.standardized_text = "The lungs are clear.";
  b.candidate_text = candidate;
  b.provenance.model_id = "gpt-4";
  b.provenance.prompt_version = "inject_errors.v1";
  b.provenance.timestamp = UtcInstant::parse("2024-01-01T00:00:00Z");
  return b;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("240 rows over 6 sites") {
    testing::TempDir dir;
    io::write_file_atomic(dir / "r.jsonl", jsonl_corpus(6, 40));
    Corpus c = Corpus::ingest(dir / "r.jsonl", CorpusFormat::kJsonl);
    CHECK(c.size() == 240);
    CHECK(c.sites().size() == 6);
    std::size_t total = 0;
    std::set<std::string> seen;
    for (const auto& s : c.sites()) {
      auto rs = c.records_for(s);
      CHECK(rs.size() == 40);
      total += rs.size();
      for (auto* r : rs) CHECK(seen.insert(r->report_id).second);
    }
    CHECK(total == c.size());
  }

  TEST_CASE("ingest errors") {
    testing::TempDir dir;
    io::write_file_atomic(dir / "empty.jsonl", "");
    REX_CHECK_ERROR(Corpus::ingest(dir / "empty.jsonl", CorpusFormat::kJsonl), ErrorCode::kEmptyCorpus);

    io::write_file_atomic(dir / "dup.jsonl",
                          R"({"report_id":"r1","site":"US","text":"A."})" "\n"
                          R"({"report_id":"r1","site":"UK","text":"B."})" "\n");
    REX_CHECK_ERROR(Corpus::ingest(dir / "dup.jsonl", CorpusFormat::kJsonl), ErrorCode::kDuplicateId);

    io::write_file_atomic(dir / "bad.jsonl",
                          R"({"report_id":"r1","site":"US","text":"A."})" "\n"
                          R"({"report_id":"r2","site":"US"})" "\n");
    try {
      Corpus::ingest(dir / "bad.jsonl", CorpusFormat::kJsonl);
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kParseError);
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }

    io::write_file_atomic(dir / "blank.jsonl", R"({"report_id":"r1","site":"US","text":"   "})" "\n");
    REX_CHECK_ERROR(Corpus::ingest(dir / "blank.jsonl", CorpusFormat::kJsonl), ErrorCode::kParseError);

    REX_CHECK_ERROR(Corpus::ingest(dir / "missing.jsonl", CorpusFormat::kJsonl), ErrorCode::kIoError);
  }

  TEST_CASE("csv ingestion with quoting and sections") {
    testing::TempDir dir;
    io::write_file_atomic(dir / "r.csv",
                          "report_id,site,text,language_note,section.findings\r\n"
                          "a1,US,\"Line one.\r\nLine \"\"two\"\".\",,\"Heart normal.\"\r\n"
                          "a2,UK,Plain text.,machine-translated,\r\n");
    Corpus c = Corpus::ingest(dir / "r.csv", CorpusFormat::kCsv);
    REQUIRE(c.size() == 2);
    CHECK(c.at("a1").text == "Line one.\nLine \"two\".");
    CHECK(c.at("a1").sections.at("findings") == "Heart normal.");
    CHECK(c.at("a2").language_note == "machine-translated");
    CHECK(c.at("a2").sections.empty());

    io::write_file_atomic(dir / "nohdr.csv", "id,site,text\nx,US,y\n");
    REX_CHECK_ERROR(Corpus::ingest(dir / "nohdr.csv", CorpusFormat::kCsv), ErrorCode::kParseError);
  }

  TEST_CASE("export then ingest is byte-identical") {
    testing::TempDir dir;
    std::vector<ReportRecord> recs;
    recs.push_back({"x1", SiteId("ES"), "Derrame pleural m\x61\xcc\x81s peque\xc3\xb1o.\r\nSin neumot\xc3\xb3rax.", {}, "machine-translated"});
    recs.push_back({"x2", SiteId("US"), "Heart normal.", {{"findings", "Heart normal."}}, ""});
    Corpus a = Corpus::from_records(recs);
    a.export_jsonl(dir / "a.jsonl");
    Corpus b = Corpus::ingest(dir / "a.jsonl", CorpusFormat::kJsonl);
    b.export_jsonl(dir / "b.jsonl");
    CHECK(io::read_file(dir / "a.jsonl") == io::read_file(dir / "b.jsonl"));
    for (const auto& r : a.records()) CHECK(b.at(r.report_id) == r);
    CHECK(a.at("x1").text.find('\r') == std::string::npos);
  }

  TEST_CASE("sample_per_site") {
    Corpus c = Corpus::from_records([] {
      std::vector<ReportRecord> v;
      for (const auto& r : testing::synthetic_corpus(6, 100, 5)) v.push_back(r.record);
      return v;
    }());
    auto s1 = sample_per_site(c, 40, 7);
    auto s2 = sample_per_site(c, 40, 7);
    CHECK(s1.size() == 240);
    CHECK(s1 == s2);
    std::map<SiteId, int> per;
    for (const auto& r : s1) ++per[r.site];
    for (const auto& [site, n] : per) CHECK(n == 40);
    CHECK(sample_per_site(c, 0, 7).empty());
    CHECK(sample_per_site(c, 40, 8) != s1);
    REX_CHECK_ERROR(sample_per_site(c, 101, 7), ErrorCode::kInsufficientRecords);
  }

  TEST_CASE("bundle store") {
    testing::TempDir dir;
    Corpus c = Corpus::from_records({{"r1", SiteId("US"), "A.", {}, ""}, {"r2", SiteId("UK"), "B.", {}, ""}});
    c.attach_bundle_store(dir / "bundles.jsonl");
    auto b1 = bundle_for("r1", "first");
    c.store_bundle(b1);
    CHECK(c.bundle("r1") == b1);
    auto b2 = bundle_for("r1", "second");
    c.store_bundle(b2);
    CHECK(c.bundles().size() == 1);
    CHECK(c.bundle("r1")->candidate_text == "second");
    REX_CHECK_ERROR(c.store_bundle(bundle_for("nope", "x")), ErrorCode::kUnknownReport);

    auto on_disk = read_bundles(dir / "bundles.jsonl");
    REQUIRE(on_disk.size() == 1);
    CHECK(on_disk[0] == b2);

    Corpus again = Corpus::from_records({{"r1", SiteId("US"), "A.", {}, ""}, {"r2", SiteId("UK"), "B.", {}, ""}});
    again.attach_bundle_store(dir / "bundles.jsonl");
    CHECK(again.bundle("r1") == b2);
  }

  TEST_CASE("concurrent bundle writers keep one bundle per id") {
    std::vector<ReportRecord> recs;
    for (int i = 0; i < 20; ++i) recs.push_back({"r" + std::to_string(i), SiteId("US"), "A.", {}, ""});
    Corpus c = Corpus::from_records(recs);
    std::vector<std::thread> ts;
    for (int t = 0; t < 4; ++t) {
      ts.emplace_back([&, t] {
        for (int i = 0; i < 20; ++i) c.store_bundle(bundle_for("r" + std::to_string(i), "v" + std::to_string(t)));
      });
    }
    for (auto& t : ts) t.join();
    CHECK(c.bundles().size() == 20);
  }
}
