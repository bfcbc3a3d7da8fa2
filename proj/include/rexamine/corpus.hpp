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

// Multi-site report corpus: ingestion (JSON lines or CSV), per-site
// sampling, and storage of the derived standardized/candidate texts.
//
// Records are immutable once ingested and may be read from any thread.
// Bundle writes go through store_bundle, which serializes writers; when a
// bundle file is attached every write is persisted atomically.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rexamine/types.hpp"

namespace rexamine {

enum class CorpusFormat { kJsonl, kCsv };

class Corpus {
 public:
  // Errors: ParseError ("row N: cause"), DuplicateId, EmptyCorpus.
  static Corpus ingest(const std::filesystem::path& path, CorpusFormat format);

  // Same checks as ingest, applied to in-memory records. Texts are
  // normalized (NFC, LF line endings).
  static Corpus from_records(std::vector<ReportRecord> records);

  Corpus(Corpus&&) noexcept;
  Corpus& operator=(Corpus&&) noexcept;
  ~Corpus();

  const std::vector<ReportRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  const ReportRecord* find(std::string_view report_id) const;
  // Throws Error(kUnknownReport).
  const ReportRecord& at(std::string_view report_id) const;

  // Sorted by code.
  const std::vector<SiteId>& sites() const { return sites_; }
  std::vector<const ReportRecord*> records_for(const SiteId& site) const;

  // Canonical reports.jsonl, in ingestion order.
  void export_jsonl(const std::filesystem::path& path) const;

  // Load bundles already present at `path` (if the file exists) and persist
  // every later store_bundle there.
  void attach_bundle_store(const std::filesystem::path& path);

  // Replaces any existing bundle for the same report. Errors: UnknownReport,
  // InvalidArgument for bundles that break their invariants.
  void store_bundle(CandidateBundle bundle);

  std::optional<CandidateBundle> bundle(std::string_view report_id) const;

  // Ordered by report_id.
  std::vector<CandidateBundle> bundles() const;

 private:
  Corpus();
  void persist_locked() const;

  std::vector<ReportRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<SiteId> sites_;

  std::unique_ptr<std::shared_mutex> bundle_mutex_;
  std::unordered_map<std::string, CandidateBundle> bundles_;
  std::optional<std::filesystem::path> bundle_path_;
};

// k records from every site, sites in code order. Pure function of
// (corpus content, k, seed). Throws InsufficientRecords.
std::vector<ReportRecord> sample_per_site(const Corpus& corpus, std::size_t k, std::uint64_t seed);

// bundles.jsonl helpers.
std::vector<CandidateBundle> read_bundles(const std::filesystem::path& path);
void write_bundles(const std::filesystem::path& path, const std::vector<CandidateBundle>& bundles);

}  // namespace rexamine
