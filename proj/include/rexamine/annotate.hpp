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

// Expert annotation: reviewer assignment with an overlap set for
// agreement, an append-only ledger of per-category error counts, and the
// blinded review queue served to the UI.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rexamine/stats.hpp"
#include "rexamine/types.hpp"

namespace rexamine::annotate {

struct Assignment {
  std::string reviewer_id;
  std::vector<std::string> unique_reports;
  std::vector<std::string> overlap_reports;

  bool operator==(const Assignment&) const = default;
};

// Shuffle the reports with `seed`; the first overlap_k become the overlap
// set, overlap report j going to reviewers j mod R and (j+1) mod R; the rest
// are dealt round-robin as unique reports. Errors: TooFewReviewers (< 2),
// OverlapTooLarge, DuplicateId, InvalidArgument (empty reviewer id).
std::vector<Assignment> create_assignments(std::vector<std::string> report_ids,
                                           const std::vector<std::string>& reviewers, std::size_t overlap_k,
                                           std::uint64_t seed);

using CategoryCounts = std::map<ErrorCategory, std::int64_t>;

struct ExpertAnnotation {
  std::string report_id;
  std::string reviewer_id;
  CategoryCounts counts;
  std::int64_t total = 0;
  UtcInstant submitted_at;

  bool operator==(const ExpertAnnotation&) const = default;
};

// Errors: CategoryMissing, TotalMismatch, InvalidArgument (negative count).
void validate(const ExpertAnnotation& a);

nlohmann::json to_json(const ExpertAnnotation& a);
// Missing categories surface as CategoryMissing, other shape errors as
// ParseError. `submitted_at` is optional on the wire.
ExpertAnnotation annotation_from_json(const nlohmann::json& j);

// Text shown to reviewers for one report.
struct ReviewPair {
  std::string report_id;
  SiteId site;
  std::string original_text;
  std::string standardized_text;
  std::string candidate_text;
};

enum class GroundTruthStyle { kOriginal, kStandardized };

std::optional<GroundTruthStyle> parse_ground_truth_style(std::string_view s);

enum class ItemStatus { kPending, kSubmitted };

// What a reviewer sees: no metric scores, no manifest.
struct QueueItem {
  std::string report_id;
  std::string ground_truth_text;
  std::string candidate_text;
  ItemStatus status = ItemStatus::kPending;
  std::uint64_t version = 0;  // latest submission by this reviewer, 0 if none
};

nlohmann::json to_json(const QueueItem& item);

struct QueueView {
  std::string reviewer_id;
  std::size_t assigned = 0;
  std::size_t completed = 0;
  std::vector<QueueItem> pending;
};

struct Submission {
  ExpertAnnotation annotation;
  std::optional<std::string> idempotency_key;
  // Version the client last saw (0 = no prior submission). A mismatch with
  // the stored version is a VersionConflict.
  std::optional<std::uint64_t> expected_version;
};

struct SubmitResult {
  std::uint64_t version = 0;
  bool duplicate = false;  // idempotency key seen before; nothing written
};

struct ExportRow {
  ExpertAnnotation annotation;
  SiteId site;
  std::uint64_t version = 0;
};

struct ExportTable {
  std::vector<ExportRow> rows;  // latest per (report, reviewer), sorted
  std::map<SiteId, std::int64_t> site_totals;
  std::map<SiteId, CategoryCounts> site_category_totals;

  bool operator==(const ExportTable& o) const;
};

nlohmann::json to_json(const ExportTable& t);
// Throws ParseError.
ExportTable export_from_json(const nlohmann::json& j);

class AnnotationStore {
 public:
  struct Options {
    std::filesystem::path ledger;  // JSON lines; created if absent
    GroundTruthStyle ground_truth = GroundTruthStyle::kOriginal;
  };

  // Replays the ledger into the index. Throws ParseError on a corrupt line
  // (a torn final line is dropped with a warning), UnknownReport when an
  // assignment names a report with no pair.
  AnnotationStore(std::vector<Assignment> assignments, std::vector<ReviewPair> pairs, Options options);
  ~AnnotationStore();

  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  // Errors: UnknownReviewer, NotAssigned, CategoryMissing, TotalMismatch,
  // VersionConflict, IoError. `submitted_at` is stamped by the store.
  SubmitResult submit(const Submission& s);
  SubmitResult submit(const ExpertAnnotation& a) { return submit(Submission{a, std::nullopt, std::nullopt}); }

  QueueView queue_for(const std::string& reviewer_id) const;

  // Errors: UnknownReviewer, UnknownReport, NotAssigned.
  QueueItem pair_for(const std::string& reviewer_id, const std::string& report_id) const;

  ExportTable export_annotations() const;

  // Every stored submission for (report, reviewer), oldest first.
  std::vector<ExpertAnnotation> history(const std::string& report_id, const std::string& reviewer_id) const;

  // Mean total over the reviewers who annotated each report.
  std::map<std::string, double> expert_totals() const;

  // Agreement over overlap reports annotated by both of their reviewers.
  // Throws TooFewSamples when fewer than two such reports exist.
  stats::AgreementResult agreement() const;

  bool has_reviewer(const std::string& reviewer_id) const;
  const std::vector<Assignment>& assignments() const { return assignments_; }

 private:
  struct Index;
  std::shared_ptr<const Index> snapshot() const;

  std::vector<Assignment> assignments_;
  std::map<std::string, ReviewPair> pairs_;
  std::map<std::string, std::map<std::string, bool>> assigned_;  // reviewer -> report -> overlap
  Options options_;

  std::mutex write_mu_;
  mutable std::mutex snap_mu_;
  std::shared_ptr<const Index> index_;
};

}  // namespace rexamine::annotate
