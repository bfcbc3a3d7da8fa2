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

#include "rexamine/annotate.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "rexamine/error.hpp"
#include "rexamine/io.hpp"

namespace rexamine::annotate {
namespace {

using nlohmann::json;

using Key = std::pair<std::string, std::string>;  // report, reviewer

struct Stored {
  ExpertAnnotation annotation;
  std::uint64_t version = 0;
};

json counts_json(const CategoryCounts& c) {
  json j = json::object();
  for (const auto& [cat, n] : c) j[std::string(to_string(cat))] = n;
  return j;
}

}  // namespace

struct AnnotationStore::Index {
  std::map<Key, std::vector<Stored>> history;
  std::map<std::string, SubmitResult> idempotency;
};

// ---------------------------------------------------------------------------
// assignment

std::vector<Assignment> create_assignments(std::vector<std::string> report_ids,
                                           const std::vector<std::string>& reviewers, std::size_t overlap_k,
                                           std::uint64_t seed) {
  if (reviewers.size() < 2) {
    throw Error(ErrorCode::kTooFewReviewers, "need at least 2 reviewers, got " + std::to_string(reviewers.size()));
  }
  if (overlap_k > report_ids.size()) {
    throw Error(ErrorCode::kOverlapTooLarge, "overlap " + std::to_string(overlap_k) + " exceeds " +
                                                 std::to_string(report_ids.size()) + " reports");
  }
  std::set<std::string> seen;
  for (const auto& r : reviewers) {
    if (r.empty()) throw Error(ErrorCode::kInvalidArgument, "empty reviewer id");
    if (!seen.insert(r).second) throw Error(ErrorCode::kDuplicateId, "reviewer " + r);
  }
  seen.clear();
  for (const auto& id : report_ids) {
    if (!seen.insert(id).second) throw Error(ErrorCode::kDuplicateId, "report " + id);
  }

  std::sort(report_ids.begin(), report_ids.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = report_ids.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(report_ids[i - 1], report_ids[pick(rng)]);
  }

  const std::size_t R = reviewers.size();
  std::vector<Assignment> out(R);
  for (std::size_t r = 0; r < R; ++r) out[r].reviewer_id = reviewers[r];
  for (std::size_t j = 0; j < overlap_k; ++j) {
    out[j % R].overlap_reports.push_back(report_ids[j]);
    out[(j + 1) % R].overlap_reports.push_back(report_ids[j]);
  }
  for (std::size_t j = overlap_k; j < report_ids.size(); ++j) {
    out[(j - overlap_k) % R].unique_reports.push_back(report_ids[j]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// annotations

void validate(const ExpertAnnotation& a) {
  if (a.report_id.empty()) throw Error(ErrorCode::kInvalidArgument, "annotation without report_id");
  if (a.reviewer_id.empty()) throw Error(ErrorCode::kInvalidArgument, "annotation without reviewer_id");
  std::int64_t sum = 0;
  for (auto cat : kAllErrorCategories) {
    auto it = a.counts.find(cat);
    if (it == a.counts.end()) throw Error(ErrorCode::kCategoryMissing, std::string(to_string(cat)));
    if (it->second < 0) {
      throw Error(ErrorCode::kInvalidArgument, "negative count for " + std::string(to_string(cat)));
    }
    sum += it->second;
  }
  if (a.total != sum) {
    throw Error(ErrorCode::kTotalMismatch,
                "total " + std::to_string(a.total) + " but categories sum to " + std::to_string(sum));
  }
}

json to_json(const ExpertAnnotation& a) {
  return json{{"report_id", a.report_id},
              {"reviewer_id", a.reviewer_id},
              {"counts", counts_json(a.counts)},
              {"total", a.total},
              {"submitted_at", a.submitted_at.iso()}};
}

ExpertAnnotation annotation_from_json(const json& j) {
  ExpertAnnotation a;
  try {
    if (!j.is_object()) throw Error(ErrorCode::kParseError, "annotation must be an object");
    a.report_id = j.at("report_id").get<std::string>();
    a.reviewer_id = j.value("reviewer_id", std::string());
    const json& counts = j.at("counts");
    if (!counts.is_object()) throw Error(ErrorCode::kParseError, "counts must be an object");
    for (const auto& [name, value] : counts.items()) {
      auto cat = parse_error_category(name);
      if (!cat) throw Error(ErrorCode::kParseError, "unknown category '" + name + "'");
      if (!value.is_number_integer()) throw Error(ErrorCode::kParseError, "count for " + name + " is not an integer");
      a.counts[*cat] = value.get<std::int64_t>();
    }
    for (auto cat : kAllErrorCategories) {
      if (!a.counts.contains(cat)) throw Error(ErrorCode::kCategoryMissing, std::string(to_string(cat)));
    }
    if (!j.at("total").is_number_integer()) throw Error(ErrorCode::kParseError, "total is not an integer");
    a.total = j.at("total").get<std::int64_t>();
    if (j.contains("submitted_at")) a.submitted_at = UtcInstant::parse(j.at("submitted_at").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("annotation: ") + e.what());
  }
  return a;
}

std::optional<GroundTruthStyle> parse_ground_truth_style(std::string_view s) {
  if (s == "original") return GroundTruthStyle::kOriginal;
  if (s == "standardized") return GroundTruthStyle::kStandardized;
  return std::nullopt;
}

json to_json(const QueueItem& item) {
  return json{{"report_id", item.report_id},
              {"ground_truth_text", item.ground_truth_text},
              {"candidate_text", item.candidate_text},
              {"status", item.status == ItemStatus::kPending ? "pending" : "submitted"},
              {"version", item.version}};
}

bool ExportTable::operator==(const ExportTable& o) const {
  if (rows.size() != o.rows.size() || site_totals != o.site_totals || site_category_totals != o.site_category_totals)
    return false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!(rows[i].annotation == o.rows[i].annotation) || rows[i].site != o.rows[i].site ||
        rows[i].version != o.rows[i].version)
      return false;
  }
  return true;
}

json to_json(const ExportTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json j = to_json(r.annotation);
    j["site"] = r.site.code();
    j["version"] = r.version;
    rows.push_back(std::move(j));
  }
  json sites = json::array();
  for (const auto& [site, total] : t.site_totals) {
    sites.push_back(json{{"site", site.code()}, {"total", total}, {"counts", counts_json(t.site_category_totals.at(site))}});
  }
  return json{{"rows", std::move(rows)}, {"site_totals", std::move(sites)}};
}

ExportTable export_from_json(const json& j) {
  ExportTable t;
  try {
    for (const auto& row : j.at("rows")) {
      ExportRow r{annotation_from_json(row), SiteId(row.at("site").get<std::string>()),
                  row.at("version").get<std::uint64_t>()};
      r.annotation.reviewer_id = row.at("reviewer_id").get<std::string>();
      t.rows.push_back(std::move(r));
    }
    for (const auto& s : j.at("site_totals")) {
      SiteId site(s.at("site").get<std::string>());
      t.site_totals[site] = s.at("total").get<std::int64_t>();
      auto& cats = t.site_category_totals[site];
      for (const auto& [name, n] : s.at("counts").items()) {
        auto cat = parse_error_category(name);
        if (!cat) throw Error(ErrorCode::kParseError, "unknown category '" + name + "'");
        cats[*cat] = n.get<std::int64_t>();
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("export table: ") + e.what());
  }
  return t;
}

// ---------------------------------------------------------------------------
// store

AnnotationStore::AnnotationStore(std::vector<Assignment> assignments, std::vector<ReviewPair> pairs, Options options)
    : assignments_(std::move(assignments)), options_(std::move(options)) {
  for (auto& p : pairs) {
    std::string id = p.report_id;
    if (!pairs_.emplace(id, std::move(p)).second) throw Error(ErrorCode::kDuplicateId, "pair " + id);
  }
  for (const auto& a : assignments_) {
    auto& slots = assigned_[a.reviewer_id];
    for (const auto* list : {&a.unique_reports, &a.overlap_reports}) {
      for (const auto& id : *list) {
        if (!pairs_.contains(id)) throw Error(ErrorCode::kUnknownReport, id + " is assigned but has no pair");
        slots[id] = list == &a.overlap_reports;
      }
    }
  }

  auto index = std::make_shared<Index>();
  std::error_code ec;
  if (std::filesystem::exists(options_.ledger, ec)) {
    std::string text = io::read_file(options_.ledger);
    std::size_t pos = 0;
    std::size_t line_no = 0;
    std::size_t good_end = 0;
    while (pos < text.size()) {
      std::size_t nl = text.find('\n', pos);
      bool torn = nl == std::string::npos;
      std::string_view line(text.data() + pos, (torn ? text.size() : nl) - pos);
      ++line_no;
      try {
        if (!line.empty()) {
          json j = json::parse(line);
          Stored s{annotation_from_json(j.at("annotation")), j.at("version").get<std::uint64_t>()};
          Key key{s.annotation.report_id, s.annotation.reviewer_id};
          if (j.contains("idempotency_key") && !j.at("idempotency_key").is_null()) {
            index->idempotency[j.at("idempotency_key").get<std::string>()] = SubmitResult{s.version, true};
          }
          index->history[key].push_back(std::move(s));
        }
      } catch (const std::exception& e) {
        if (!torn) {
          throw Error(ErrorCode::kParseError,
                      options_.ledger.string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
        spdlog::warn("{}: dropping torn final line {}", options_.ledger.string(), line_no);
        io::write_file_atomic(options_.ledger, std::string_view(text).substr(0, good_end));
        break;
      }
      if (torn) break;
      pos = nl + 1;
      good_end = pos;
    }
  }
  index_ = std::move(index);
}

AnnotationStore::~AnnotationStore() = default;

std::shared_ptr<const AnnotationStore::Index> AnnotationStore::snapshot() const {
  std::lock_guard lock(snap_mu_);
  return index_;
}

bool AnnotationStore::has_reviewer(const std::string& reviewer_id) const { return assigned_.contains(reviewer_id); }

SubmitResult AnnotationStore::submit(const Submission& s) {
  ExpertAnnotation a = s.annotation;
  auto slots = assigned_.find(a.reviewer_id);
  if (slots == assigned_.end()) throw Error(ErrorCode::kUnknownReviewer, a.reviewer_id);
  if (!slots->second.contains(a.report_id)) {
    throw Error(ErrorCode::kNotAssigned, a.report_id + " is not assigned to " + a.reviewer_id);
  }
  validate(a);

  std::lock_guard writer(write_mu_);
  auto current = snapshot();
  if (s.idempotency_key) {
    auto it = current->idempotency.find(*s.idempotency_key);
    if (it != current->idempotency.end()) return SubmitResult{it->second.version, true};
  }
  Key key{a.report_id, a.reviewer_id};
  auto hist = current->history.find(key);
  std::uint64_t latest = hist == current->history.end() ? 0 : hist->second.back().version;
  if (s.expected_version && *s.expected_version != latest) {
    throw Error(ErrorCode::kVersionConflict, a.report_id + "/" + a.reviewer_id + " is at version " +
                                                 std::to_string(latest) + ", client expected " +
                                                 std::to_string(*s.expected_version));
  }

  a.submitted_at = UtcInstant::now();
  Stored stored{a, latest + 1};
  json line{{"annotation", to_json(a)},
            {"version", stored.version},
            {"idempotency_key", s.idempotency_key ? json(*s.idempotency_key) : json(nullptr)}};
  io::append_line(options_.ledger, line.dump());

  auto next = std::make_shared<Index>(*current);
  next->history[key].push_back(std::move(stored));
  if (s.idempotency_key) next->idempotency[*s.idempotency_key] = SubmitResult{latest + 1, true};
  {
    std::lock_guard lock(snap_mu_);
    index_ = std::move(next);
  }
  return SubmitResult{latest + 1, false};
}

QueueView AnnotationStore::queue_for(const std::string& reviewer_id) const {
  auto a = std::find_if(assignments_.begin(), assignments_.end(),
                        [&](const Assignment& x) { return x.reviewer_id == reviewer_id; });
  if (a == assignments_.end()) throw Error(ErrorCode::kUnknownReviewer, reviewer_id);
  auto idx = snapshot();
  QueueView view;
  view.reviewer_id = reviewer_id;
  for (const auto* list : {&a->unique_reports, &a->overlap_reports}) {
    for (const auto& id : *list) {
      ++view.assigned;
      if (idx->history.contains(Key{id, reviewer_id})) {
        ++view.completed;
        continue;
      }
      view.pending.push_back(pair_for(reviewer_id, id));
    }
  }
  return view;
}

QueueItem AnnotationStore::pair_for(const std::string& reviewer_id, const std::string& report_id) const {
  auto slots = assigned_.find(reviewer_id);
  if (slots == assigned_.end()) throw Error(ErrorCode::kUnknownReviewer, reviewer_id);
  auto p = pairs_.find(report_id);
  if (p == pairs_.end()) throw Error(ErrorCode::kUnknownReport, report_id);
  if (!slots->second.contains(report_id)) {
    throw Error(ErrorCode::kNotAssigned, report_id + " is not assigned to " + reviewer_id);
  }
  QueueItem item;
  item.report_id = report_id;
  item.ground_truth_text =
      options_.ground_truth == GroundTruthStyle::kOriginal ? p->second.original_text : p->second.standardized_text;
  item.candidate_text = p->second.candidate_text;
  auto idx = snapshot();
  auto h = idx->history.find(Key{report_id, reviewer_id});
  if (h != idx->history.end()) {
    item.status = ItemStatus::kSubmitted;
    item.version = h->second.back().version;
  }
  return item;
}

ExportTable AnnotationStore::export_annotations() const {
  auto idx = snapshot();
  ExportTable t;
  for (const auto& [key, hist] : idx->history) {
    const Stored& latest = hist.back();
    const SiteId& site = pairs_.at(key.first).site;
    t.rows.push_back(ExportRow{latest.annotation, site, latest.version});
    t.site_totals[site] += latest.annotation.total;
    auto& cats = t.site_category_totals[site];
    for (const auto& [cat, n] : latest.annotation.counts) cats[cat] += n;
  }
  return t;
}

std::vector<ExpertAnnotation> AnnotationStore::history(const std::string& report_id,
                                                       const std::string& reviewer_id) const {
  auto idx = snapshot();
  std::vector<ExpertAnnotation> out;
  auto it = idx->history.find(Key{report_id, reviewer_id});
  if (it == idx->history.end()) return out;
  for (const auto& s : it->second) out.push_back(s.annotation);
  return out;
}

std::map<std::string, double> AnnotationStore::expert_totals() const {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& row : export_annotations().rows) {
    auto& [sum, n] = acc[row.annotation.report_id];
    sum += static_cast<double>(row.annotation.total);
    ++n;
  }
  std::map<std::string, double> out;
  for (const auto& [id, sn] : acc) out[id] = sn.first / sn.second;
  return out;
}

stats::AgreementResult AnnotationStore::agreement() const {
  // Overlap report -> its two reviewers in assignment order.
  std::map<std::string, std::vector<std::string>> owners;
  for (const auto& a : assignments_) {
    for (const auto& id : a.overlap_reports) owners[id].push_back(a.reviewer_id);
  }
  auto idx = snapshot();
  std::map<std::string, double> first, second;
  for (const auto& [id, who] : owners) {
    if (who.size() != 2) continue;
    auto h1 = idx->history.find(Key{id, who[0]});
    auto h2 = idx->history.find(Key{id, who[1]});
    if (h1 == idx->history.end() || h2 == idx->history.end()) continue;
    first[id] = static_cast<double>(h1->second.back().annotation.total);
    second[id] = static_cast<double>(h2->second.back().annotation.total);
  }
  if (first.size() < 2) {
    throw Error(ErrorCode::kTooFewSamples,
                std::to_string(first.size()) + " overlap reports annotated by both reviewers");
  }
  return stats::agreement_overlap(first, second);
}

}  // namespace rexamine::annotate
