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

#include "rexamine/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rexamine/error.hpp"
#include "rexamine/io.hpp"
#include "rexamine/serialize.hpp"
#include "rexamine/text.hpp"

namespace rexamine {

using nlohmann::json;

namespace {

[[noreturn]] void row_error(std::size_t row, const std::string& cause) {
  throw Error(ErrorCode::kParseError, "row " + std::to_string(row) + ": " + cause);
}

// RFC 4180 records: quoted fields may contain separators, quotes ("") and
// newlines. Returns (starting line, fields) per record.
std::vector<std::pair<std::size_t, std::vector<std::string>>> parse_csv(const std::string& data) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_field = [&] {
    fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    bool blank = fields.size() == 1 && fields[0].empty();
    if (!blank) rows.emplace_back(record_line, std::move(fields));
    fields.clear();
  };

  for (std::size_t i = 0; i < data.size(); ++i) {
    char c = data[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) row_error(line, "unexpected quote inside unquoted field");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) row_error(record_line, "unterminated quoted field");
  if (field_started || !field.empty() || !fields.empty()) end_record();
  return rows;
}

std::vector<ReportRecord> read_jsonl_records(const std::string& data) {
  std::vector<ReportRecord> out;
  std::istringstream in(data);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (text::is_blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      row_error(row, std::string("invalid JSON: ") + e.what());
    }
    try {
      out.push_back(report_from_json(j));
    } catch (const Error& e) {
      row_error(row, e.what());
    }
  }
  return out;
}

std::vector<ReportRecord> read_csv_records(const std::string& data) {
  auto rows = parse_csv(data);
  if (rows.empty()) return {};
  const auto& header = rows.front().second;
  std::optional<std::size_t> id_col, site_col, text_col, note_col;
  std::vector<std::pair<std::size_t, std::string>> section_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name(text::trim(header[i]));
    if (name == "report_id") id_col = i;
    else if (name == "site") site_col = i;
    else if (name == "text") text_col = i;
    else if (name == "language_note") note_col = i;
    else if (name.rfind("section.", 0) == 0) section_cols.emplace_back(i, name.substr(8));
  }
  if (!id_col || !site_col || !text_col) {
    row_error(rows.front().first, "header must name report_id, site and text columns");
  }
  std::vector<ReportRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line, fields] = rows[r];
    if (fields.size() != header.size()) {
      row_error(line, "expected " + std::to_string(header.size()) + " fields, got " +
                          std::to_string(fields.size()));
    }
    ReportRecord rec;
    rec.report_id = fields[*id_col];
    if (fields[*site_col].empty()) row_error(line, "empty site");
    rec.site = SiteId(fields[*site_col]);
    rec.text = fields[*text_col];
    if (note_col) rec.language_note = fields[*note_col];
    for (const auto& [col, name] : section_cols) {
      if (!fields[col].empty()) rec.sections.emplace(name, fields[col]);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

Corpus::Corpus() : bundle_mutex_(std::make_unique<std::shared_mutex>()) {}
Corpus::Corpus(Corpus&&) noexcept = default;
Corpus& Corpus::operator=(Corpus&&) noexcept = default;
Corpus::~Corpus() = default;

Corpus Corpus::ingest(const std::filesystem::path& path, CorpusFormat format) {
  const std::string data = io::read_file(path);
  std::vector<ReportRecord> records =
      format == CorpusFormat::kJsonl ? read_jsonl_records(data) : read_csv_records(data);
  return from_records(std::move(records));
}

Corpus Corpus::from_records(std::vector<ReportRecord> records) {
  if (records.empty()) throw Error(ErrorCode::kEmptyCorpus, "no records");
  Corpus c;
  std::set<SiteId> sites;
  for (std::size_t i = 0; i < records.size(); ++i) {
    ReportRecord& r = records[i];
    const std::size_t row = i + 1;
    if (r.report_id.empty()) row_error(row, "empty report_id");
    try {
      r.text = text::normalize(r.text);
      for (auto& [name, body] : r.sections) body = text::normalize(body);
    } catch (const Error& e) {
      row_error(row, e.what());
    }
    if (text::is_blank(r.text)) row_error(row, "text is empty after trimming");
    if (!c.index_.emplace(r.report_id, i).second) {
      throw Error(ErrorCode::kDuplicateId, "report_id '" + r.report_id + "' appears more than once");
    }
    sites.insert(r.site);
  }
  c.records_ = std::move(records);
  c.sites_.assign(sites.begin(), sites.end());
  return c;
}

const ReportRecord* Corpus::find(std::string_view report_id) const {
  auto it = index_.find(std::string(report_id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

const ReportRecord& Corpus::at(std::string_view report_id) const {
  const ReportRecord* r = find(report_id);
  if (r == nullptr) throw Error(ErrorCode::kUnknownReport, "no report '" + std::string(report_id) + "'");
  return *r;
}

std::vector<const ReportRecord*> Corpus::records_for(const SiteId& site) const {
  std::vector<const ReportRecord*> out;
  for (const auto& r : records_) {
    if (r.site == site) out.push_back(&r);
  }
  return out;
}

void Corpus::export_jsonl(const std::filesystem::path& path) const {
  std::string out;
  for (const auto& r : records_) {
    out += json(r).dump();
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

void Corpus::attach_bundle_store(const std::filesystem::path& path) {
  std::unique_lock lock(*bundle_mutex_);
  if (std::filesystem::exists(path)) {
    for (auto& b : read_bundles(path)) {
      if (find(b.report_id) == nullptr) {
        throw Error(ErrorCode::kUnknownReport, "bundle file names unknown report '" + b.report_id + "'");
      }
      bundles_.insert_or_assign(b.report_id, std::move(b));
    }
  }
  bundle_path_ = path;
}

void Corpus::store_bundle(CandidateBundle bundle) {
  if (find(bundle.report_id) == nullptr) {
    throw Error(ErrorCode::kUnknownReport, "no report '" + bundle.report_id + "'");
  }
  validate(bundle);
  std::unique_lock lock(*bundle_mutex_);
  std::string id = bundle.report_id;
  bundles_.insert_or_assign(std::move(id), std::move(bundle));
  persist_locked();
}

std::optional<CandidateBundle> Corpus::bundle(std::string_view report_id) const {
  std::shared_lock lock(*bundle_mutex_);
  auto it = bundles_.find(std::string(report_id));
  if (it == bundles_.end()) return std::nullopt;
  return it->second;
}

std::vector<CandidateBundle> Corpus::bundles() const {
  std::shared_lock lock(*bundle_mutex_);
  std::vector<CandidateBundle> out;
  out.reserve(bundles_.size());
  for (const auto& [id, b] : bundles_) out.push_back(b);
  std::sort(out.begin(), out.end(),
            [](const CandidateBundle& a, const CandidateBundle& b) { return a.report_id < b.report_id; });
  return out;
}

void Corpus::persist_locked() const {
  if (!bundle_path_) return;
  std::vector<const CandidateBundle*> sorted;
  for (const auto& [id, b] : bundles_) sorted.push_back(&b);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->report_id < b->report_id; });
  std::string out;
  for (const auto* b : sorted) {
    out += json(*b).dump();
    out += '\n';
  }
  io::write_file_atomic(*bundle_path_, out);
}

std::vector<ReportRecord> sample_per_site(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  std::vector<ReportRecord> out;
  if (k == 0) return out;
  std::mt19937_64 rng(seed);
  for (const SiteId& site : corpus.sites()) {
    auto pool = corpus.records_for(site);
    if (pool.size() < k) {
      throw Error(ErrorCode::kInsufficientRecords,
                  "site " + site.code() + " has " + std::to_string(pool.size()) + " records, " +
                      std::to_string(k) + " requested");
    }
    // Partial Fisher-Yates: the first k slots become the sample.
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      out.push_back(*pool[i]);
    }
  }
  return out;
}

std::vector<CandidateBundle> read_bundles(const std::filesystem::path& path) {
  std::istringstream in(io::read_file(path));
  std::vector<CandidateBundle> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (text::is_blank(line)) continue;
    try {
      out.push_back(bundle_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      row_error(row, std::string("invalid JSON: ") + e.what());
    } catch (const Error& e) {
      row_error(row, e.what());
    }
  }
  return out;
}

void write_bundles(const std::filesystem::path& path, const std::vector<CandidateBundle>& bundles) {
  std::string out;
  for (const auto& b : bundles) {
    out += json(b).dump();
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

}  // namespace rexamine
