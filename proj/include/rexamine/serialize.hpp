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

// JSON mappings for the on-disk formats (reports.jsonl, bundles.jsonl).

#include "json.hpp"
#include "rexamine/types.hpp"

namespace rexamine {

void to_json(nlohmann::json& j, const SiteId& s);
void to_json(nlohmann::json& j, const ReportRecord& r);
void to_json(nlohmann::json& j, const InjectedError& e);
void to_json(nlohmann::json& j, const GenerationProvenance& p);
void to_json(nlohmann::json& j, const CandidateBundle& b);

// These throw Error(kParseError) with the offending field named.
ReportRecord report_from_json(const nlohmann::json& j);
InjectedError injected_error_from_json(const nlohmann::json& j);
GenerationProvenance provenance_from_json(const nlohmann::json& j);
CandidateBundle bundle_from_json(const nlohmann::json& j);

}  // namespace rexamine
