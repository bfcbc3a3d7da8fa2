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

// Test helpers: scratch directories, brute-force oracles, and a synthetic
// multi-site corpus.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "rexamine/types.hpp"

namespace rexamine::testing {

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Clipped 1/2-gram BLEU computed by enumerating every n-gram position pair.
double brute_bleu2(const std::vector<std::string>& cand, const std::vector<std::string>& ref);

// Ranks by counting, then Pearson by textbook formula in long double.
double brute_spearman(const std::vector<double>& x, const std::vector<double>& y);

// Student-t CDF by adaptive Gauss-Kronrod integration of the density.
double quadrature_t_cdf(double t, double df);

// Synthetic reports: `sites` sites with `per_site` reports each. Every
// report has an original (site-styled) text and a canonical standardized
// text with enough editable sentences for four deterministic errors.
struct SyntheticReport {
  ReportRecord record;
  std::string standardized;
};

std::vector<SyntheticReport> synthetic_corpus(std::size_t sites, std::size_t per_site, std::uint64_t seed);

std::string site_code(std::size_t i);

}  // namespace rexamine::testing
