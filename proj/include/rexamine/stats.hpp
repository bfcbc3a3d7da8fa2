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

// Statistical battery for the audit: paired t-test with exact two-sided
// p-values, Bonferroni correction, and Spearman rank correlation with
// average ranks for ties.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace rexamine::stats {

struct TTestResult {
  double t_stat = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
  double mean_diff = 0.0;
  std::size_t n = 0;
};

// Paired t-test on d_i = b_i - a_i, where `a` holds the scores against the
// original reference and `b` those against the standardized reference, so
// t < 0 means the standardized pairing scored lower.
// Errors: TooFewSamples (n < 2), LengthMismatch, ZeroVariance (all d_i
// equal), InvalidArgument (non-finite input).
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

// I_x(a, b), continued fraction (modified Lentz) with the symmetry switch
// I_x(a, b) = 1 - I_{1-x}(b, a). `xc` is 1 - x, passed separately so callers
// can supply it without cancellation.
double regularized_incomplete_beta(double a, double b, double x, double xc);
inline double regularized_incomplete_beta(double a, double b, double x) {
  return regularized_incomplete_beta(a, b, x, 1.0 - x);
}

// Student-t CDF. Handles t = +/-inf; throws InvalidArgument for df <= 0 or
// NaN t.
double student_t_cdf(double t, double df);

struct SignificanceConfig {
  double alpha = 0.05;
  std::size_t n_tests = 1;
};

// alpha / n_tests. Throws InvalidArgument for alpha outside (0,1) or
// n_tests == 0.
double bonferroni_threshold(const SignificanceConfig& cfg);

inline bool is_significant(double p, const SignificanceConfig& cfg) { return p < bonferroni_threshold(cfg); }

// 1-based fractional ranks; ties share the mean of the positions they
// occupy.
std::vector<double> rank_average(std::span<const double> values);

struct SpearmanResult {
  double rho = 0.0;
  std::size_t n = 0;
};

// Pearson correlation of average ranks. Errors: LengthMismatch,
// TooFewSamples, ConstantInput.
SpearmanResult spearman_rho(std::span<const double> x, std::span<const double> y);

// Pearson correlation. Same errors as spearman_rho.
double pearson(std::span<const double> x, std::span<const double> y);

struct AgreementResult {
  double exact_match_rate = 0.0;
  SpearmanResult spearman;
};

// Agreement between two reviewers' totals over the same set of reports
// (keyed by report id). Throws LengthMismatch when the report sets differ.
AgreementResult agreement_overlap(const std::map<std::string, double>& reviewer1,
                                  const std::map<std::string, double>& reviewer2);

}  // namespace rexamine::stats
