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

#include "rexamine/stats.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rexamine/error.hpp"
#include "rexamine/kernels/kernels.hpp"

namespace rexamine::stats {
namespace {

constexpr double kCfEpsilon = 1e-12;
constexpr int kCfMaxIterations = 300;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a,b) (Numerical Recipes betacf), evaluated with
// the modified Lentz method.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kCfMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kCfEpsilon) return h;
  }
  spdlog::warn("incomplete beta: continued fraction not converged after {} iterations (a={}, b={}, x={})",
               kCfMaxIterations, a, b, x);
  return h;
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kInvalidArgument, std::string(what) + " contains a non-finite value");
  }
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x, double xc) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::kInvalidArgument, "incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (xc <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(xc);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, xc) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::kInvalidArgument, "student_t_cdf needs df > 0");
  if (std::isnan(t)) throw Error(ErrorCode::kInvalidArgument, "student_t_cdf of NaN");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  if (t == 0.0) return 0.5;
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double xc = t2 / (df + t2);
  const double tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x, xc);
  return t > 0.0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kLengthMismatch, "paired samples differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw Error(ErrorCode::kTooFewSamples, "paired t-test needs n >= 2, got " + std::to_string(n));
  require_finite(a, "sample a");
  require_finite(b, "sample b");

  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = b[i] - a[i];
  if (std::all_of(d.begin(), d.end(), [&](double v) { return v == d.front(); })) {
    throw Error(ErrorCode::kZeroVariance, "all paired differences are equal");
  }
  const double nd = static_cast<double>(n);
  const double mean = kernels::sum(d) / nd;
  const double ss = kernels::centered_dot(d, mean, d, mean);
  const double sd = std::sqrt(ss / (nd - 1.0));
  TTestResult r;
  r.n = n;
  r.df = nd - 1.0;
  r.mean_diff = mean;
  r.t_stat = mean / (sd / std::sqrt(nd));
  r.p_two_sided = std::clamp(2.0 * student_t_cdf(-std::fabs(r.t_stat), r.df), 0.0, 1.0);
  return r;
}

double bonferroni_threshold(const SignificanceConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  if (cfg.n_tests == 0) throw Error(ErrorCode::kInvalidArgument, "n_tests must be positive");
  return cfg.alpha / static_cast<double>(cfg.n_tests);
}

std::vector<double> rank_average(std::span<const double> values) {
  require_finite(values, "rank input");
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) -> ranks i+1..j+1
    const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kLengthMismatch, "correlation inputs differ in length");
  if (x.size() < 2) throw Error(ErrorCode::kTooFewSamples, "correlation needs at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = kernels::sum(x) / n;
  const double my = kernels::sum(y) / n;
  const double vx = kernels::centered_dot(x, mx, x, mx);
  const double vy = kernels::centered_dot(y, my, y, my);
  if (vx == 0.0 || vy == 0.0) throw Error(ErrorCode::kConstantInput, "correlation of a constant vector");
  const double cov = kernels::centered_dot(x, mx, y, my);
  return std::clamp(cov / std::sqrt(vx * vy), -1.0, 1.0);
}

SpearmanResult spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kLengthMismatch, "spearman inputs differ in length");
  if (x.size() < 2) throw Error(ErrorCode::kTooFewSamples, "spearman needs at least 2 points");
  auto distinct = [](std::span<const double> v) {
    return std::any_of(v.begin(), v.end(), [&](double e) { return e != v.front(); });
  };
  if (!distinct(x) || !distinct(y)) throw Error(ErrorCode::kConstantInput, "spearman input has a single distinct value");
  const auto rx = rank_average(x);
  const auto ry = rank_average(y);
  return SpearmanResult{pearson(rx, ry), x.size()};
}

AgreementResult agreement_overlap(const std::map<std::string, double>& reviewer1,
                                  const std::map<std::string, double>& reviewer2) {
  if (reviewer1.size() != reviewer2.size()) {
    throw Error(ErrorCode::kLengthMismatch, "reviewers annotated different report sets");
  }
  std::vector<double> a, b;
  std::size_t exact = 0;
  for (const auto& [id, total] : reviewer1) {
    auto it = reviewer2.find(id);
    if (it == reviewer2.end()) throw Error(ErrorCode::kLengthMismatch, "report " + id + " missing for second reviewer");
    a.push_back(total);
    b.push_back(it->second);
    if (total == it->second) ++exact;
  }
  if (a.size() < 2) throw Error(ErrorCode::kTooFewSamples, "agreement needs at least 2 shared reports");
  AgreementResult r;
  r.exact_match_rate = static_cast<double>(exact) / static_cast<double>(a.size());
  r.spearman = spearman_rho(a, b);
  return r;
}

}  // namespace rexamine::stats
