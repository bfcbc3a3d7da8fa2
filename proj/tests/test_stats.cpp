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

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "rexamine/stats.hpp"
#include "support/check.hpp"
#include "support/support.hpp"

using namespace rexamine;
using namespace rexamine::stats;

TEST_SUITE("stats") {
  TEST_CASE("paired t-test hand case") {
    std::vector<double> a{1, 2, 3, 4}, b{0, 0, 0, 0};
    auto r = paired_t_test(a, b);
    CHECK(r.mean_diff == -2.5);
    CHECK(r.t_stat == doctest::Approx(-3.8729833).epsilon(1e-7));
    CHECK(r.df == 3);
    CHECK(r.n == 4);
    CHECK(r.p_two_sided == doctest::Approx(2 * testing::quadrature_t_cdf(r.t_stat, 3)).epsilon(1e-9));
  }

  TEST_CASE("sign follows the standardized pairing") {
    std::vector<double> orig{0.5, 0.6, 0.7, 0.4}, stdz{0.3, 0.35, 0.5, 0.25};
    CHECK(paired_t_test(orig, stdz).t_stat < 0);
    CHECK(paired_t_test(stdz, orig).t_stat > 0);
  }

  TEST_CASE("t-test errors") {
    std::vector<double> a{1, 2, 3};
    REX_CHECK_ERROR(paired_t_test(a, a), ErrorCode::kZeroVariance);
    std::vector<double> shifted{2, 3, 4};
    REX_CHECK_ERROR(paired_t_test(a, shifted), ErrorCode::kZeroVariance);
    std::vector<double> one{1}, one_b{2};
    REX_CHECK_ERROR(paired_t_test(one, one_b), ErrorCode::kTooFewSamples);
    std::vector<double> two{1, 2};
    REX_CHECK_ERROR(paired_t_test(a, two), ErrorCode::kLengthMismatch);
    std::vector<double> nan{1, NAN, 3};
    REX_CHECK_ERROR(paired_t_test(a, nan), ErrorCode::kInvalidArgument);
  }

  TEST_CASE("t-test antisymmetry and location invariance") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
      std::size_t len = 2 + rng() % 30;
      std::vector<double> a(len), b(len), a2(len), b2(len);
      for (std::size_t i = 0; i < len; ++i) {
        a[i] = n(rng);
        b[i] = n(rng);
        a2[i] = a[i] + 3.0;
        b2[i] = b[i] + 3.0;
      }
      auto ab = paired_t_test(a, b);
      auto ba = paired_t_test(b, a);
      CHECK(ba.t_stat == -ab.t_stat);
      CHECK(ba.p_two_sided == ab.p_two_sided);
      auto shifted = paired_t_test(a2, b2);
      CHECK(shifted.t_stat == doctest::Approx(ab.t_stat).epsilon(1e-9));
      CHECK(shifted.p_two_sided == doctest::Approx(ab.p_two_sided).epsilon(1e-9));
      CHECK(ab.p_two_sided >= 0.0);
      CHECK(ab.p_two_sided <= 1.0);
    }
  }

  TEST_CASE("t cdf") {
    for (double df : {0.5, 1.0, 3.0, 30.0}) {
      CHECK(student_t_cdf(0.0, df) == 0.5);
      CHECK(student_t_cdf(INFINITY, df) == 1.0);
      CHECK(student_t_cdf(-INFINITY, df) == 0.0);
    }
    CHECK(student_t_cdf(2.0, 10) == doctest::Approx(testing::quadrature_t_cdf(2.0, 10)).epsilon(1e-12));
    // Cauchy closed form
    CHECK(std::fabs(student_t_cdf(1.0, 1) - 0.75) < 1e-14);
    for (double df : {1.0, 2.0, 7.5, 100.0}) {
      for (double t = -8; t <= 8; t += 0.25) {
        CHECK(std::fabs(student_t_cdf(t, df) + student_t_cdf(-t, df) - 1.0) <= 1e-12);
        CHECK(std::fabs(student_t_cdf(t, df) - testing::quadrature_t_cdf(t, df)) <= 1e-10);
      }
    }
    REX_CHECK_ERROR(student_t_cdf(1.0, 0.0), ErrorCode::kInvalidArgument);
    REX_CHECK_ERROR(student_t_cdf(NAN, 3.0), ErrorCode::kInvalidArgument);
  }

  TEST_CASE("p decreases with |t|") {
    double prev = 1.0;
    for (double t = 0.0; t < 10; t += 0.1) {
      double p = 2 * student_t_cdf(-t, 5);
      CHECK(p <= prev);
      prev = p;
    }
  }

  TEST_CASE("incomplete beta") {
    CHECK(regularized_incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2, 3, 1.0) == 1.0);
    // I_x(1, 1) = x; I_x(a, 1) = x^a
    CHECK(regularized_incomplete_beta(1, 1, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(regularized_incomplete_beta(3, 1, 0.5) == doctest::Approx(0.125).epsilon(1e-14));
  }

  TEST_CASE("bonferroni") {
    CHECK(bonferroni_threshold({0.05, 42}) == 0.05 / 42);
    CHECK(bonferroni_threshold({0.05, 42}) == doctest::Approx(0.00119048).epsilon(1e-5));
    CHECK(bonferroni_threshold({0.05, 1}) == 0.05);
    CHECK(bonferroni_threshold({0.05, 7}) == doctest::Approx(0.00714286).epsilon(1e-6));
    CHECK(is_significant(0.001, {0.05, 42}));
    CHECK_FALSE(is_significant(0.05 / 42, {0.05, 42}));
    REX_CHECK_ERROR(bonferroni_threshold({0.05, 0}), ErrorCode::kInvalidArgument);
    REX_CHECK_ERROR(bonferroni_threshold({1.5, 3}), ErrorCode::kInvalidArgument);
  }

  TEST_CASE("average ranks") {
    CHECK(rank_average(std::vector<double>{10, 20, 30}) == std::vector<double>{1, 2, 3});
    CHECK(rank_average(std::vector<double>{5, 5}) == std::vector<double>{1.5, 1.5});
    CHECK(rank_average(std::vector<double>{7, 3, 7, 1}) == std::vector<double>{3.5, 2, 3.5, 1});
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
      std::vector<double> v(1 + rng() % 20);
      for (auto& x : v) x = static_cast<double>(rng() % 5);
      auto r = rank_average(v);
      double n = static_cast<double>(v.size());
      CHECK(std::accumulate(r.begin(), r.end(), 0.0) == n * (n + 1) / 2);
    }
  }

  TEST_CASE("spearman") {
    std::vector<double> x{1, 2, 3};
    CHECK(spearman_rho(x, std::vector<double>{10, 20, 30}).rho == 1.0);
    CHECK(spearman_rho(x, std::vector<double>{3, 2, 1}).rho == -1.0);
    std::vector<double> tx{1, 2, 2, 4}, ty{1, 3, 2, 4};
    CHECK(std::fabs(spearman_rho(tx, ty).rho - testing::brute_spearman(tx, ty)) <= 1e-12);
    REX_CHECK_ERROR(spearman_rho(x, std::vector<double>{1, 1, 1}), ErrorCode::kConstantInput);
    REX_CHECK_ERROR(spearman_rho(x, std::vector<double>{1, 2}), ErrorCode::kLengthMismatch);
    REX_CHECK_ERROR(spearman_rho(std::vector<double>{1}, std::vector<double>{2}), ErrorCode::kTooFewSamples);
  }

  TEST_CASE("spearman is invariant under increasing transforms") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; ++i) {
      std::size_t n = 3 + rng() % 20;
      std::vector<double> x(n), y(n), fx(n), gy(n);
      for (std::size_t k = 0; k < n; ++k) {
        x[k] = static_cast<double>(rng() % 7);
        y[k] = static_cast<double>(rng() % 7);
        fx[k] = x[k] * x[k] * x[k] + 2;
        gy[k] = std::exp(y[k]);
      }
      try {
        auto r = spearman_rho(x, y).rho;
        CHECK(spearman_rho(fx, gy).rho == r);
        CHECK(std::fabs(r - testing::brute_spearman(x, y)) <= 1e-10);
        CHECK(std::fabs(r) <= 1.0);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kConstantInput);
      }
    }
  }

  TEST_CASE("overlap agreement") {
    std::map<std::string, double> a{{"r1", 1}, {"r2", 2}, {"r3", 3}};
    auto same = agreement_overlap(a, a);
    CHECK(same.exact_match_rate == 1.0);
    CHECK(same.spearman.rho == 1.0);
    std::map<std::string, double> rev{{"r1", 3}, {"r2", 2}, {"r3", 1}};
    CHECK(agreement_overlap(a, rev).spearman.rho == -1.0);
    std::map<std::string, double> p{{"a", 2}, {"b", 2}, {"c", 5}, {"d", 1}};
    std::map<std::string, double> q{{"a", 2}, {"b", 3}, {"c", 5}, {"d", 1}};
    auto pq = agreement_overlap(p, q);
    CHECK(pq.exact_match_rate == 0.75);
    CHECK(std::fabs(pq.spearman.rho - testing::brute_spearman({2, 2, 5, 1}, {2, 3, 5, 1})) <= 1e-12);
    std::map<std::string, double> other{{"r1", 1}, {"r2", 2}, {"r9", 3}};
    REX_CHECK_ERROR(agreement_overlap(a, other), ErrorCode::kLengthMismatch);
  }
}
