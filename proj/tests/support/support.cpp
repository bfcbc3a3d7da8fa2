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

#include "support.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <map>
#include <unistd.h>

namespace rexamine::testing {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("rexamine-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

double brute_bleu2(const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
  double logp = 0.0;
  for (std::size_t n = 1; n <= 2; ++n) {
    if (cand.size() < n) {
      // A one-token candidate has no bigrams; it keeps full credit only
      // against a one-token reference.
      if (n == 2 && ref.size() == 1) continue;
      return 0.0;
    }
    std::size_t total = cand.size() - n + 1;
    std::size_t matched = 0;
    std::vector<bool> used(ref.size() >= n ? ref.size() - n + 1 : 0, false);
    // Greedy matching of each candidate n-gram to an unused identical
    // reference n-gram equals min(count_c, count_r) per n-gram type.
    for (std::size_t i = 0; i < total; ++i) {
      for (std::size_t j = 0; j < used.size(); ++j) {
        if (used[j]) continue;
        bool same = true;
        for (std::size_t k = 0; k < n; ++k) same = same && cand[i + k] == ref[j + k];
        if (same) {
          used[j] = true;
          ++matched;
          break;
        }
      }
    }
    if (matched == 0) return 0.0;
    logp += std::log(static_cast<double>(matched) / static_cast<double>(total)) / 2.0;
  }
  double bp = cand.size() < ref.size() ? std::exp(1.0 - static_cast<double>(ref.size()) / cand.size()) : 1.0;
  return bp * std::exp(logp);
}

namespace {

std::vector<long double> count_ranks(const std::vector<double>& v) {
  std::vector<long double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = static_cast<long double>(less) + (static_cast<long double>(equal) + 1.0L) / 2.0L;
  }
  return r;
}

}  // namespace

double brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto rx = count_ranks(x);
  auto ry = count_ranks(y);
  long double n = static_cast<long double>(x.size());
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

double quadrature_t_cdf(double t, double df) {
  const double log_norm = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI);
  auto density = [&](double x) { return std::exp(log_norm - (df + 1) / 2 * std::log1p(x * x / df)); };
  // Composite rule: 32 panels, one 61-point Gauss-Kronrod pass each.
  const int panels = 32;
  const double h = std::fabs(t) / panels;
  double area = 0.0;
  for (int i = 0; i < panels; ++i) {
    area += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(density, i * h, (i + 1) * h, 0);
  }
  return t < 0 ? 0.5 - area : 0.5 + area;
}

std::string site_code(std::size_t i) {
  static const char* kCodes[] = {"AU", "CN", "ES", "IN", "UK", "US", "BR", "DE"};
  return i < std::size(kCodes) ? kCodes[i] : "S" + std::to_string(i);
}

namespace {

const std::vector<std::string>& sentence_pool() {
  static const std::vector<std::string> kPool = {
      "There is a small left pleural effusion.",
      "The heart size is normal.",
      "No pneumothorax.",
      "There is mild atelectasis in the right lower lobe.",
      "The opacity in the left upper lobe is unchanged compared to prior.",
      "There is moderate cardiomegaly.",
      "The endotracheal tube terminates above the carina.",
      "There is no focal consolidation.",
      "Severe degenerative changes of the thoracic spine are present.",
      "The right hilar contour is stable.",
      "A large right pleural effusion is present.",
      "The lungs are clear.",
      "The central venous catheter tip is in the distal superior vena cava.",
      "Mild pulmonary vascular congestion is new since the prior study.",
      "There is a lateral left rib fracture.",
      "The mediastinum is not widened.",
  };
  return kPool;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string site_style(std::size_t site, const std::vector<std::string>& sentences) {
  std::string out;
  switch (site % 6) {
    case 0:
      out = "FINDINGS:\n";
      for (const auto& s : sentences) out += upper(s) + "\n";
      break;
    case 1:
      out = "Findings\n";
      for (const auto& s : sentences) out += "- " + s + "\n";
      break;
    case 2:
      out = "Comparison: none.\n";
      for (const auto& s : sentences) out += s + " ";
      break;
    case 3:
      for (std::size_t i = 0; i < sentences.size(); ++i) out += std::to_string(i + 1) + ") " + sentences[i] + "\n";
      break;
    case 4:
      out = "Report:\n";
      for (const auto& s : sentences) out += lower(s) + " ";
      break;
    default:
      for (const auto& s : sentences) out += s + "\n\n";
      break;
  }
  return out;
}

}  // namespace

std::vector<SyntheticReport> synthetic_corpus(std::size_t sites, std::size_t per_site, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& pool = sentence_pool();
  std::vector<SyntheticReport> out;
  for (std::size_t s = 0; s < sites; ++s) {
    for (std::size_t r = 0; r < per_site; ++r) {
      std::vector<std::size_t> idx(pool.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::shuffle(idx.begin(), idx.end(), rng);
      std::size_t k = 5 + rng() % 4;
      std::vector<std::string> chosen;
      for (std::size_t i = 0; i < k; ++i) chosen.push_back(pool[idx[i]]);

      SyntheticReport rep;
      char id[32];
      std::snprintf(id, sizeof id, "%s-%03zu", site_code(s).c_str(), r);
      rep.record.report_id = id;
      rep.record.site = SiteId(site_code(s));
      rep.record.text = site_style(s, chosen);
      rep.standardized = "FINDINGS:\n";
      for (std::size_t i = 0; i + 1 < chosen.size(); ++i) rep.standardized += chosen[i] + (i + 2 < chosen.size() ? " " : "");
      rep.standardized += "\n\nIMPRESSION:\n" + chosen.back();
      out.push_back(std::move(rep));
    }
  }
  return out;
}

}  // namespace rexamine::testing
