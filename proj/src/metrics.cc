// Copyright 2026 The geocooc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "geocooc/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "geocooc/errors.h"

namespace geocooc::eval {

std::vector<bool> MatchResult::correct_flags() const {
  std::vector<bool> out;
  out.reserve(retained.size());
  for (const auto i : retained) out.push_back(scanned[i].flag == MatchFlag::kCorrect);
  return out;
}

MatchResult match_predictions(std::span<const geo::Point3> ranked, std::span<const geo::Point3> user_peaks,
                              double pc, bool strict, std::size_t depth) {
  if (!(pc > 0.0)) throw ValidationError("PC threshold must be > 0");
  const double pc2 = pc * pc;
  MatchResult out;
  std::vector<geo::Point3> accepted;  // non-disqualified so far
  for (std::size_t i = 0; i < ranked.size() && out.retained.size() < depth; ++i) {
    MatchedItem item;
    item.input_index = i;
    const bool dup = std::any_of(accepted.begin(), accepted.end(), [&](const geo::Point3& a) {
      return geo::squared_chord_distance(a, ranked[i]) <= pc2;
    });
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < user_peaks.size(); ++j) {
      const double d2 = geo::squared_chord_distance(user_peaks[j], ranked[i]);
      if (d2 < best) {
        best = d2;
        best_j = j;
      }
    }
    item.distance = std::sqrt(best);
    if (dup) {
      item.flag = MatchFlag::kDisqualified;
    } else {
      accepted.push_back(ranked[i]);
      if (!user_peaks.empty() && best <= pc2) {
        item.flag = MatchFlag::kCorrect;
        item.user_peak = best_j;
      }
    }
    out.scanned.push_back(item);
    if (item.flag != MatchFlag::kDisqualified || strict) out.retained.push_back(out.scanned.size() - 1);
  }
  return out;
}

double precision_at(const std::vector<bool>& correct, std::size_t k) {
  if (k == 0) throw ValidationError("precision cutoff must be > 0");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < correct.size() && i < k; ++i) hits += correct[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double map_at(const std::vector<bool>& correct, std::size_t k) {
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < correct.size() && i < k; ++i) {
    if (!correct[i]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return hits ? sum / static_cast<double>(hits) : 0.0;
}

std::optional<double> ndcg_ip(std::span<const NdcgHit> retained, std::span<const double> test_amplitudes,
                              std::size_t depth) {
  if (test_amplitudes.empty()) return std::nullopt;
  std::vector<double> ideal;
  ideal.reserve(test_amplitudes.size());
  for (const double a : test_amplitudes) {
    if (!(a > 0.0)) throw ValidationError("test location amplitude must be > 0");
    ideal.push_back(1.0 / a);
  }
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < ideal.size() && i < depth; ++i) idcg += ideal[i] / std::log2(static_cast<double>(i) + 2.0);
  if (!(idcg > 0.0)) return std::nullopt;

  std::set<std::size_t> credited;
  double dcg = 0.0;
  for (std::size_t i = 0; i < retained.size() && i < depth; ++i) {
    const auto& h = retained[i];
    if (!h.correct) continue;
    if (h.user_peak && !credited.insert(*h.user_peak).second) continue;
    if (!(h.amplitude > 0.0)) throw ValidationError("recommended peak amplitude must be > 0");
    dcg += (1.0 / h.amplitude) / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / idcg;
}

double BenefitRatio::value() const {
  if (deteriorated > 0) return static_cast<double>(improved) / static_cast<double>(deteriorated);
  if (improved > 0) return std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

BenefitRatio benefit_ratio(std::span<const std::pair<double, double>> baseline_vs_method) {
  BenefitRatio br;
  for (const auto& [base, method] : baseline_vs_method) {
    if (method > base) {
      ++br.improved;
    } else if (method < base) {
      ++br.deteriorated;
    } else {
      ++br.ties;
    }
  }
  return br;
}

bool tourist_filter(std::span<const Timestamp> times, int n, std::chrono::seconds window) {
  if (n < 1) throw ValidationError("tourist filter needs n >= 1");
  std::vector<std::chrono::sys_seconds> t;
  t.reserve(times.size());
  for (const auto& ts : times) t.push_back(ts.utc);
  std::sort(t.begin(), t.end());
  int windows = 0;
  std::size_t i = 0;
  while (i < t.size()) {
    ++windows;
    if (windows > n) return false;
    const auto end = t[i] + window;
    while (i < t.size() && t[i] < end) ++i;
  }
  return true;
}

bool tourist_filter(std::span<const ingest::Geotag> tags, int n, std::chrono::seconds window) {
  std::vector<Timestamp> times;
  times.reserve(tags.size());
  for (const auto& g : tags) times.push_back(g.taken_at);
  return tourist_filter(times, n, window);
}

std::chrono::sys_days photo_day(const Timestamp& t) {
  using namespace std::chrono;
  return floor<days>(t.local() - hours(4) - minutes(30));
}

std::optional<DaySplit> within_city_split(std::span<const ingest::Geotag> tags) {
  if (tags.empty()) return std::nullopt;
  std::chrono::sys_days last = photo_day(tags.front().taken_at);
  std::chrono::sys_days first = last;
  for (const auto& g : tags) {
    const auto d = photo_day(g.taken_at);
    last = std::max(last, d);
    first = std::min(first, d);
  }
  if (first == last) return std::nullopt;
  DaySplit split;
  for (const auto& g : tags) (photo_day(g.taken_at) == last ? split.test : split.train).push_back(g);
  return split;
}

}  // namespace geocooc::eval
