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

#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "geocooc/geo.h"
#include "geocooc/ingest.h"
#include "geocooc/timeutil.h"

namespace geocooc::eval {

enum class MatchFlag { kCorrect, kIncorrect, kDisqualified };

struct MatchedItem {
  std::size_t input_index = 0;  // position in the ranked input
  MatchFlag flag = MatchFlag::kIncorrect;
  std::optional<std::size_t> user_peak;  // nearest user peak when correct
  double distance = 0.0;                 // to the nearest user peak
};

struct MatchResult {
  std::vector<MatchedItem> scanned;   // input order, up to the scan depth
  std::vector<std::size_t> retained;  // indices into `scanned` that occupy a rank

  std::vector<bool> correct_flags() const;
};

// Scans the ranked locations in order. An item within pc of an earlier non-disqualified
// item is disqualified; otherwise it is correct iff its nearest user peak is within pc.
// Disqualified items take no rank unless strict, where they stay in place as misses.
// Scanning stops once `depth` items are retained.
MatchResult match_predictions(std::span<const geo::Point3> ranked, std::span<const geo::Point3> user_peaks,
                              double pc, bool strict = false, std::size_t depth = SIZE_MAX);

// Correct items among the first k, divided by k.
double precision_at(const std::vector<bool>& correct, std::size_t k = 5);

// Mean of precision@i over the correct ranks i <= k; 0 without hits.
double map_at(const std::vector<bool>& correct, std::size_t k = 50);

struct NdcgHit {
  bool correct = false;
  double amplitude = 0.0;                // prior amplitude of the recommended peak
  std::optional<std::size_t> user_peak;  // each user peak is credited once
};

// Gain 1/amplitude, discount 1/log2(i + 1). The ideal list holds every test location
// in ascending amplitude. Returns nullopt when there are no test locations.
std::optional<double> ndcg_ip(std::span<const NdcgHit> retained, std::span<const double> test_amplitudes,
                              std::size_t depth = 50);

struct BenefitRatio {
  std::size_t improved = 0;
  std::size_t deteriorated = 0;
  std::size_t ties = 0;

  // improved / deteriorated; +inf with no deteriorations, NaN for 0/0.
  double value() const;
};

BenefitRatio benefit_ratio(std::span<const std::pair<double, double>> baseline_vs_method);

// True iff the timestamps fit in at most n windows of `window` length (greedy cover).
bool tourist_filter(std::span<const Timestamp> times, int n,
                    std::chrono::seconds window = std::chrono::days(14));
bool tourist_filter(std::span<const ingest::Geotag> tags, int n,
                    std::chrono::seconds window = std::chrono::days(14));

struct DaySplit {
  std::vector<ingest::Geotag> train;  // all earlier days
  std::vector<ingest::Geotag> test;   // last populated day
};

// Day of a photo: local wall-clock time shifted back 4.5 h, truncated to a date.
std::chrono::sys_days photo_day(const Timestamp& t);

// nullopt when the tags cover fewer than two days.
std::optional<DaySplit> within_city_split(std::span<const ingest::Geotag> tags);

}  // namespace geocooc::eval
