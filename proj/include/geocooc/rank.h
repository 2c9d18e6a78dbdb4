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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "geocooc/cooccur.h"
#include "geocooc/scalespace.h"

namespace geocooc::rank {

enum class Method { kPrior, kDirect, kCosine, kRankDiff };

std::string to_string(Method m);
Method method_from_string(const std::string& s);
std::vector<Method> methods_from_list(const std::string& comma_separated);

struct RankedItem {
  std::size_t index = 0;  // target peak index
  double score = 0.0;
};

struct Ranking {
  Method method = Method::kPrior;
  std::vector<RankedItem> items;      // non-increasing score, ties by ascending index
  std::vector<std::size_t> excluded;  // indices that could not be scored

  std::vector<std::size_t> order() const;
};

// Sorts indices 0..n-1 by descending score, ties by ascending index. Indices listed in
// `excluded` are left out.
Ranking rank_scores(Method method, std::span<const double> scores, std::vector<std::size_t> excluded = {});

Ranking prior_rank(const scalespace::PeakSet& target);

// Kernel weights: w_m = sum over user peaks u of exp(-D(source_m, u) / 2 sigma^2).
std::vector<double> start_weights(const cooccur::CoocModel& model, std::span<const geo::Point3> user_peaks);

// Indicator weights for explicit start peaks; repeated indices add up.
std::vector<double> start_indicator(const cooccur::CoocModel& model, std::span<const std::size_t> starts);

// sum_m w_m * PhiCC(m, n) for every target n.
std::vector<double> combined_scores(const cooccur::CoocModel& model, std::span<const double> weights);

// Summed PhiCC rows of the start peaks.
std::vector<double> aggregate_multi_start(std::span<const std::size_t> starts, const cooccur::CoocModel& model);

// Personalised score S^CC. Throws ConfigError on sigma mismatch, ValidationError when
// the user has no peaks.
Ranking score_cc(std::span<const geo::Point3> user_peaks, const cooccur::CoocModel& model, double sigma);

// score(n) = cc(n) / sqrt(source_norm * target_amplitude(n)). Targets with zero
// amplitude, or all targets when source_norm is zero, are excluded.
Ranking cosine_scores(std::span<const double> cc, double source_norm, std::span<const double> target_amplitudes);
Ranking cosine_scores(const cooccur::CoocModel& model, std::span<const std::size_t> starts);

// RD(n) = Psi(R2(n)) - Psi(R1(n)); R1 from prior amplitudes, R2 from cc scores, Psi the
// amplitudes in descending order.
Ranking rankdiff_scores(std::span<const double> cc, std::span<const double> prior_amplitudes);

// A query: explicit peaks (indicator weights) or free positions (kernel weights).
struct StartSpec {
  std::vector<geo::Point3> points;
  std::vector<std::size_t> peaks;

  bool empty() const { return points.empty() && peaks.empty(); }
};

std::vector<double> start_weights(const cooccur::CoocModel& model, const StartSpec& start);

// Dispatches to the chosen criterion. Prior ignores the start.
Ranking recommend(const cooccur::CoocModel& model, const StartSpec& start, Method method);

// Output row: 1-based rank and prior rank, 0-based peak id.
struct RankingRow {
  std::size_t rank = 0;
  std::size_t peak = 0;
  geo::LatLon pos;
  double score = 0.0;
  std::size_t prior_rank = 0;
};

std::vector<RankingRow> ranking_rows(const Ranking& r, const scalespace::PeakSet& target, std::size_t limit);

// One JSON object per line: rank, peak, lat, lon, score, prior_rank, method.
void write_ranking_jsonl(std::ostream& out, const Ranking& r, const scalespace::PeakSet& target,
                         std::size_t limit);

}  // namespace geocooc::rank
