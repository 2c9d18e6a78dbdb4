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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geocooc/cooccur.h"
#include "geocooc/geo.h"
#include "geocooc/ingest.h"
#include "geocooc/metrics.h"
#include "geocooc/rank.h"
#include "geocooc/scalespace.h"

namespace geocooc::eval {

struct EvalConfig {
  double sigma = 100.0;
  double pc = 100.0;
  std::size_t prune_min_peaks = 5;  // user peaks required in both regions
  double prune_sigma = 0.0;         // 0: finest ladder value of the target region kind
  std::vector<rank::Method> methods{rank::Method::kPrior, rank::Method::kDirect};
  std::optional<int> tourist_windows;  // test users must be tourists in both regions
  bool strict_disqualify = false;
  std::size_t p_depth = 5;
  std::size_t map_depth = 50;
  std::size_t ndcg_depth = 50;
  std::size_t within_min_peaks = 0;  // within-city: peaks at sigma on training days and on the test day
  scalespace::MeanShiftOptions mean_shift;
  unsigned threads = 1;
};

struct MethodMetrics {
  double precision = 0.0;
  double map = 0.0;
  std::optional<double> ndcg;
};

struct EvalRow {
  std::string user_id;
  std::string source_region;
  std::string target_region;
  std::size_t start_peaks = 0;
  std::size_t test_peaks = 0;
  std::vector<MethodMetrics> metrics;  // aligned with EvalReport::methods
};

struct MethodSummary {
  rank::Method method = rank::Method::kPrior;
  double precision = 0.0;
  double map = 0.0;
  double ndcg = 0.0;
  std::size_t ndcg_rows = 0;
  // Against the Prior rows; absent when Prior was not evaluated.
  std::optional<BenefitRatio> br_precision;
  std::optional<BenefitRatio> br_map;
  std::optional<BenefitRatio> br_ndcg;
};

struct EvalCounts {
  std::size_t candidates = 0;       // test users with tags in both regions
  std::size_t pruned = 0;           // too few peaks
  std::size_t tourist_rejected = 0;
  std::size_t single_day = 0;       // within-city users without a second day
  std::size_t ndcg_excluded = 0;    // rows without test locations
};

struct EvalReport {
  std::string label;
  double sigma = 0.0;
  double pc = 0.0;
  std::size_t p_depth = 5;
  std::size_t map_depth = 50;
  std::vector<rank::Method> methods;
  std::vector<EvalRow> rows;
  std::vector<MethodSummary> summary;
  EvalCounts counts;
  std::string empty_reason;

  std::size_t recs() const { return rows.size(); }
  const MethodSummary* find(rank::Method m) const;
};

// Recomputes means and benefit ratios from the rows.
void summarize(EvalReport& report);

// Concatenates rows and counts of reports sharing sigma, PC and methods.
EvalReport merge_reports(std::span<const EvalReport> reports, const std::string& label = {});

// Scores one user: rankings from the model for the given start points, matched against the
// user's test peaks.
EvalRow evaluate_user(const cooccur::CoocModel& model, std::span<const geo::Point3> start_peaks,
                      const scalespace::PeakSet& test_peaks, const EvalConfig& config);

// Test users of `test` with enough peaks in both regions predict the target region from
// their source-region tags. The model must be built from the matching training users.
EvalReport run_between_region_eval(const ingest::Dataset& test, const geo::Region& source,
                                   const geo::Region& target, const cooccur::CoocModel& model,
                                   const EvalConfig& config);

// Test users in the city predict their last day from the earlier days.
EvalReport run_within_city_eval(const ingest::Dataset& test, const geo::Region& city,
                                const cooccur::CoocModel& model, const EvalConfig& config);

struct SweepRow {
  double sigma = 0.0;
  double pc = 0.0;
  double mean_map = 0.0;
  std::size_t users = 0;
};

struct SweepOptions {
  std::size_t top_k = 500;
  std::size_t prune_min_peaks = 5;
  double prune_sigma = 0.0;  // 0: finest ladder value of the target region kind
  std::optional<int> tourist_windows;
  bool strict_disqualify = false;
  std::size_t map_depth = 50;
  scalespace::MeanShiftOptions mean_shift;
  unsigned threads = 1;
};

// Baseline MAP for every (sigma, PC). The target prior comes from `target_ladder` when it has
// a level for the sigma, otherwise from a ladder built over the training tags.
std::vector<SweepRow> sweep_sigma(const ingest::TrainTestSplit& split, const geo::Region& source,
                                  const geo::Region& target, const std::vector<double>& sigmas,
                                  const std::vector<double>& pcs, const SweepOptions& options,
                                  const scalespace::ScaleSpace* target_ladder = nullptr);

// Sigma of the best mean MAP for one PC, and whether it lies strictly inside the grid.
struct SweepOptimum {
  double sigma = 0.0;
  double mean_map = 0.0;
  std::size_t index = 0;
  bool interior = false;
};
SweepOptimum sweep_optimum(std::span<const SweepRow> rows, double pc);

std::string format_ratio(const BenefitRatio& br);

// Tabular layout: metric rows, one column per method, BR rows and Recs.
void write_report_table(std::ostream& out, const EvalReport& report);
// One JSON object per row, then one summary object per method.
void write_report_jsonl(std::ostream& out, const EvalReport& report);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace geocooc::eval
