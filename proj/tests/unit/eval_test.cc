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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "geocooc/errors.h"
#include "geocooc/eval.h"
#include "geocooc/pipeline.h"
#include "geocooc/synth.h"

using namespace geocooc;
using rank::Method;

namespace {

struct PairSmall {
  synth::SynthResult data;
  ingest::TrainTestSplit split;
  cooccur::CoocModel model;
  const geo::Region& a() const { return data.regions[0]; }
  const geo::Region& b() const { return data.regions[1]; }
};

const PairSmall& pair_small() {
  static const PairSmall f = [] {
    PairSmall p;
    p.data = synth::generate(synth::named_fixture("pair-small"));
    p.split = ingest::split_train_test(p.data.dataset);
    pipeline::PairModelOptions po;
    po.sigma = 100;
    p.model = pipeline::build_pair_model(p.split.train, p.data.regions[0], p.data.regions[1], po);
    return p;
  }();
  return f;
}

eval::EvalConfig config(std::vector<Method> methods) {
  eval::EvalConfig c;
  c.sigma = 100;
  c.pc = 100;
  c.methods = std::move(methods);
  return c;
}

std::string jsonl(const eval::EvalReport& r) {
  std::ostringstream os;
  eval::write_report_jsonl(os, r);
  return os.str();
}

}  // namespace

TEST(BetweenRegion, DeterministicReport) {
  const auto& f = pair_small();
  const auto cfg = config({Method::kPrior, Method::kDirect, Method::kCosine, Method::kRankDiff});
  const auto r1 = eval::run_between_region_eval(f.split.test, f.a(), f.b(), f.model, cfg);
  const auto r2 = eval::run_between_region_eval(f.split.test, f.a(), f.b(), f.model, cfg);
  EXPECT_GT(r1.recs(), 0u);
  EXPECT_EQ(jsonl(r1), jsonl(r2));
  auto threaded = cfg;
  threaded.threads = 4;
  EXPECT_EQ(jsonl(eval::run_between_region_eval(f.split.test, f.a(), f.b(), f.model, threaded)), jsonl(r1));
}

TEST(BetweenRegion, MetricsBoundedAndSummaryIsRowMean) {
  const auto& f = pair_small();
  const auto r = eval::run_between_region_eval(f.split.test, f.a(), f.b(), f.model,
                                               config({Method::kPrior, Method::kDirect, Method::kRankDiff}));
  ASSERT_GT(r.recs(), 0u);
  for (std::size_t k = 0; k < r.methods.size(); ++k) {
    double p = 0, m = 0;
    for (const auto& row : r.rows) {
      const auto& x = row.metrics[k];
      EXPECT_GE(x.precision, 0.0);
      EXPECT_LE(x.precision, 1.0);
      EXPECT_GE(x.map, 0.0);
      EXPECT_LE(x.map, 1.0);
      if (x.ndcg) {
        EXPECT_GE(*x.ndcg, 0.0);
        EXPECT_LE(*x.ndcg, 1.0 + 1e-12);
      }
      p += x.precision;
      m += x.map;
    }
    EXPECT_NEAR(r.summary[k].precision, p / r.recs(), 1e-12);
    EXPECT_NEAR(r.summary[k].map, m / r.recs(), 1e-12);
    const auto& br = *r.summary[k].br_map;
    EXPECT_EQ(br.improved + br.deteriorated + br.ties, r.recs());
  }
}

TEST(BetweenRegion, PriorAgainstItselfIsZeroOverZero) {
  const auto& f = pair_small();
  const auto r = eval::run_between_region_eval(f.split.test, f.a(), f.b(), f.model, config({Method::kPrior}));
  const auto* s = r.find(Method::kPrior);
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->br_map->improved, 0u);
  EXPECT_EQ(s->br_map->deteriorated, 0u);
  EXPECT_EQ(s->br_map->ties, r.recs());
  EXPECT_EQ(eval::format_ratio(*s->br_map), "0/0");
}

TEST(BetweenRegion, PruningMonotone) {
  const auto& f = pair_small();
  std::size_t prev = SIZE_MAX;
  for (std::size_t t : {1, 3, 5, 8, 12}) {
    auto cfg = config({Method::kPrior});
    cfg.prune_min_peaks = t;
    const auto r = eval::run_between_region_eval(f.split.test, f.a(), f.b(), f.model, cfg);
    EXPECT_LE(r.recs(), prev) << t;
    prev = r.recs();
  }
}

TEST(BetweenRegion, ModelMismatchIsConfigError) {
  const auto& f = pair_small();
  EXPECT_THROW(eval::run_between_region_eval(f.split.test, f.b(), f.a(), f.model, config({Method::kPrior})),
               ConfigError);
  auto cfg = config({Method::kPrior});
  cfg.sigma = 50;
  EXPECT_THROW(eval::run_between_region_eval(f.split.test, f.a(), f.b(), f.model, cfg), ConfigError);
}

TEST(BetweenRegion, NoQualifyingUsersGivesReason) {
  const auto& f = pair_small();
  auto cfg = config({Method::kPrior, Method::kDirect});
  cfg.prune_min_peaks = 10000;
  const auto r = eval::run_between_region_eval(f.split.test, f.a(), f.b(), f.model, cfg);
  EXPECT_EQ(r.recs(), 0u);
  EXPECT_FALSE(r.empty_reason.empty());
}

TEST(WithinCity, RunsOnFixture) {
  const auto& f = pair_small();
  pipeline::PairModelOptions po;
  po.sigma = 100;
  const auto self = pipeline::build_pair_model(f.split.train, f.a(), f.a(), po);
  EXPECT_TRUE(self.diagonal_zeroed);
  const auto r = eval::run_within_city_eval(f.split.test, f.a(), self, config({Method::kPrior, Method::kDirect}));
  EXPECT_GT(r.recs(), 0u);
  EXPECT_EQ(r.counts.candidates, r.recs() + r.counts.single_day + r.counts.pruned + r.counts.tourist_rejected);
}

TEST(Merge, ConcatenatesRows) {
  const auto& f = pair_small();
  const auto cfg = config({Method::kPrior, Method::kDirect});
  const auto r = eval::run_between_region_eval(f.split.test, f.a(), f.b(), f.model, cfg);
  const std::vector<eval::EvalReport> two{r, r};
  const auto m = eval::merge_reports(two, "both");
  EXPECT_EQ(m.recs(), 2 * r.recs());
  EXPECT_NEAR(m.summary[1].map, r.summary[1].map, 1e-12);
}

TEST(Sweep, FlatOnSingleLandmarkFixture) {
  synth::SynthConfig c;
  c.seed = 3;
  c.users = 120;
  for (const auto& [id, ll] : {std::pair<std::string, geo::LatLon>{"A", {52.52, 13.40}}, {"B", {41.39, 2.17}}}) {
    synth::RegionSpec r;
    r.id = id;
    r.landmarks.push_back({id + "-L", ll, 5.0, 1.0, {}});
    r.box = geo::BoundingBox{ll.lat - 0.05, ll.lon - 0.05, ll.lat + 0.05, ll.lon + 0.05};
    c.regions.push_back(r);
  }
  c.region_visit_prob = 1.0;
  c.background_fraction = 0.0;
  c.photos_per_visit_mean = 6.0;
  const auto res = synth::generate(c);
  const auto split = ingest::split_train_test(res.dataset);
  eval::SweepOptions so;
  so.prune_min_peaks = 1;
  const std::vector<double> grid{10, 30, 100, 300, 1000};
  const std::vector<double> pcs{200};
  const auto rows = eval::sweep_sigma(split, res.regions[0], res.regions[1], grid, pcs, so);
  ASSERT_EQ(rows.size(), grid.size());
  for (const auto& row : rows) {
    EXPECT_GT(row.users, 0u);
    EXPECT_DOUBLE_EQ(row.mean_map, rows.front().mean_map) << row.sigma;
  }
}

TEST(Sweep, EmptyGridIsError) {
  const auto& f = pair_small();
  const std::vector<double> pcs{100};
  EXPECT_THROW(eval::sweep_sigma(f.split, f.a(), f.b(), {}, pcs, {}), ValidationError);
  const std::vector<double> grid{100};
  EXPECT_THROW(eval::sweep_sigma(f.split, f.a(), f.b(), grid, {}, {}), ValidationError);
}

TEST(Sweep, OptimumDetection) {
  const std::vector<eval::SweepRow> rows{{10, 50, 0.2, 5}, {20, 50, 0.5, 5}, {40, 50, 0.3, 5}, {10, 99, 0.9, 5},
                                         {20, 99, 0.1, 5}};
  const auto o = eval::sweep_optimum(rows, 50);
  EXPECT_EQ(o.sigma, 20);
  EXPECT_TRUE(o.interior);
  EXPECT_FALSE(eval::sweep_optimum(rows, 99).interior);
  EXPECT_THROW(eval::sweep_optimum(rows, 7), ValidationError);
}

TEST(Output, RatioFormatting) {
  EXPECT_EQ(eval::format_ratio({0, 0, 3}), "0/0");
  EXPECT_EQ(eval::format_ratio({4, 0, 0}), "inf (4/0)");
  EXPECT_EQ(eval::format_ratio({3, 2, 0}), "1.500");
}

TEST(Output, TableAndCsv) {
  const auto& f = pair_small();
  const auto r = eval::run_between_region_eval(f.split.test, f.a(), f.b(), f.model,
                                               config({Method::kPrior, Method::kDirect}));
  std::ostringstream t;
  eval::write_report_table(t, r);
  EXPECT_NE(t.str().find("MAP@50"), std::string::npos);
  EXPECT_NE(t.str().find("BR-MAP@50"), std::string::npos);
  std::ostringstream csv;
  const std::vector<eval::SweepRow> rows{{10, 50, 0.25, 3}};
  eval::write_sweep_csv(csv, rows);
  EXPECT_EQ(csv.str(), "sigma,pc,mean_map,users\n10,50,0.250000,3\n");
}
