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
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "geocooc/errors.h"
#include "geocooc/rank.h"
#include "oracles.h"

using namespace geocooc;
using rank::Method;

namespace {

const geo::LatLon kSource{52.52, 13.40};
const geo::LatLon kTarget{41.39, 2.17};

geo::Point3 src(double e, double n) { return geo::to_cartesian(geo::offset_meters(kSource, e, n)); }
geo::Point3 tgt(double e, double n) { return geo::to_cartesian(geo::offset_meters(kTarget, e, n)); }

// Source peaks 2 km apart so cross-kernel terms vanish at sigma 100.
cooccur::CoocModel make_model(const std::vector<std::vector<double>>& dense, std::vector<double> src_amp,
                              std::vector<double> tgt_amp, double sigma = 100) {
  cooccur::CoocModel m;
  m.source_region = "A";
  m.target_region = "B";
  m.sigma = sigma;
  for (std::size_t i = 0; i < src_amp.size(); ++i) m.source.peaks.push_back({src(2000.0 * i, 0), src_amp[i], {}});
  for (std::size_t j = 0; j < tgt_amp.size(); ++j) m.target.peaks.push_back({tgt(0, 2000.0 * j), tgt_amp[j], {}});
  std::vector<double> flat;
  for (const auto& row : dense) flat.insert(flat.end(), row.begin(), row.end());
  m.values = SparseMatrix::from_dense(src_amp.size(), tgt_amp.size(), flat, 1e-12);
  return m;
}

std::vector<std::size_t> order(const rank::Ranking& r) { return r.order(); }

}  // namespace

TEST(Methods, Parsing) {
  EXPECT_EQ(rank::method_from_string("rankdiff"), Method::kRankDiff);
  EXPECT_EQ(rank::methods_from_list("prior,direct,cosine"),
            (std::vector<Method>{Method::kPrior, Method::kDirect, Method::kCosine}));
  EXPECT_THROW(rank::method_from_string("jaccard"), ValidationError);
}

TEST(Prior, Examples) {
  const auto m = make_model({{0, 0, 0}}, {1}, {5, 9, 1});
  EXPECT_EQ(order(rank::prior_rank(m.target)), (std::vector<std::size_t>{1, 0, 2}));
  const auto eq = make_model({{0, 0, 0}}, {1}, {3, 3, 3});
  EXPECT_EQ(order(rank::prior_rank(eq.target)), (std::vector<std::size_t>{0, 1, 2}));
  const auto one = make_model({{0}}, {1}, {7});
  EXPECT_EQ(order(rank::prior_rank(one.target)), (std::vector<std::size_t>{0}));
}

TEST(ScoreCc, KernelCollapseGivesColumnOrder) {
  const auto m = make_model({{1, 7, 3}, {9, 0, 5}}, {4, 4}, {2, 2, 2});
  const std::vector<geo::Point3> user{m.source.peaks[0].pos};
  const auto r = rank::score_cc(user, m, 100);
  EXPECT_EQ(order(r), (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_NEAR(r.items[0].score, 7, 1e-12);
}

TEST(ScoreCc, FarUserDegeneratesToTieBreak) {
  const auto m = make_model({{1, 7, 3}, {9, 0, 5}}, {4, 4}, {2, 2, 2});
  const std::vector<geo::Point3> user{src(0, 50000)};
  const auto r = rank::score_cc(user, m, 100);
  for (const auto& it : r.items) EXPECT_NEAR(it.score, 0.0, 1e-300);
  EXPECT_EQ(order(r), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(ScoreCc, Errors) {
  const auto m = make_model({{1}}, {1}, {1});
  const std::vector<geo::Point3> user{src(0, 0)};
  EXPECT_THROW(rank::score_cc(user, m, 50), ConfigError);
  EXPECT_THROW(rank::score_cc({}, m, 100), ValidationError);
}

TEST(ScoreCc, MatchesDoubleSumOracle) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-300, 300), val(0, 5);
  const double s = 100;
  cooccur::CoocModel m;
  m.sigma = s;
  std::vector<oracle::Vec3> sp;
  std::vector<std::vector<double>> dense(4, std::vector<double>(3));
  std::vector<double> flat;
  for (int i = 0; i < 4; ++i) {
    const auto p = src(u(rng), u(rng));
    m.source.peaks.push_back({p, 1, {}});
    sp.push_back({p.x, p.y, p.z});
    for (int j = 0; j < 3; ++j) flat.push_back(dense[i][j] = val(rng));
  }
  for (int j = 0; j < 3; ++j) m.target.peaks.push_back({tgt(0, 1000.0 * j), 1, {}});
  m.values = SparseMatrix::from_dense(4, 3, flat, 0);
  for (int user = 0; user < 3; ++user) {
    std::vector<geo::Point3> up;
    std::vector<oracle::Vec3> oup;
    for (int k = 0; k <= user; ++k) {
      up.push_back(src(u(rng), u(rng)));
      oup.push_back({up.back().x, up.back().y, up.back().z});
    }
    const auto want = oracle::personal_scores(dense, sp, oup, s);
    const auto r = rank::score_cc(up, m, s);
    for (const auto& it : r.items) EXPECT_NEAR(it.score, want[it.index], 1e-9 * want[it.index]);
  }
}

TEST(Cosine, Examples) {
  const std::vector<double> cc{4, 0};
  const std::vector<double> amp{4, 100};
  const auto r = rank::cosine_scores(cc, 4.0, amp);
  EXPECT_DOUBLE_EQ(r.items[0].score, 1.0);
  EXPECT_EQ(r.items[1].score, 0.0);

  const std::vector<double> zero_amp{4, 0};
  const auto ex = rank::cosine_scores(cc, 4.0, zero_amp);
  EXPECT_EQ(ex.excluded, (std::vector<std::size_t>{1}));
  EXPECT_EQ(ex.items.size(), 1u);
}

TEST(Cosine, HandComputedThreeByThree) {
  // phi_cc / sqrt(src_amp[m] * tgt_amp[n]) for start m = 1.
  const auto m = make_model({{1, 2, 3}, {8, 6, 2}, {0, 0, 1}}, {2, 4, 9}, {16, 9, 1});
  const std::vector<std::size_t> start{1};
  const auto r = rank::cosine_scores(m, start);
  // 8/sqrt(64) = 1, 6/sqrt(36) = 1, 2/sqrt(4) = 1: all tie, index order.
  EXPECT_EQ(order(r), (std::vector<std::size_t>{0, 1, 2}));
  for (const auto& it : r.items) EXPECT_DOUBLE_EQ(it.score, 1.0);
  const std::vector<std::size_t> start0{0};
  const auto r0 = rank::cosine_scores(m, start0);
  // 1/sqrt(32), 2/sqrt(18), 3/sqrt(2)
  EXPECT_EQ(order(r0), (std::vector<std::size_t>{2, 1, 0}));
  EXPECT_DOUBLE_EQ(r0.items[0].score, 3 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(r0.items[2].score, 1 / std::sqrt(32.0));
}

TEST(RankDiff, Examples) {
  const std::vector<double> prior{10, 6, 3, 1};
  const std::vector<double> same{10, 6, 3, 1};
  for (const auto& it : rank::rankdiff_scores(same, prior).items) EXPECT_EQ(it.score, 0.0);

  // Peak 3 climbs from prior rank 4 to rank 2, pushing peak 1 to rank 3.
  const std::vector<double> cc{10, 3, 1, 6};
  const auto r = rank::rankdiff_scores(cc, prior);
  std::vector<double> rd(4);
  for (const auto& it : r.items) rd[it.index] = it.score;
  EXPECT_EQ(rd[3], 5.0);
  EXPECT_EQ(rd[1], -3.0);
  EXPECT_EQ(rd[0], 0.0);
  EXPECT_EQ(order(r).front(), 3u);
}

TEST(MultiStart, Examples) {
  const auto m = make_model({{1, 2, 3}, {1, 2, 3}, {5, 0, 1}}, {1, 1, 1}, {1, 1, 1});
  const std::vector<std::size_t> one{2};
  EXPECT_EQ(order(rank::recommend(m, {{}, one}, Method::kDirect)),
            order(rank::rank_scores(Method::kDirect, m.values.row(2))));

  const std::vector<std::size_t> twins{0, 1};
  const auto doubled = rank::aggregate_multi_start(twins, m);
  EXPECT_EQ(doubled, (std::vector<double>{2, 4, 6}));
  EXPECT_EQ(order(rank::rank_scores(Method::kDirect, doubled)),
            order(rank::rank_scores(Method::kDirect, m.values.row(0))));

  const std::vector<std::size_t> three{0, 1, 2};
  const auto sum = rank::aggregate_multi_start(three, m);
  for (std::size_t n = 0; n < 3; ++n) {
    double col = 0;
    for (std::size_t r = 0; r < 3; ++r) col += m.at(r, n);
    EXPECT_EQ(sum[n], col);
  }
}

TEST(Invariants, PositiveScaling) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 10);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> s(20), scaled(20), amp(20), amp_scaled(20);
    for (int i = 0; i < 20; ++i) {
      s[i] = u(rng);
      scaled[i] = 3.7 * s[i];
      amp[i] = 0.5 + u(rng);
      amp_scaled[i] = 2.0 * amp[i];
    }
    EXPECT_EQ(order(rank::rank_scores(Method::kDirect, s)), order(rank::rank_scores(Method::kDirect, scaled)));
    EXPECT_EQ(order(rank::cosine_scores(s, 1.0, amp)), order(rank::cosine_scores(scaled, 2.0, amp_scaled)));
  }
}

TEST(Invariants, PopularityBiasReproduction) {
  const std::vector<double> sa{3, 5, 2}, ta{4, 9, 1, 7};
  std::vector<std::vector<double>> outer(3, std::vector<double>(4));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) outer[i][j] = sa[i] * ta[j];
  }
  const auto m = make_model(outer, sa, ta);
  const std::vector<std::size_t> start{1};
  EXPECT_EQ(order(rank::recommend(m, {{}, start}, Method::kDirect)), order(rank::prior_rank(m.target)));
  // Cosine of an outer product reduces to sqrt(src * tgt): still the prior order.
  const auto cos = rank::cosine_scores(m, start);
  EXPECT_EQ(order(cos), order(rank::prior_rank(m.target)));
  for (const auto& it : cos.items) EXPECT_NEAR(it.score, std::sqrt(sa[1] * ta[it.index]), 1e-12);

  // A matrix of sqrt(src * tgt) carries no information beyond popularity: Cosine is flat.
  std::vector<std::vector<double>> root(3, std::vector<double>(4));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) root[i][j] = std::sqrt(sa[i] * ta[j]);
  }
  const auto flat = rank::cosine_scores(make_model(root, sa, ta), start);
  for (const auto& it : flat.items) EXPECT_NEAR(it.score, 1.0, 1e-12);

  const auto uniform = make_model({{2, 2, 2, 2}, {2, 2, 2, 2}, {2, 2, 2, 2}}, sa, ta);
  EXPECT_EQ(order(rank::recommend(uniform, {{}, start}, Method::kDirect)), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Invariants, CosineUnderUserWeightScaling) {
  const auto a = make_model({{1, 2, 3}, {8, 6, 2}}, {2, 4}, {16, 9, 1});
  const auto b = make_model({{5, 10, 15}, {40, 30, 10}}, {10, 20}, {80, 45, 5});
  const std::vector<std::size_t> start{0, 1};
  const auto ra = rank::cosine_scores(a, start);
  const auto rb = rank::cosine_scores(b, start);
  ASSERT_EQ(ra.items.size(), rb.items.size());
  for (std::size_t i = 0; i < ra.items.size(); ++i) {
    EXPECT_EQ(ra.items[i].index, rb.items[i].index);
    EXPECT_NEAR(ra.items[i].score, rb.items[i].score, 1e-12);
  }
}

TEST(Recommend, PriorIgnoresStartAndEmptyStartRejected) {
  const auto m = make_model({{1, 7, 3}, {9, 0, 5}}, {4, 4}, {2, 8, 5});
  const auto p0 = rank::recommend(m, {}, Method::kPrior);
  const std::vector<std::size_t> s{1};
  EXPECT_EQ(order(p0), order(rank::recommend(m, {{src(10, 10)}, s}, Method::kPrior)));
  EXPECT_THROW(rank::recommend(m, {}, Method::kDirect), ValidationError);
  const std::vector<std::size_t> bad{5};
  EXPECT_THROW(rank::recommend(m, {{}, bad}, Method::kDirect), ValidationError);
}

TEST(Output, RowsAndJsonl) {
  const auto m = make_model({{1, 7, 3}}, {4}, {2, 8, 5});
  const std::vector<std::size_t> s{0};
  const auto r = rank::recommend(m, {{}, s}, Method::kDirect);
  const auto rows = rank::ranking_rows(r, m.target, 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].rank, 1u);
  EXPECT_EQ(rows[0].peak, 1u);
  EXPECT_EQ(rows[0].prior_rank, 1u);
  EXPECT_EQ(rows[1].peak, 2u);
  EXPECT_EQ(rows[1].prior_rank, 2u);
  std::stringstream ss;
  rank::write_ranking_jsonl(ss, r, m.target, 10);
  std::string line;
  int n = 0;
  while (std::getline(ss, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["rank"], n + 1);
    EXPECT_EQ(j["method"], "direct");
    ++n;
  }
  EXPECT_EQ(n, 3);
}
