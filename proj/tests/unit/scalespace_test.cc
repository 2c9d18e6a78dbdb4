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

#include <gtest/gtest.h>

#include "geocooc/errors.h"
#include "geocooc/scalespace.h"
#include "oracles.h"

using namespace geocooc;
using scalespace::Kernel;
using scalespace::WeightedPoint;

namespace {

const geo::LatLon kOrigin{52.52, 13.40};

geo::Point3 at(double east, double north) { return geo::to_cartesian(geo::offset_meters(kOrigin, east, north)); }

std::vector<WeightedPoint> cluster_points(std::uint64_t seed, std::size_t n, double spread) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> c(-1000, 1000);
  std::normal_distribution<double> jitter(0, spread);
  std::vector<std::pair<double, double>> centres;
  for (int i = 0; i < 6; ++i) centres.emplace_back(c(rng), c(rng));
  std::vector<WeightedPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [e, nn] = centres[i % centres.size()];
    pts.push_back({at(e + jitter(rng), nn + jitter(rng)), 1.0});
  }
  return pts;
}

}  // namespace

TEST(Kernel, RejectsNonPositiveSigma) {
  EXPECT_THROW(Kernel(0.0), ValidationError);
  EXPECT_THROW(Kernel(-1.0), ValidationError);
}

TEST(Density, KernelValues) {
  const Kernel k(50);
  const std::vector<WeightedPoint> one{{at(0, 0), 1.0}};
  EXPECT_DOUBLE_EQ(scalespace::density(one, k, at(0, 0)), 1.0);
  const double half = 50 * std::sqrt(2 * std::log(2.0));
  const auto q = at(0, 0) + geo::Point3{half, 0, 0};
  EXPECT_NEAR(scalespace::density(one, k, q), 0.5, 1e-12);
}

TEST(Density, MatchesDirectSum) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-300, 300), w(0.1, 2);
  std::vector<WeightedPoint> pts;
  std::vector<oracle::Vec3> opts;
  std::vector<double> ow;
  for (int i = 0; i < 100; ++i) {
    const auto p = at(u(rng), u(rng));
    pts.push_back({p, w(rng)});
    opts.push_back({p.x, p.y, p.z});
    ow.push_back(pts.back().weight);
  }
  const Kernel k(80);
  for (int i = 0; i < 20; ++i) {
    const auto q = at(u(rng), u(rng));
    const double want = oracle::density(opts, ow, 80, {q.x, q.y, q.z});
    EXPECT_NEAR(scalespace::density(pts, k, q), want, 1e-9 * want);
  }
}

TEST(MeanShift, SinglePointFromNearbySeed) {
  const std::vector<WeightedPoint> pts{{at(0, 0), 1.0}};
  const std::vector<geo::Point3> seeds{at(100, -80)};
  const auto ps = scalespace::mean_shift(pts, Kernel(50), seeds);
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_LT(geo::chord_distance(ps.peaks[0].pos, at(0, 0)), 0.01);
  EXPECT_NEAR(ps.peaks[0].amplitude, 1.0, 1e-9);
}

TEST(MeanShift, FarApartPointsStaySeparate) {
  const double s = 40;
  const std::vector<WeightedPoint> pts{{at(0, 0), 1.0}, {at(5 * s, 0), 1.0}};
  const std::vector<geo::Point3> seeds{pts[0].pos, pts[1].pos};
  const auto ps = scalespace::mean_shift(pts, Kernel(s), seeds);
  ASSERT_EQ(ps.size(), 2u);
  for (const auto& p : ps.peaks) {
    // The other point contributes e^-12.5 at each location; the modes barely move.
    EXPECT_GE(p.amplitude, 1.0 + std::exp(-12.5) * (1 - 1e-9));
    EXPECT_LT(p.amplitude, 1.0 + 2 * std::exp(-12.5));
  }
}

TEST(MeanShift, CloseTwinsMergeAtMidpoint) {
  const double s = 40;
  const std::vector<WeightedPoint> pts{{at(-s / 2, 0), 1.0}, {at(s / 2, 0), 1.0}};
  const std::vector<geo::Point3> seeds{pts[0].pos, pts[1].pos};
  const auto ps = scalespace::mean_shift(pts, Kernel(s), seeds);
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_LT(geo::chord_distance(ps.peaks[0].pos, at(0, 0)), 0.05);
  EXPECT_NEAR(ps.peaks[0].amplitude, 2 * std::exp(-1.0 / 8), 1e-6);
}

TEST(MeanShift, PeaksAreLocalMaximaAndMassBounded) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pts = cluster_points(seed, 150, 60);
    const Kernel k(50);
    std::vector<geo::Point3> seeds;
    double total = 0.0;
    for (const auto& p : pts) {
      seeds.push_back(p.pos);
      total += p.weight;
    }
    const auto ps = scalespace::mean_shift(pts, k, seeds);
    double sum = 0.0;
    const double probe = 10 * 1e-4 * k.sigma;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const auto& pk = ps.peaks[i];
      sum += pk.amplitude;
      if (i > 0) EXPECT_GE(ps.peaks[i - 1].amplitude, pk.amplitude);
      EXPECT_NEAR(pk.pos.norm() / geo::kEarthRadius, 1.0, 1e-6);
      const double here = scalespace::density(pts, k, pk.pos);
      for (int axis = 0; axis < 3; ++axis) {
        for (double sgn : {-1.0, 1.0}) {
          geo::Point3 d{0, 0, 0};
          (axis == 0 ? d.x : axis == 1 ? d.y : d.z) = sgn * probe;
          EXPECT_GE(here + 1e-9 * here, scalespace::density(pts, k, pk.pos + d));
        }
      }
      for (std::size_t j = 0; j < i; ++j) {
        EXPECT_GT(geo::chord_distance(pk.pos, ps.peaks[j].pos), 1e-2 * k.sigma);
      }
    }
    EXPECT_LE(sum, total * (1 + 1e-9));
  }
}

TEST(Grid, CityAndCountryLadders) {
  const auto city = scalespace::city_sigma_grid();
  ASSERT_EQ(city.size(), 19u);
  EXPECT_NEAR(city.front(), 10, 1e-9);
  EXPECT_NEAR(city.back(), 10000, 1e-6);
  EXPECT_NEAR(city[6], 10 * std::pow(1000.0, 6.0 / 18), 1e-9);
  EXPECT_NEAR(city[6], 100, 1e-9);
  const auto country = scalespace::country_sigma_grid();
  ASSERT_EQ(country.size(), 19u);
  EXPECT_NEAR(country.front(), 1000, 1e-9);
  EXPECT_NEAR(country.back(), 1e6, 1e-3);
  for (std::size_t i = 1; i < city.size(); ++i) EXPECT_GT(city[i], city[i - 1]);
}

TEST(Ladder, IsolatedPoint) {
  const std::vector<WeightedPoint> pts{{at(0, 0), 1.0}};
  const auto ss = scalespace::build_scale_ladder(pts, scalespace::city_sigma_grid(), "A");
  ASSERT_EQ(ss.levels.size(), 19u);
  for (const auto& lvl : ss.levels) {
    ASSERT_EQ(lvl.size(), 1u);
    EXPECT_NEAR(lvl.peaks[0].amplitude, 1.0, 1e-9);
    EXPECT_LT(geo::chord_distance(lvl.peaks[0].pos, at(0, 0)), 0.01);
  }
  EXPECT_NE(ss.level(100.0), nullptr);
  EXPECT_EQ(ss.level(101.0), nullptr);
}

TEST(Ladder, EmptyPoints) {
  const auto ss = scalespace::build_scale_ladder({}, scalespace::city_sigma_grid());
  for (const auto& lvl : ss.levels) EXPECT_TRUE(lvl.empty());
}

TEST(Ladder, PeakCountNonIncreasingOnClusteredData) {
  const auto pts = cluster_points(9, 200, 40);
  const auto ss = scalespace::build_scale_ladder(pts, scalespace::city_sigma_grid(), "A");
  for (std::size_t i = 1; i < ss.levels.size(); ++i) {
    EXPECT_LE(ss.levels[i].size(), ss.levels[i - 1].size()) << ss.sigmas[i];
    for (const auto& p : ss.levels[i].peaks) {
      ASSERT_TRUE(p.parent.has_value());
      EXPECT_LT(*p.parent, ss.levels[i - 1].size());
    }
  }
}

TEST(TopPeaks, KeepsStrongest) {
  scalespace::PeakSet ps;
  for (int i = 0; i < 600; ++i) ps.peaks.push_back({at(i * 10.0, 0), 600.0 - i, {}});
  const auto top = scalespace::top_peaks(ps, 500);
  ASSERT_EQ(top.size(), 500u);
  EXPECT_GE(top.peaks.back().amplitude, ps.peaks[500].amplitude);
  scalespace::PeakSet three;
  three.peaks.assign(ps.peaks.begin(), ps.peaks.begin() + 3);
  EXPECT_EQ(scalespace::top_peaks(three).size(), 3u);
}

TEST(UserPeaks, Examples) {
  const Kernel k(30);
  EXPECT_EQ(scalespace::user_peaks(std::vector<WeightedPoint>{{at(0, 0), 1}}, k).size(), 1u);

  const auto twin = scalespace::user_peaks(std::vector<WeightedPoint>{{at(0, 0), 1}, {at(0, 0), 1}}, k);
  ASSERT_EQ(twin.size(), 1u);
  EXPECT_NEAR(twin.peaks[0].amplitude, 2.0, 1e-9);

  std::vector<WeightedPoint> five;
  for (int i = 0; i < 5; ++i) five.push_back({at(i * 6 * k.sigma, (i % 2) * 6 * k.sigma), 1});
  EXPECT_EQ(scalespace::user_peaks(five, k).size(), 5u);
}

TEST(Ordering, Deterministic) {
  const auto pts = cluster_points(21, 120, 50);
  std::vector<geo::Point3> seeds;
  for (const auto& p : pts) seeds.push_back(p.pos);
  const auto a = scalespace::mean_shift(pts, Kernel(40), seeds);
  scalespace::MeanShiftOptions par;
  par.search.threads = 4;
  const auto b = scalespace::mean_shift(pts, Kernel(40), seeds, par);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.peaks[i].pos, b.peaks[i].pos);
    EXPECT_EQ(a.peaks[i].amplitude, b.peaks[i].amplitude);
  }
}
