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

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "geocooc/errors.h"
#include "geocooc/persist.h"
#include "geocooc/pipeline.h"
#include "geocooc/synth.h"

using namespace geocooc;

namespace {

scalespace::ScaleSpace small_ladder() {
  const auto res = synth::generate(synth::named_fixture("pair-small"));
  const auto tags = pipeline::region_tags(res.dataset, res.regions[0]);
  return scalespace::build_scale_ladder(scalespace::to_weighted_points(tags), {30, 100, 300}, "A");
}

}  // namespace

TEST(Persist, ScaleSpaceRoundTripIsExact) {
  const auto ss = small_ladder();
  std::stringstream buf;
  persist::write_scalespace(buf, ss, "abc");
  std::string hash;
  const auto back = persist::read_scalespace(buf, &hash);
  EXPECT_EQ(hash, "abc");
  EXPECT_EQ(back.region_id, "A");
  ASSERT_EQ(back.sigmas, ss.sigmas);
  for (std::size_t l = 0; l < ss.levels.size(); ++l) {
    ASSERT_EQ(back.levels[l].size(), ss.levels[l].size());
    for (std::size_t i = 0; i < ss.levels[l].size(); ++i) {
      EXPECT_EQ(back.levels[l].peaks[i].pos, ss.levels[l].peaks[i].pos);
      EXPECT_EQ(back.levels[l].peaks[i].amplitude, ss.levels[l].peaks[i].amplitude);
      EXPECT_EQ(back.levels[l].peaks[i].parent, ss.levels[l].peaks[i].parent);
    }
  }
}

TEST(Persist, CoocRoundTripIsExact) {
  const auto res = synth::generate(synth::named_fixture("pair-small"));
  const auto split = ingest::split_train_test(res.dataset);
  pipeline::PairModelOptions po;
  po.sigma = 100;
  const auto m = pipeline::build_pair_model(split.train, res.regions[0], res.regions[1], po);
  std::stringstream buf;
  persist::write_cooc_model(buf, m);
  const auto back = persist::read_cooc_model(buf);
  EXPECT_EQ(back.source_region, m.source_region);
  EXPECT_EQ(back.sigma, m.sigma);
  EXPECT_EQ(back.dataset_hash, m.dataset_hash);
  EXPECT_EQ(back.contributing_users, m.contributing_users);
  ASSERT_EQ(back.values.nnz(), m.values.nnz());
  for (std::size_t i = 0; i < m.source.size(); ++i) {
    for (std::size_t j = 0; j < m.target.size(); ++j) EXPECT_EQ(back.at(i, j), m.at(i, j));
  }
  EXPECT_EQ(back.target.peaks.back().pos, m.target.peaks.back().pos);
}

TEST(Persist, RejectsForeignFiles) {
  std::stringstream junk("hello\n");
  EXPECT_THROW(persist::read_cooc_model(junk), FormatError);
  std::stringstream junk2("{\"format\": \"other\"}\n");
  EXPECT_THROW(persist::read_scalespace(junk2), FormatError);
}

TEST(Persist, CachePathsAndListing) {
  const auto dir = std::filesystem::temp_directory_path() / "geocooc-persist-test";
  std::filesystem::remove_all(dir);
  const auto ss = small_ladder();
  const auto p1 = persist::scalespace_path(dir.string(), "h1", "A", ss.sigmas);
  const auto p2 = persist::scalespace_path(dir.string(), "h2", "A", ss.sigmas);
  EXPECT_NE(p1, p2);
  EXPECT_NE(p1, persist::scalespace_path(dir.string(), "h1", "A", {30, 100}));
  persist::save_scalespace_file(p1, ss, "h1");
  persist::save_scalespace_file(p2, ss, "h2");
  EXPECT_EQ(persist::list_cache(dir.string(), "h1").scalespaces.size(), 1u);
  EXPECT_EQ(persist::list_cache(dir.string()).scalespaces.size(), 2u);
  EXPECT_NE(persist::cooc_path(dir.string(), "h", "A", "B", 100, cooccur::MetricMode::kSquared),
            persist::cooc_path(dir.string(), "h", "A", "B", 100, cooccur::MetricMode::kLiteral));
  EXPECT_THROW(persist::load_cooc_file((dir / "missing.txt").string()), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Persist, CacheDirEnvironmentOverride) {
  ::setenv("GEOCOOC_CACHE", "/tmp/elsewhere", 1);
  EXPECT_EQ(persist::cache_dir("fallback"), "/tmp/elsewhere");
  ::unsetenv("GEOCOOC_CACHE");
  EXPECT_EQ(persist::cache_dir("fallback"), "fallback");
}
