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
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "geocooc/cli.h"
#include "geocooc/geo.h"
#include "geocooc/ingest.h"
#include "geocooc/persist.h"
#include "geocooc/rank.h"
#include "geocooc/hash.h"

using namespace geocooc;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("geocooc-cli-" + std::string(
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ::setenv("GEOCOOC_CACHE", (dir_ / "cache").c_str(), 1);
  }
  void TearDown() override {
    ::unsetenv("GEOCOOC_CACHE");
    fs::remove_all(dir_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::vector<std::string> inputs() const {
    return {"--dataset", path("d.tsv"), "--regions", path("d.tsv.regions.json")};
  }
  void synth() { ASSERT_EQ(run({"synth", "--fixture", "pair-small", "--seed", "7", "--out", path("d.tsv")}).code, 0); }
  std::vector<std::string> with(std::vector<std::string> head, std::vector<std::string> tail) const {
    auto in = inputs();
    head.insert(head.end(), in.begin(), in.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, cli::kUsageError);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsageError);
  EXPECT_EQ(run({"eval", "--sigma", "100"}).code, cli::kUsageError);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST_F(CliTest, SynthIsByteIdentical) {
  synth();
  const auto first = slurp(path("d.tsv"));
  const auto truth = slurp(path("d.tsv.truth.tsv"));
  ASSERT_EQ(run({"synth", "--fixture", "pair-small", "--seed", "7", "--out", path("e.tsv")}).code, 0);
  EXPECT_EQ(slurp(path("e.tsv")), first);
  EXPECT_EQ(slurp(path("e.tsv.truth.tsv")), truth);
  EXPECT_FALSE(first.empty());
}

TEST_F(CliTest, EvalWithoutCoocNamesCooc) {
  synth();
  const auto r = run(with({"eval"}, {"--sigma", "100", "--pc", "100", "--source", "A", "--target", "B"}));
  EXPECT_EQ(r.code, cli::kUsageError);
  EXPECT_NE(r.err.find("cooc"), std::string::npos) << r.err;
}

TEST_F(CliTest, CoocWithoutScalespaceNamesScalespace) {
  synth();
  const auto r = run(with({"cooc"}, {"--sigma", "100", "--source", "A", "--target", "B"}));
  EXPECT_EQ(r.code, cli::kUsageError);
  EXPECT_NE(r.err.find("scalespace"), std::string::npos) << r.err;
}

TEST_F(CliTest, PipelineAndRecommendMatchesLibrary) {
  synth();
  ASSERT_EQ(run(with({"scalespace"}, {})).code, 0);
  ASSERT_EQ(run(with({"cooc"}, {"--sigma", "100", "--source", "A", "--target", "B"})).code, 0);

  const auto r = run(with({"recommend"}, {"--sigma", "100", "--source", "A", "--target", "B", "--start",
                                          "52.52,13.40", "--method", "rankdiff", "--limit", "5"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto top = nlohmann::json::parse(r.out.substr(0, r.out.find('\n')));

  const auto d = ingest::load_geotags_file(path("d.tsv"));
  const auto model = persist::load_cooc_file(persist::cooc_path(
      (dir_ / "cache").string(), to_hex(d.content_hash()), "A", "B", 100, cooccur::MetricMode::kSquared));
  rank::StartSpec start;
  start.points.push_back(geo::to_cartesian({52.52, 13.40}));
  const auto lib = rank::recommend(model, start, rank::Method::kRankDiff);
  EXPECT_EQ(top["peak"], lib.items[0].index);
  EXPECT_EQ(top["score"].get<double>(), lib.items[0].score);
  EXPECT_EQ(top["rank"], 1);

  const auto e = run(with({"eval"}, {"--sigma", "100", "--pc", "100", "--source", "A", "--target", "B", "--out",
                                     path("report")}));
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("MAP@50"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("report.jsonl")));

  // Commands are idempotent given identical inputs and caches.
  const auto again = run(with({"eval"}, {"--sigma", "100", "--pc", "100", "--source", "A", "--target", "B"}));
  EXPECT_EQ(again.out, e.out);

  const auto sweep = run(with({"sweep"}, {"--source", "A", "--target", "B", "--pc", "100", "--grid", "city"}));
  ASSERT_EQ(sweep.code, 0) << sweep.err;
  EXPECT_EQ(std::count(sweep.out.begin(), sweep.out.end(), '\n'), 20);
}

TEST_F(CliTest, BadValuesAreUsageErrors) {
  synth();
  EXPECT_EQ(run(with({"cooc"}, {"--sigma", "-1", "--source", "A", "--target", "B"})).code, cli::kUsageError);
  EXPECT_EQ(run(with({"cooc"}, {"--sigma", "100", "--source", "A", "--target", "Q"})).code, cli::kUsageError);
  EXPECT_EQ(run({"eval", "--dataset", path("missing.tsv"), "--regions", path("d.tsv.regions.json"), "--sigma",
                 "100", "--pc", "50"})
                .code,
            cli::kUsageError);
}
