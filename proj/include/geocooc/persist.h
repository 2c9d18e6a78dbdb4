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
#include <string>
#include <vector>

#include "geocooc/cooccur.h"
#include "geocooc/scalespace.h"

namespace geocooc::persist {

inline constexpr int kScaleSpaceVersion = 1;
inline constexpr int kCoocVersion = 1;

// GEOCOOC_CACHE when set, else `fallback`.
std::string cache_dir(const std::string& fallback = ".geocooc-cache");

// Line-JSON: a header {format, version, dataset_hash, region, grid}, then one line per level.
void write_scalespace(std::ostream& out, const scalespace::ScaleSpace& ss, const std::string& dataset_hash);
scalespace::ScaleSpace read_scalespace(std::istream& in, std::string* dataset_hash = nullptr);

// Text: header lines, both peak sets, then "m n value" triples. Doubles round-trip exactly.
void write_cooc_model(std::ostream& out, const cooccur::CoocModel& model);
cooccur::CoocModel read_cooc_model(std::istream& in);

void save_scalespace_file(const std::string& path, const scalespace::ScaleSpace& ss,
                          const std::string& dataset_hash);
scalespace::ScaleSpace load_scalespace_file(const std::string& path, std::string* dataset_hash = nullptr);
void save_cooc_file(const std::string& path, const cooccur::CoocModel& model);
cooccur::CoocModel load_cooc_file(const std::string& path);

// Cache file names; the dataset hash is part of each name so a changed input misses.
std::string scalespace_path(const std::string& dir, const std::string& dataset_hash, const std::string& region,
                            const std::vector<double>& grid);
std::string cooc_path(const std::string& dir, const std::string& dataset_hash, const std::string& source,
                      const std::string& target, double sigma, cooccur::MetricMode mode);

struct CacheListing {
  std::vector<std::string> scalespaces;
  std::vector<std::string> cooc_models;
};
// Cache files in `dir` for the given dataset hash; every dataset when the hash is empty.
CacheListing list_cache(const std::string& dir, const std::string& dataset_hash = {});

}  // namespace geocooc::persist
