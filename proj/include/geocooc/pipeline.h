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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geocooc/cooccur.h"
#include "geocooc/geo.h"
#include "geocooc/ingest.h"
#include "geocooc/scalespace.h"

namespace geocooc::pipeline {

// Prior peaks of a region at one sigma: mean shift seeded from every tag, top-k kept.
scalespace::PeakSet prior_peaks(std::span<const ingest::Geotag> tags, const std::string& region_id, double sigma,
                                std::size_t top_k = 500, const scalespace::MeanShiftOptions& options = {});

std::vector<ingest::Geotag> region_tags(const ingest::Dataset& d, const geo::Region& region);

// Mean tag weight, 1 for an empty list.
double mean_weight(std::span<const ingest::Geotag> tags);

struct ProfileOptions {
  double sigma = 100.0;
  std::optional<int> tourist_windows;  // drop users who are not tourists in both regions
  scalespace::MeanShiftOptions mean_shift;
  unsigned threads = 1;
};

// One profile per user with tags in both regions. For source == target the user's peaks
// appear on both sides.
std::vector<cooccur::UserProfile> user_profiles(const ingest::Dataset& d, const geo::Region& source,
                                                const geo::Region& target, const ProfileOptions& options);

struct PairModelOptions {
  double sigma = 100.0;
  std::size_t top_k = 500;
  std::optional<int> training_tourist_windows;
  scalespace::MeanShiftOptions mean_shift;
  cooccur::CoocOptions cooc;
  unsigned threads = 1;
};

// Co-occurrence model from training users. Prior peak sets are computed from the training
// tags unless given. A model of a region with itself zeroes the diagonal.
cooccur::CoocModel build_pair_model(const ingest::Dataset& train, const geo::Region& source,
                                    const geo::Region& target, const PairModelOptions& options,
                                    const scalespace::PeakSet* source_prior = nullptr,
                                    const scalespace::PeakSet* target_prior = nullptr);

}  // namespace geocooc::pipeline
