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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "geocooc/geo.h"
#include "geocooc/ingest.h"

namespace geocooc::synth {

struct LandmarkSpec {
  std::string id;
  geo::LatLon center;
  double stddev_m = 25.0;
  double popularity = 1.0;
  std::vector<double> affinity;  // per category; empty means 1 for every category
};

struct RegionSpec {
  std::string id;
  geo::RegionKind kind = geo::RegionKind::kCity;
  std::optional<geo::BoundingBox> box;  // default: landmark extent plus a margin
  int utc_offset_minutes = 0;
  std::vector<LandmarkSpec> landmarks;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t users = 100;
  std::vector<RegionSpec> regions;
  std::vector<std::string> categories{"general"};
  std::vector<double> category_weights;  // empty: uniform

  double region_visit_prob = 0.9;  // per region, for tourists
  double visits_mean = 6.0;        // distinct landmarks per visited region
  std::size_t visits_max = 0;      // 0: no cap beyond the landmark count
  double photos_per_visit_mean = 3.0;
  double background_fraction = 0.02;  // photos placed uniformly in the region box

  // Residents live in one region: they visit it across the year, follow popularity and
  // category less, and take more background photos there.
  double resident_fraction = 0.0;
  double resident_popularity_exponent = 0.3;
  double resident_affinity_exponent = 0.3;
  double resident_background_fraction = 0.25;
  double resident_visits_mean = 8.0;

  int trip_days_max = 4;          // a tourist trip spans 1..trip_days_max days
  double repeat_trip_prob = 0.0;  // chance a tourist splits a region visit over two trips
  double duplicate_prob = 0.0;    // chance a photo is repeated at the same spot in its batch
  double low_accuracy_fraction = 0.0;
  std::string epoch = "2012-01-01T00:00:00Z";
};

// Throws ValidationError for unusable settings.
void validate(const SynthConfig& cfg);

SynthConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SynthConfig& cfg);
SynthConfig load_config_file(const std::string& path);

struct GroundTruth {
  std::vector<std::pair<std::string, std::string>> user_category;  // sorted by user
  std::vector<std::string> photo_landmark;  // by photo index in file order; "-" for background
};

struct SynthResult {
  ingest::Dataset dataset;
  GroundTruth truth;
  std::vector<geo::Region> regions;
};

// Deterministic for a given config.
SynthResult generate(const SynthConfig& cfg);

void write_ground_truth(std::ostream& out, const GroundTruth& truth);
GroundTruth read_ground_truth(std::istream& in);

std::vector<geo::Region> regions_of(const SynthConfig& cfg);

// Landmarks scattered around a center with a minimum spacing, Zipf-like popularity and a
// primary category each (affinity `strength` there, 1 elsewhere).
struct LayoutSpec {
  std::string region_id;
  geo::LatLon center;
  std::size_t landmarks = 20;
  double half_extent_m = 2000.0;
  double min_spacing_m = 400.0;
  double stddev_min_m = 15.0;
  double stddev_max_m = 40.0;
  double zipf_exponent = 0.9;
  double affinity_strength = 6.0;
  std::size_t categories = 1;
  std::uint64_t seed = 1;
};
RegionSpec layout_region(const LayoutSpec& spec);

// Named configurations used by tests and the acceptance suite: pair-small, cooc-ab, lift,
// tourist-mix, city-sweep, niche.
std::vector<std::string> fixture_names();
SynthConfig named_fixture(const std::string& name);

}  // namespace geocooc::synth
