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
#include <utility>
#include <vector>

#include "geocooc/geo.h"
#include "geocooc/timeutil.h"

namespace geocooc::ingest {

struct Geotag {
  std::string user_id;
  geo::LatLon pos;
  int accuracy = 16;  // 1..16, 16 most accurate
  Timestamp taken_at;
  std::string batch_id;
  double weight = 1.0;

  geo::Point3 xyz() const { return geo::to_cartesian(pos); }
};

// Throws ValidationError when accuracy, weight or position is out of range.
void validate(const Geotag& g);

struct UserTags {
  std::string user_id;
  std::vector<Geotag> tags;
};

struct Provenance {
  std::vector<std::string> filters;
  std::optional<std::uint64_t> seed;
  std::size_t malformed_lines = 0;
};

// Geotags grouped by user. Users are kept sorted by id; tags keep their input order.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Geotag> tags, Provenance provenance = {});

  const std::vector<UserTags>& users() const { return users_; }
  std::size_t user_count() const { return users_.size(); }
  std::size_t geotag_count() const;
  bool empty() const { return users_.empty(); }

  const UserTags* find(const std::string& user_id) const;

  const Provenance& provenance() const { return provenance_; }
  Provenance& provenance() { return provenance_; }

  // Hash over the records only; provenance does not participate.
  std::uint64_t content_hash() const;

  // All tags in user order, then record order. This is the file order.
  std::vector<Geotag> flatten() const;

 private:
  std::vector<UserTags> users_;
  Provenance provenance_;
};

inline constexpr const char* kGeotagHeader = "user_id\tlat\tlon\taccuracy\ttaken_at\tbatch_id";

// Line format: tab-separated user_id, lat, lon, accuracy, taken_at (RFC 3339), batch_id.
// A header line is required before data; '#' lines and blank lines are skipped.
// Malformed records are skipped and counted; more than 10% malformed throws FormatError.
Dataset parse_geotags(std::istream& in);
Dataset load_geotags_file(const std::string& path);

void write_geotags(std::ostream& out, const Dataset& d);
void save_geotags_file(const std::string& path, const Dataset& d);

Dataset filter_accuracy(const Dataset& d, int min_accuracy = 15);

// Keeps the earliest tag per (user, batch_id, exact position).
Dataset dedup_batches(const Dataset& d);

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

// Users ranked by descending tag count (ties by user id); positions 1,4,5,8,9,... train,
// 2,3,6,7,... test. Throws ValidationError with fewer than two users.
TrainTestSplit split_train_test(const Dataset& d);

// 1-based rank position -> true when it belongs to the training half.
bool is_train_position(std::size_t position);

std::vector<Geotag> tags_in_region(const std::vector<Geotag>& tags, const geo::Region& region);

}  // namespace geocooc::ingest
