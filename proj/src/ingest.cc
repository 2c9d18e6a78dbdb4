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

#include "geocooc/ingest.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "geocooc/errors.h"
#include "geocooc/hash.h"

namespace geocooc::ingest {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::optional<Geotag> parse_record(std::string_view line) {
  const auto f = split_tabs(line);
  if (f.size() != 6 || f[0].empty() || f[5].empty()) return std::nullopt;
  Geotag g;
  g.user_id = std::string(f[0]);
  if (!parse_number(f[1], g.pos.lat) || !parse_number(f[2], g.pos.lon)) return std::nullopt;
  if (!parse_number(f[3], g.accuracy)) return std::nullopt;
  try {
    g.taken_at = parse_rfc3339(f[4]);
    validate(g);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  g.batch_id = std::string(f[5]);
  return g;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Dataset with_filter(std::vector<Geotag> tags, const Provenance& base, const std::string& filter) {
  Provenance p = base;
  p.filters.push_back(filter);
  return Dataset(std::move(tags), std::move(p));
}

}  // namespace

void validate(const Geotag& g) {
  if (g.accuracy < 1 || g.accuracy > 16) {
    throw ValidationError("accuracy " + std::to_string(g.accuracy) + " outside 1..16");
  }
  if (!(g.weight >= 0.0) || !std::isfinite(g.weight)) throw ValidationError("negative geotag weight");
  if (!geo::is_valid(g.pos)) throw ValidationError("geotag position out of range");
}

Dataset::Dataset(std::vector<Geotag> tags, Provenance provenance)
    : provenance_(std::move(provenance)) {
  std::map<std::string, std::vector<Geotag>> grouped;
  for (auto& g : tags) grouped[g.user_id].push_back(std::move(g));
  users_.reserve(grouped.size());
  for (auto& [id, ts] : grouped) users_.push_back({id, std::move(ts)});
}

std::size_t Dataset::geotag_count() const {
  std::size_t n = 0;
  for (const auto& u : users_) n += u.tags.size();
  return n;
}

const UserTags* Dataset::find(const std::string& user_id) const {
  const auto it = std::lower_bound(users_.begin(), users_.end(), user_id,
                                   [](const UserTags& u, const std::string& id) { return u.user_id < id; });
  if (it == users_.end() || it->user_id != user_id) return nullptr;
  return &*it;
}

std::uint64_t Dataset::content_hash() const {
  Fnv1a h;
  for (const auto& u : users_) {
    for (const auto& g : u.tags) {
      h.add(g.user_id).add(g.pos.lat).add(g.pos.lon).add(static_cast<std::uint64_t>(g.accuracy));
      h.add(static_cast<std::uint64_t>(g.taken_at.utc.time_since_epoch().count()));
      h.add(static_cast<std::uint64_t>(g.taken_at.offset_minutes)).add(g.batch_id).add(g.weight);
    }
  }
  return h.value();
}

std::vector<Geotag> Dataset::flatten() const {
  std::vector<Geotag> out;
  out.reserve(geotag_count());
  for (const auto& u : users_) out.insert(out.end(), u.tags.begin(), u.tags.end());
  return out;
}

Dataset parse_geotags(std::istream& in) {
  if (!in) throw IoError("geotag stream is not readable");
  std::vector<Geotag> tags;
  std::size_t records = 0;
  std::size_t malformed = 0;
  bool header_seen = false;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kGeotagHeader) throw FormatError("missing geotag header line, got '" + line + "'");
      header_seen = true;
      continue;
    }
    ++records;
    if (auto g = parse_record(line)) {
      tags.push_back(std::move(*g));
    } else {
      ++malformed;
    }
  }
  if (in.bad()) throw IoError("read error on geotag stream");
  if (records > 0 && malformed * 10 > records) {
    throw FormatError(std::to_string(malformed) + " of " + std::to_string(records) +
                      " geotag records are malformed (limit 10%)");
  }
  Provenance p;
  p.malformed_lines = malformed;
  return Dataset(std::move(tags), std::move(p));
}

Dataset load_geotags_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open geotag file '" + path + "'");
  return parse_geotags(in);
}

void write_geotags(std::ostream& out, const Dataset& d) {
  out << kGeotagHeader << '\n';
  for (const auto& u : d.users()) {
    for (const auto& g : u.tags) {
      out << g.user_id << '\t' << format_double(g.pos.lat) << '\t' << format_double(g.pos.lon) << '\t'
          << g.accuracy << '\t' << format_rfc3339(g.taken_at) << '\t' << g.batch_id << '\n';
    }
  }
}

void save_geotags_file(const std::string& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write geotag file '" + path + "'");
  write_geotags(out, d);
  if (!out) throw IoError("write failed for '" + path + "'");
}

Dataset filter_accuracy(const Dataset& d, int min_accuracy) {
  std::vector<Geotag> kept;
  for (const auto& u : d.users()) {
    for (const auto& g : u.tags) {
      if (g.accuracy >= min_accuracy) kept.push_back(g);
    }
  }
  return with_filter(std::move(kept), d.provenance(), "accuracy>=" + std::to_string(min_accuracy));
}

Dataset dedup_batches(const Dataset& d) {
  std::vector<Geotag> kept;
  for (const auto& u : d.users()) {
    // key -> index into kept
    std::map<std::tuple<std::string, double, double>, std::size_t> first;
    for (const auto& g : u.tags) {
      const auto key = std::make_tuple(g.batch_id, g.pos.lat, g.pos.lon);
      const auto it = first.find(key);
      if (it == first.end()) {
        first.emplace(key, kept.size());
        kept.push_back(g);
      } else if (g.taken_at.utc < kept[it->second].taken_at.utc) {
        kept[it->second] = g;
      }
    }
  }
  return with_filter(std::move(kept), d.provenance(), "batch-dedup");
}

bool is_train_position(std::size_t position) {
  // 1,4,5,8,9,12,13,... -> position mod 4 in {0, 1}
  return position % 4 == 0 || position % 4 == 1;
}

TrainTestSplit split_train_test(const Dataset& d) {
  if (d.user_count() < 2) throw ValidationError("train/test split needs at least two users");
  std::vector<const UserTags*> ranked;
  for (const auto& u : d.users()) ranked.push_back(&u);
  std::stable_sort(ranked.begin(), ranked.end(), [](const UserTags* a, const UserTags* b) {
    if (a->tags.size() != b->tags.size()) return a->tags.size() > b->tags.size();
    return a->user_id < b->user_id;
  });
  std::vector<Geotag> train;
  std::vector<Geotag> test;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    auto& dst = is_train_position(i + 1) ? train : test;
    dst.insert(dst.end(), ranked[i]->tags.begin(), ranked[i]->tags.end());
  }
  Provenance ptrain = d.provenance();
  ptrain.filters.push_back("split:train");
  Provenance ptest = d.provenance();
  ptest.filters.push_back("split:test");
  return {Dataset(std::move(train), std::move(ptrain)), Dataset(std::move(test), std::move(ptest))};
}

std::vector<Geotag> tags_in_region(const std::vector<Geotag>& tags, const geo::Region& region) {
  std::vector<Geotag> out;
  for (const auto& g : tags) {
    if (region.contains(g.pos)) out.push_back(g);
  }
  return out;
}

}  // namespace geocooc::ingest
