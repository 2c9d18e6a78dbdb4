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

#include "geocooc/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "geocooc/errors.h"
#include "geocooc/timeutil.h"

namespace geocooc::synth {
namespace {

using nlohmann::json;

double landmark_affinity(const LandmarkSpec& l, std::size_t category) {
  return l.affinity.empty() ? 1.0 : l.affinity[category];
}

geo::BoundingBox landmark_box(const RegionSpec& r) {
  const double margin = r.kind == geo::RegionKind::kCity ? 1500.0 : 100000.0;
  geo::BoundingBox b{90.0, 180.0, -90.0, -180.0};
  for (const auto& l : r.landmarks) {
    const auto lo = geo::offset_meters(l.center, -margin - 4 * l.stddev_m, -margin - 4 * l.stddev_m);
    const auto hi = geo::offset_meters(l.center, margin + 4 * l.stddev_m, margin + 4 * l.stddev_m);
    b.min_lat = std::min(b.min_lat, lo.lat);
    b.min_lon = std::min(b.min_lon, lo.lon);
    b.max_lat = std::max(b.max_lat, hi.lat);
    b.max_lon = std::max(b.max_lon, hi.lon);
  }
  b.min_lat = std::max(b.min_lat, -90.0);
  b.max_lat = std::min(b.max_lat, 90.0);
  b.min_lon = std::max(b.min_lon, -180.0);
  b.max_lon = std::min(b.max_lon, 180.0);
  return b;
}

// 1 + Poisson(mean - 1)
std::size_t one_plus_poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 1.0) return 1;
  std::poisson_distribution<std::size_t> d(mean - 1.0);
  return 1 + d(rng);
}

std::vector<std::size_t> draw_without_replacement(std::mt19937_64& rng, std::vector<double> weights,
                                                  std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) {
    double total = 0.0;
    for (const double w : weights) total += w;
    if (!(total > 0.0)) break;
    std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
    const auto j = d(rng);
    out.push_back(j);
    weights[j] = 0.0;
  }
  return out;
}

json box_json(const geo::BoundingBox& b) {
  return {{"min_lat", b.min_lat}, {"min_lon", b.min_lon}, {"max_lat", b.max_lat}, {"max_lon", b.max_lon}};
}

}  // namespace

void validate(const SynthConfig& cfg) {
  auto fail = [](const std::string& m) { throw ValidationError("synth config: " + m); };
  if (cfg.users == 0) fail("users must be > 0");
  if (cfg.regions.empty()) fail("no regions");
  if (cfg.categories.empty()) fail("no categories");
  if (!cfg.category_weights.empty()) {
    if (cfg.category_weights.size() != cfg.categories.size()) fail("category_weights size differs from categories");
    double s = 0.0;
    for (const double w : cfg.category_weights) {
      if (!(w >= 0.0)) fail("negative category weight");
      s += w;
    }
    if (!(s > 0.0)) fail("category weights sum to zero");
  }
  auto prob = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) fail(std::string(name) + " must lie in [0, 1]");
  };
  prob(cfg.region_visit_prob, "region_visit_prob");
  prob(cfg.background_fraction, "background_fraction");
  prob(cfg.resident_fraction, "resident_fraction");
  prob(cfg.resident_background_fraction, "resident_background_fraction");
  prob(cfg.repeat_trip_prob, "repeat_trip_prob");
  prob(cfg.duplicate_prob, "duplicate_prob");
  prob(cfg.low_accuracy_fraction, "low_accuracy_fraction");
  if (!(cfg.visits_mean >= 1.0) || !(cfg.resident_visits_mean >= 1.0)) fail("visit means must be >= 1");
  if (!(cfg.photos_per_visit_mean >= 1.0)) fail("photos_per_visit_mean must be >= 1");
  if (cfg.trip_days_max < 1) fail("trip_days_max must be >= 1");
  if (!(cfg.resident_popularity_exponent >= 0.0) || !(cfg.resident_affinity_exponent >= 0.0)) {
    fail("resident exponents must be >= 0");
  }
  parse_rfc3339(cfg.epoch);
  std::set<std::string> region_ids;
  std::set<std::string> landmark_ids;
  for (const auto& r : cfg.regions) {
    if (r.id.empty() || !region_ids.insert(r.id).second) fail("region ids must be unique and non-empty");
    if (r.landmarks.empty()) fail("region " + r.id + " has no landmarks");
    double pop = 0.0;
    for (const auto& l : r.landmarks) {
      if (l.id.empty() || l.id == "-" || !landmark_ids.insert(l.id).second) {
        fail("landmark ids must be unique, non-empty and not '-'");
      }
      if (!geo::is_valid(l.center)) fail("landmark " + l.id + " has an invalid center");
      if (!(l.stddev_m > 0.0)) fail("landmark " + l.id + " stddev must be > 0");
      if (!(l.popularity >= 0.0)) fail("landmark " + l.id + " popularity must be >= 0");
      if (!l.affinity.empty() && l.affinity.size() != cfg.categories.size()) {
        fail("landmark " + l.id + " affinity size differs from categories");
      }
      for (const double a : l.affinity) {
        if (!(a >= 0.0)) fail("landmark " + l.id + " has a negative affinity");
      }
      pop += l.popularity;
    }
    if (!(pop > 0.0)) fail("region " + r.id + " popularity sums to zero");
  }
}

std::vector<geo::Region> regions_of(const SynthConfig& cfg) {
  std::vector<geo::Region> out;
  for (const auto& r : cfg.regions) out.emplace_back(r.id, r.kind, r.box ? *r.box : landmark_box(r));
  return out;
}

SynthResult generate(const SynthConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto epoch = parse_rfc3339(cfg.epoch).utc;
  SynthResult result;
  result.regions = regions_of(cfg);

  std::vector<double> cat_w = cfg.category_weights;
  if (cat_w.empty()) cat_w.assign(cfg.categories.size(), 1.0);
  std::discrete_distribution<std::size_t> cat_dist(cat_w.begin(), cat_w.end());

  const int width = std::max<int>(5, static_cast<int>(std::to_string(cfg.users).size()));
  std::vector<ingest::Geotag> tags;
  for (std::size_t u = 0; u < cfg.users; ++u) {
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "u%0*zu", width, u);
    const std::string user_id = idbuf;
    const std::size_t cat = cat_dist(rng);
    result.truth.user_category.emplace_back(user_id, cfg.categories[cat]);
    std::optional<std::size_t> home;
    if (unit(rng) < cfg.resident_fraction) {
      home = std::uniform_int_distribution<std::size_t>(0, cfg.regions.size() - 1)(rng);
    }

    for (std::size_t ri = 0; ri < cfg.regions.size(); ++ri) {
      const auto& region = cfg.regions[ri];
      const auto box = region.box ? *region.box : landmark_box(region);
      const bool resident = home && *home == ri;
      if (!resident && !(unit(rng) < cfg.region_visit_prob)) continue;

      std::vector<double> weights;
      for (const auto& l : region.landmarks) {
        const double a = landmark_affinity(l, cat);
        weights.push_back(resident ? std::pow(l.popularity, cfg.resident_popularity_exponent) *
                                         std::pow(a, cfg.resident_affinity_exponent)
                                   : l.popularity * a);
      }
      std::size_t k = one_plus_poisson(rng, resident ? cfg.resident_visits_mean : cfg.visits_mean);
      if (cfg.visits_max > 0) k = std::min(k, cfg.visits_max);
      k = std::min(k, region.landmarks.size());
      const auto chosen = draw_without_replacement(rng, weights, k);

      // Trip schedule: residents spread over a year, tourists over one or two short trips.
      const int trip_len = std::uniform_int_distribution<int>(1, cfg.trip_days_max)(rng);
      const int trip_start = std::uniform_int_distribution<int>(0, 729)(rng);
      const bool two_trips = !resident && unit(rng) < cfg.repeat_trip_prob;
      const int second_start = trip_start + std::uniform_int_distribution<int>(30, 300)(rng);
      const double bg = resident ? cfg.resident_background_fraction : cfg.background_fraction;

      for (std::size_t v = 0; v < chosen.size(); ++v) {
        const auto& lm = region.landmarks[chosen[v]];
        int day = 0;
        if (resident) {
          day = std::uniform_int_distribution<int>(0, 364)(rng);
        } else {
          const int base = two_trips && unit(rng) < 0.5 ? second_start : trip_start;
          day = base + std::uniform_int_distribution<int>(0, trip_len - 1)(rng);
        }
        int minute = std::uniform_int_distribution<int>(9 * 60, 19 * 60)(rng);
        const std::size_t n_photos = one_plus_poisson(rng, cfg.photos_per_visit_mean);
        const std::string batch = user_id + "-" + region.id + "-" + std::to_string(v);
        std::normal_distribution<double> scatter(0.0, lm.stddev_m);
        for (std::size_t p = 0; p < n_photos; ++p) {
          ingest::Geotag g;
          g.user_id = user_id;
          g.batch_id = batch;
          std::string label = lm.id;
          if (unit(rng) < bg) {
            g.pos = {box.min_lat + unit(rng) * (box.max_lat - box.min_lat),
                     box.min_lon + unit(rng) * (box.max_lon - box.min_lon)};
            label = "-";
          } else {
            const double e = scatter(rng);
            const double n = scatter(rng);
            g.pos = geo::offset_meters(lm.center, e, n);
          }
          g.accuracy = unit(rng) < cfg.low_accuracy_fraction ? std::uniform_int_distribution<int>(1, 14)(rng) : 16;
          const auto local = epoch + std::chrono::days(day) + std::chrono::minutes(minute);
          g.taken_at.utc = local - std::chrono::minutes(region.utc_offset_minutes);
          g.taken_at.offset_minutes = region.utc_offset_minutes;
          minute += std::uniform_int_distribution<int>(1, 8)(rng);
          tags.push_back(g);
          result.truth.photo_landmark.push_back(label);
          if (unit(rng) < cfg.duplicate_prob) {
            auto dup = g;
            dup.taken_at.utc += std::chrono::seconds(1);
            tags.push_back(dup);
            result.truth.photo_landmark.push_back(label);
          }
        }
      }
    }
  }
  ingest::Provenance prov;
  prov.filters.push_back("synthetic");
  prov.seed = cfg.seed;
  result.dataset = ingest::Dataset(std::move(tags), prov);
  return result;
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth) {
  out << "user_id\tcategory\n";
  for (const auto& [u, c] : truth.user_category) out << u << '\t' << c << '\n';
  out << "photo_index\tlandmark_id\n";
  for (std::size_t i = 0; i < truth.photo_landmark.size(); ++i) out << i << '\t' << truth.photo_landmark[i] << '\n';
}

GroundTruth read_ground_truth(std::istream& in) {
  GroundTruth t;
  enum class Section { kNone, kUsers, kPhotos } section = Section::kNone;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line == "user_id\tcategory") {
      section = Section::kUsers;
      continue;
    }
    if (line == "photo_index\tlandmark_id") {
      section = Section::kPhotos;
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || section == Section::kNone) throw FormatError("bad ground truth line: " + line);
    const auto a = line.substr(0, tab);
    const auto b = line.substr(tab + 1);
    if (section == Section::kUsers) {
      t.user_category.emplace_back(a, b);
    } else {
      if (std::stoull(a) != t.photo_landmark.size()) throw FormatError("photo indices must be consecutive");
      t.photo_landmark.push_back(b);
    }
  }
  return t;
}

SynthConfig config_from_json(const json& j) {
  SynthConfig c;
  c.seed = j.value("seed", c.seed);
  c.users = j.value("users", c.users);
  c.categories = j.value("categories", c.categories);
  c.category_weights = j.value("category_weights", c.category_weights);
  c.region_visit_prob = j.value("region_visit_prob", c.region_visit_prob);
  c.visits_mean = j.value("visits_mean", c.visits_mean);
  c.visits_max = j.value("visits_max", c.visits_max);
  c.photos_per_visit_mean = j.value("photos_per_visit_mean", c.photos_per_visit_mean);
  c.background_fraction = j.value("background_fraction", c.background_fraction);
  c.resident_fraction = j.value("resident_fraction", c.resident_fraction);
  c.resident_popularity_exponent = j.value("resident_popularity_exponent", c.resident_popularity_exponent);
  c.resident_affinity_exponent = j.value("resident_affinity_exponent", c.resident_affinity_exponent);
  c.resident_background_fraction = j.value("resident_background_fraction", c.resident_background_fraction);
  c.resident_visits_mean = j.value("resident_visits_mean", c.resident_visits_mean);
  c.trip_days_max = j.value("trip_days_max", c.trip_days_max);
  c.repeat_trip_prob = j.value("repeat_trip_prob", c.repeat_trip_prob);
  c.duplicate_prob = j.value("duplicate_prob", c.duplicate_prob);
  c.low_accuracy_fraction = j.value("low_accuracy_fraction", c.low_accuracy_fraction);
  c.epoch = j.value("epoch", c.epoch);
  for (const auto& jr : j.at("regions")) {
    RegionSpec r;
    r.id = jr.at("id").get<std::string>();
    r.kind = geo::region_kind_from_string(jr.value("kind", std::string("city")));
    r.utc_offset_minutes = jr.value("utc_offset_minutes", 0);
    if (jr.contains("bbox")) {
      const auto& b = jr.at("bbox");
      r.box = geo::BoundingBox{b.at("min_lat").get<double>(), b.at("min_lon").get<double>(),
                               b.at("max_lat").get<double>(), b.at("max_lon").get<double>()};
    }
    if (jr.contains("layout")) {
      const auto& jl = jr.at("layout");
      LayoutSpec ls;
      ls.region_id = r.id;
      ls.center = {jl.at("lat").get<double>(), jl.at("lon").get<double>()};
      ls.landmarks = jl.value("landmarks", ls.landmarks);
      ls.half_extent_m = jl.value("half_extent_m", ls.half_extent_m);
      ls.min_spacing_m = jl.value("min_spacing_m", ls.min_spacing_m);
      ls.stddev_min_m = jl.value("stddev_min_m", ls.stddev_min_m);
      ls.stddev_max_m = jl.value("stddev_max_m", ls.stddev_max_m);
      ls.zipf_exponent = jl.value("zipf_exponent", ls.zipf_exponent);
      ls.affinity_strength = jl.value("affinity_strength", ls.affinity_strength);
      ls.categories = c.categories.size();
      ls.seed = jl.value("seed", c.seed + 1000 + c.regions.size());
      r.landmarks = layout_region(ls).landmarks;
    }
    if (jr.contains("landmarks")) {
      for (const auto& jlm : jr.at("landmarks")) {
        LandmarkSpec l;
        l.id = jlm.at("id").get<std::string>();
        l.center = {jlm.at("lat").get<double>(), jlm.at("lon").get<double>()};
        l.stddev_m = jlm.value("stddev_m", l.stddev_m);
        l.popularity = jlm.value("popularity", l.popularity);
        l.affinity = jlm.value("affinity", l.affinity);
        r.landmarks.push_back(l);
      }
    }
    c.regions.push_back(r);
  }
  validate(c);
  return c;
}

json config_to_json(const SynthConfig& c) {
  json regions = json::array();
  for (const auto& r : c.regions) {
    json lms = json::array();
    for (const auto& l : r.landmarks) {
      lms.push_back({{"id", l.id},
                     {"lat", l.center.lat},
                     {"lon", l.center.lon},
                     {"stddev_m", l.stddev_m},
                     {"popularity", l.popularity},
                     {"affinity", l.affinity}});
    }
    json jr{{"id", r.id}, {"kind", geo::to_string(r.kind)}, {"utc_offset_minutes", r.utc_offset_minutes},
            {"landmarks", lms}};
    if (r.box) jr["bbox"] = box_json(*r.box);
    regions.push_back(jr);
  }
  return {{"seed", c.seed},
          {"users", c.users},
          {"categories", c.categories},
          {"category_weights", c.category_weights},
          {"region_visit_prob", c.region_visit_prob},
          {"visits_mean", c.visits_mean},
          {"visits_max", c.visits_max},
          {"photos_per_visit_mean", c.photos_per_visit_mean},
          {"background_fraction", c.background_fraction},
          {"resident_fraction", c.resident_fraction},
          {"resident_popularity_exponent", c.resident_popularity_exponent},
          {"resident_affinity_exponent", c.resident_affinity_exponent},
          {"resident_background_fraction", c.resident_background_fraction},
          {"resident_visits_mean", c.resident_visits_mean},
          {"trip_days_max", c.trip_days_max},
          {"repeat_trip_prob", c.repeat_trip_prob},
          {"duplicate_prob", c.duplicate_prob},
          {"low_accuracy_fraction", c.low_accuracy_fraction},
          {"epoch", c.epoch},
          {"regions", regions}};
}

SynthConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open synth config " + path);
  try {
    return config_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError("synth config " + path + ": " + e.what());
  }
}

RegionSpec layout_region(const LayoutSpec& spec) {
  if (spec.landmarks == 0) throw ValidationError("layout needs at least one landmark");
  if (!(spec.stddev_min_m > 0.0) || spec.stddev_max_m < spec.stddev_min_m) {
    throw ValidationError("layout stddev range is invalid");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> coord(-spec.half_extent_m, spec.half_extent_m);
  std::uniform_real_distribution<double> sd(spec.stddev_min_m, spec.stddev_max_m);
  std::vector<std::pair<double, double>> xy;
  for (int attempt = 0; xy.size() < spec.landmarks; ++attempt) {
    if (attempt > 200000) throw ValidationError("cannot place landmarks with the requested spacing");
    const double x = coord(rng);
    const double y = coord(rng);
    const bool ok = std::all_of(xy.begin(), xy.end(), [&](const auto& p) {
      return std::hypot(p.first - x, p.second - y) >= spec.min_spacing_m;
    });
    if (ok) xy.emplace_back(x, y);
  }
  std::vector<std::size_t> pop_rank(spec.landmarks);
  for (std::size_t i = 0; i < pop_rank.size(); ++i) pop_rank[i] = i;
  std::shuffle(pop_rank.begin(), pop_rank.end(), rng);

  RegionSpec r;
  r.id = spec.region_id;
  for (std::size_t i = 0; i < spec.landmarks; ++i) {
    LandmarkSpec l;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s-L%02zu", spec.region_id.c_str(), i);
    l.id = buf;
    l.center = geo::offset_meters(spec.center, xy[i].first, xy[i].second);
    l.stddev_m = sd(rng);
    l.popularity = 1.0 / std::pow(static_cast<double>(pop_rank[i] + 1), spec.zipf_exponent);
    if (spec.categories > 1) {
      l.affinity.assign(spec.categories, 1.0);
      l.affinity[i % spec.categories] = spec.affinity_strength;
    }
    r.landmarks.push_back(l);
  }
  return r;
}

namespace {

struct CitySeed {
  const char* id;
  double lat;
  double lon;
  int offset;
};

constexpr CitySeed kCities[] = {
    {"A", 52.5200, 13.4050, 60},
    {"B", 41.3870, 2.1700, 60},
    {"C", 48.8566, 2.3522, 60},
    {"D", 40.7128, -74.0060, -300},
};

SynthConfig city_fixture(std::size_t cities, std::size_t landmarks, std::size_t categories, std::uint64_t seed,
                         double affinity, double stddev_min, double stddev_max) {
  SynthConfig c;
  c.seed = seed;
  c.categories.clear();
  for (std::size_t k = 0; k < categories; ++k) c.categories.push_back("cat" + std::to_string(k));
  for (std::size_t i = 0; i < cities; ++i) {
    LayoutSpec ls;
    ls.region_id = kCities[i].id;
    ls.center = {kCities[i].lat, kCities[i].lon};
    ls.landmarks = landmarks;
    ls.categories = categories;
    ls.affinity_strength = affinity;
    ls.stddev_min_m = stddev_min;
    ls.stddev_max_m = stddev_max;
    ls.seed = seed * 31 + i;
    auto r = layout_region(ls);
    r.utc_offset_minutes = kCities[i].offset;
    c.regions.push_back(r);
  }
  return c;
}

}  // namespace

std::vector<std::string> fixture_names() {
  return {"pair-small", "cooc-ab", "lift", "tourist-mix", "city-sweep", "niche"};
}

SynthConfig named_fixture(const std::string& name) {
  if (name == "pair-small") {
    auto c = city_fixture(2, 12, 3, 11, 6.0, 15.0, 40.0);
    c.users = 40;
    c.visits_mean = 6.0;
    return c;
  }
  if (name == "cooc-ab") {
    auto c = city_fixture(2, 30, 3, 21, 6.0, 15.0, 40.0);
    c.users = 500;
    return c;
  }
  if (name == "lift") {
    auto c = city_fixture(2, 30, 3, 31, 10.0, 15.0, 40.0);
    c.users = 2000;
    return c;
  }
  if (name == "tourist-mix") {
    auto c = city_fixture(2, 30, 3, 41, 10.0, 15.0, 40.0);
    c.users = 2000;
    c.resident_fraction = 0.5;
    return c;
  }
  if (name == "city-sweep") {
    auto c = city_fixture(2, 25, 3, 51, 6.0, 15.0, 90.0);
    c.users = 600;
    return c;
  }
  if (name == "niche") {
    auto c = city_fixture(4, 22, 3, 61, 3.0, 15.0, 40.0);
    c.categories = {"sights", "museums", "niche"};
    c.category_weights = {0.45, 0.4, 0.15};
    c.users = 1500;
    c.region_visit_prob = 0.8;
    for (auto& r : c.regions) {
      const std::size_t n = r.landmarks.size();
      for (std::size_t i = 0; i < n; ++i) {
        auto& l = r.landmarks[i];
        if (i + 2 >= n) {
          l.id = r.id + "-N" + std::to_string(i + 2 - n);
          l.popularity = 0.04;
          l.affinity = {1.0, 1.0, 60.0};
        } else {
          l.affinity = {i % 2 == 0 ? 3.0 : 1.0, i % 2 == 1 ? 3.0 : 1.0, 1.0};
        }
      }
    }
    return c;
  }
  throw ConfigError("unknown fixture '" + name + "'");
}

}  // namespace geocooc::synth
