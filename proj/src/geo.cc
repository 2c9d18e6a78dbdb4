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

#include "geocooc/geo.h"

#include <algorithm>
#include <fstream>
#include <numbers>

#include "geocooc/errors.h"
#include "json.hpp"

namespace geocooc::geo {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

bool on_segment(const LatLon& p, const LatLon& a, const LatLon& b) {
  const double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
  const double scale = std::max({std::abs(b.lon - a.lon), std::abs(b.lat - a.lat), 1.0});
  if (std::abs(cross) > 1e-12 * scale) return false;
  return p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) &&
         p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat);
}

bool ring_contains(const std::vector<LatLon>& ring, const LatLon& p, bool& on_boundary) {
  bool inside = false;
  // Rings are stored closed, so consecutive pairs cover every edge.
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const LatLon& a = ring[i];
    const LatLon& b = ring[i + 1];
    if (on_segment(p, a, b)) {
      on_boundary = true;
      return true;
    }
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double lon_at = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
      if (p.lon < lon_at) inside = !inside;
    }
  }
  return inside;
}

void validate_box(const BoundingBox& box) {
  if (!(box.min_lat < box.max_lat) || !(box.min_lon < box.max_lon)) {
    throw ValidationError("bounding box requires min < max on both axes");
  }
  if (!is_valid({box.min_lat, box.min_lon}) || !is_valid({box.max_lat, box.max_lon})) {
    throw ValidationError("bounding box corners out of range");
  }
}

}  // namespace

bool is_valid(const LatLon& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon > -180.0 && p.lon <= 180.0;
}

Point3 to_cartesian(const LatLon& p) {
  if (!is_valid(p)) {
    throw ValidationError("latitude/longitude out of range: " + std::to_string(p.lat) + ", " +
                          std::to_string(p.lon));
  }
  const double lat = p.lat * kDegToRad;
  const double lon = p.lon * kDegToRad;
  const double c = std::cos(lat);
  return {kEarthRadius * c * std::cos(lon), kEarthRadius * c * std::sin(lon),
          kEarthRadius * std::sin(lat)};
}

LatLon to_latlon(const Point3& p) {
  const double horizontal = std::hypot(p.x, p.y);
  LatLon out{std::atan2(p.z, horizontal) * kRadToDeg, std::atan2(p.y, p.x) * kRadToDeg};
  if (out.lon <= -180.0) out.lon += 360.0;
  return out;
}

double chord_distance(const Point3& a, const Point3& b) { return (a - b).norm(); }

double squared_chord_distance(const Point3& a, const Point3& b) { return (a - b).squared_norm(); }

LatLon offset_meters(const LatLon& origin, double east_m, double north_m) {
  LatLon out;
  out.lat = origin.lat + north_m / kEarthRadius * kRadToDeg;
  out.lon = origin.lon + east_m / (kEarthRadius * std::cos(origin.lat * kDegToRad)) * kRadToDeg;
  if (out.lon > 180.0) out.lon -= 360.0;
  if (out.lon <= -180.0) out.lon += 360.0;
  out.lat = std::clamp(out.lat, -90.0, 90.0);
  return out;
}

std::string to_string(RegionKind kind) { return kind == RegionKind::kCity ? "city" : "country"; }

RegionKind region_kind_from_string(const std::string& s) {
  if (s == "city") return RegionKind::kCity;
  if (s == "country") return RegionKind::kCountry;
  throw ValidationError("unknown region kind '" + s + "'");
}

Region::Region(std::string id, RegionKind kind, BoundingBox box)
    : id_(std::move(id)), kind_(kind), shape_(box) {
  validate_box(box);
}

Region::Region(std::string id, RegionKind kind, Polygon polygon)
    : id_(std::move(id)), kind_(kind) {
  if (polygon.rings.empty()) throw ValidationError("polygon region '" + id_ + "' has no rings");
  for (auto& ring : polygon.rings) {
    for (const auto& v : ring) {
      if (!is_valid(v)) throw ValidationError("polygon vertex out of range in '" + id_ + "'");
    }
    if (!ring.empty() && !(ring.front() == ring.back())) ring.push_back(ring.front());
    if (ring.size() < 4) throw ValidationError("polygon ring needs at least 3 vertices");
  }
  shape_ = std::move(polygon);
}

bool Region::contains(const LatLon& p) const {
  if (const auto* box = std::get_if<BoundingBox>(&shape_)) {
    return p.lat >= box->min_lat && p.lat <= box->max_lat && p.lon >= box->min_lon &&
           p.lon <= box->max_lon;
  }
  const auto& poly = std::get<Polygon>(shape_);
  bool inside = false;
  for (const auto& ring : poly.rings) {
    bool boundary = false;
    const bool in_ring = ring_contains(ring, p, boundary);
    if (boundary) return true;
    if (in_ring) inside = !inside;
  }
  return inside;
}

BoundingBox Region::bounds() const {
  if (const auto* box = std::get_if<BoundingBox>(&shape_)) return *box;
  BoundingBox out{90.0, 180.0, -90.0, -180.0};
  for (const auto& ring : std::get<Polygon>(shape_).rings) {
    for (const auto& v : ring) {
      out.min_lat = std::min(out.min_lat, v.lat);
      out.max_lat = std::max(out.max_lat, v.lat);
      out.min_lon = std::min(out.min_lon, v.lon);
      out.max_lon = std::max(out.max_lon, v.lon);
    }
  }
  return out;
}

std::string to_string(UsaSubregion r) {
  switch (r) {
    case UsaSubregion::kEast: return "usa-east";
    case UsaSubregion::kWest: return "usa-west";
    case UsaSubregion::kAlaska: return "usa-alaska";
  }
  return "usa-unknown";
}

UsaSubregion usa_subregion(const LatLon& p) {
  if (p.lat > 50.0) return UsaSubregion::kAlaska;
  return p.lon > -98.583 ? UsaSubregion::kEast : UsaSubregion::kWest;
}

std::vector<Region> load_regions(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("region config is not valid JSON: ") + e.what());
  }
  if (!doc.contains("regions") || !doc["regions"].is_array()) {
    throw FormatError("region config needs a top-level \"regions\" array");
  }
  std::vector<Region> out;
  try {
    for (const auto& rec : doc["regions"]) {
      const auto id = rec.at("id").get<std::string>();
      const auto kind = region_kind_from_string(rec.value("kind", "city"));
      if (rec.contains("bbox")) {
        const auto& b = rec["bbox"];
        out.emplace_back(id, kind,
                         BoundingBox{b.at("min_lat").get<double>(), b.at("min_lon").get<double>(),
                                     b.at("max_lat").get<double>(), b.at("max_lon").get<double>()});
      } else if (rec.contains("polygon")) {
        Polygon poly;
        for (const auto& ring : rec["polygon"]) {
          auto& r = poly.rings.emplace_back();
          for (const auto& v : ring) r.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        }
        out.emplace_back(id, kind, std::move(poly));
      } else {
        throw FormatError("region '" + id + "' has neither bbox nor polygon");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed region record: ") + e.what());
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = i + 1; j < out.size(); ++j) {
      if (out[i].id() == out[j].id()) throw FormatError("duplicate region id '" + out[i].id() + "'");
    }
  }
  return out;
}

std::vector<Region> load_regions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open region config '" + path + "'");
  return load_regions(in);
}

void save_regions(std::ostream& out, const std::vector<Region>& regions) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : regions) {
    nlohmann::json rec{{"id", r.id()}, {"kind", to_string(r.kind())}};
    if (const auto* b = std::get_if<BoundingBox>(&r.shape())) {
      rec["bbox"] = {{"min_lat", b->min_lat}, {"min_lon", b->min_lon},
                     {"max_lat", b->max_lat}, {"max_lon", b->max_lon}};
    } else {
      nlohmann::json rings = nlohmann::json::array();
      for (const auto& ring : std::get<Polygon>(r.shape()).rings) {
        nlohmann::json jr = nlohmann::json::array();
        for (const auto& v : ring) jr.push_back({v.lat, v.lon});
        rings.push_back(jr);
      }
      rec["polygon"] = rings;
    }
    arr.push_back(rec);
  }
  out << nlohmann::json{{"regions", arr}}.dump(2) << '\n';
}

const Region& find_region(const std::vector<Region>& regions, const std::string& id) {
  for (const auto& r : regions) {
    if (r.id() == id) return r;
  }
  throw ConfigError("unknown region '" + id + "'");
}

}  // namespace geocooc::geo
