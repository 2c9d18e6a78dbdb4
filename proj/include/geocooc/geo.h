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

#include <cmath>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace geocooc::geo {

// Radius of the spherical Earth model, in meters.
inline constexpr double kEarthRadius = 6367449.0;

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Point3 operator*(double s, const Point3& a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Point3&, const Point3&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double squared_norm() const { return x * x + y * y + z * z; }
};

inline double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

struct LatLon {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, (-180, 180]

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

bool is_valid(const LatLon& p);

// Throws ValidationError when p is out of range.
Point3 to_cartesian(const LatLon& p);

// Inverse spherical mapping. Points off the sphere are projected radially.
LatLon to_latlon(const Point3& p);

double chord_distance(const Point3& a, const Point3& b);
double squared_chord_distance(const Point3& a, const Point3& b);

// Offsets a position by metric east/north displacements in the local tangent plane.
LatLon offset_meters(const LatLon& origin, double east_m, double north_m);

enum class RegionKind { kCity, kCountry };

std::string to_string(RegionKind kind);
RegionKind region_kind_from_string(const std::string& s);

struct BoundingBox {
  double min_lat = 0.0;
  double min_lon = 0.0;
  double max_lat = 0.0;
  double max_lon = 0.0;
};

// One or more closed rings; holes and multi-part shapes follow from the even-odd rule.
struct Polygon {
  std::vector<std::vector<LatLon>> rings;
};

class Region {
 public:
  // Throws ValidationError on degenerate shapes. Open rings are closed.
  Region(std::string id, RegionKind kind, BoundingBox box);
  Region(std::string id, RegionKind kind, Polygon polygon);

  const std::string& id() const { return id_; }
  RegionKind kind() const { return kind_; }
  const std::variant<BoundingBox, Polygon>& shape() const { return shape_; }

  // Boundary points count as inside.
  bool contains(const LatLon& p) const;

  // Smallest lat/lon box enclosing the shape.
  BoundingBox bounds() const;

 private:
  std::string id_;
  RegionKind kind_;
  std::variant<BoundingBox, Polygon> shape_;
};

enum class UsaSubregion { kEast, kWest, kAlaska };

std::string to_string(UsaSubregion r);

// Latitude cut first, then the -98.583 longitude split.
UsaSubregion usa_subregion(const LatLon& p);

// Region config: {"regions": [{"id", "kind", "bbox": {...}} | {"id", "kind", "polygon": [[[lat, lon], ...]]}]}
std::vector<Region> load_regions(std::istream& in);
std::vector<Region> load_regions_file(const std::string& path);
void save_regions(std::ostream& out, const std::vector<Region>& regions);

const Region& find_region(const std::vector<Region>& regions, const std::string& id);

}  // namespace geocooc::geo
