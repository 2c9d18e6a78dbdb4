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

#include "geocooc/geo.h"
#include "geocooc/ingest.h"
#include "geocooc/kernel_density.h"

namespace geocooc::scalespace {

struct Kernel {
  double sigma;  // meters

  // Throws ValidationError unless sigma > 0.
  explicit Kernel(double sigma_m);
};

struct WeightedPoint {
  geo::Point3 pos;
  double weight = 1.0;
};

struct Peak {
  geo::Point3 pos;
  double amplitude = 0.0;             // estimated photo count at the mode
  std::optional<std::size_t> parent;  // seeding peak on the finer level

  // Radial projection back to the sphere.
  geo::LatLon latlon() const { return geo::to_latlon(pos); }
};

struct PeakSet {
  std::string region_id;
  double sigma = 0.0;
  std::vector<Peak> peaks;  // descending amplitude
  std::size_t non_converged = 0;

  std::size_t size() const { return peaks.size(); }
  bool empty() const { return peaks.empty(); }
  std::vector<geo::Point3> positions() const;
  std::vector<double> amplitudes() const;
};

struct ScaleSpace {
  std::string region_id;
  std::vector<double> sigmas;   // strictly increasing
  std::vector<PeakSet> levels;  // one per sigma

  // Level whose sigma matches within 1e-6 relative, or nullptr.
  const PeakSet* level(double sigma) const;
};

struct MeanShiftOptions {
  ModeSearchOptions search;
  double cutoff_sigmas = kDefaultCutoffSigmas;  // <= 0: exact kernel sums
};

std::vector<WeightedPoint> to_weighted_points(std::span<const ingest::Geotag> tags);

// sum_l alpha_l exp(-|q - l|^2 / 2 sigma^2), summed over every point.
double density(std::span<const WeightedPoint> points, const Kernel& kernel, const geo::Point3& q);

// Seeds iterate to density modes; modes within the merge tolerance are fused. Seeds that
// do not converge within max_iter are dropped and counted in PeakSet::non_converged.
PeakSet mean_shift(std::span<const WeightedPoint> points, const Kernel& kernel,
                   std::span<const geo::Point3> seeds, const MeanShiftOptions& options = {});

// n values evenly spaced in log from lo to hi inclusive.
std::vector<double> log_sigma_grid(double lo, double hi, std::size_t n = 19);
std::vector<double> city_sigma_grid();     // 10 m .. 10 km
std::vector<double> country_sigma_grid();  // 1 km .. 1000 km
std::vector<double> sigma_grid_for(geo::RegionKind kind);

// Finest level seeded by every point, each coarser level by the previous level's peaks.
ScaleSpace build_scale_ladder(std::span<const WeightedPoint> points, const std::vector<double>& sigmas,
                              const std::string& region_id = {}, const MeanShiftOptions& options = {});

// First min(n, size) peaks.
PeakSet top_peaks(const PeakSet& ps, std::size_t n = 500);

// Peaks of a single user's density, seeded from all of the user's points.
PeakSet user_peaks(std::span<const WeightedPoint> points, const Kernel& kernel,
                   const MeanShiftOptions& options = {});

}  // namespace geocooc::scalespace
