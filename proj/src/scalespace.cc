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

#include "geocooc/scalespace.h"

#include <algorithm>
#include <cmath>

#include "geocooc/errors.h"

namespace geocooc::scalespace {
namespace {

using Vec3 = std::array<double, 3>;

Vec3 as_array(const geo::Point3& p) { return {p.x, p.y, p.z}; }
geo::Point3 as_point(const Vec3& v) { return {v[0], v[1], v[2]}; }

KernelDensity<3> make_density(std::span<const WeightedPoint> points, double sigma, double cutoff) {
  std::vector<Vec3> pts;
  std::vector<double> weights;
  pts.reserve(points.size());
  weights.reserve(points.size());
  for (const auto& p : points) {
    pts.push_back(as_array(p.pos));
    weights.push_back(p.weight);
  }
  return KernelDensity<3>(std::move(pts), std::move(weights), sigma, cutoff);
}

PeakSet run_modes(const KernelDensity<3>& kd, const std::vector<Vec3>& seeds, double sigma,
                  const MeanShiftOptions& options, bool record_parent) {
  const auto result = kd.find_modes(seeds, options.search);
  PeakSet out;
  out.sigma = sigma;
  out.non_converged = result.non_converged;
  out.peaks.reserve(result.modes.size());
  for (const auto& m : result.modes) {
    Peak p{as_point(m.pos), m.amplitude, std::nullopt};
    if (record_parent) p.parent = m.first_seed;
    out.peaks.push_back(p);
  }
  return out;
}

// Identical positions converge identically; seeding once per distinct point is equivalent.
std::vector<Vec3> distinct_positions(std::span<const WeightedPoint> points) {
  std::vector<Vec3> seeds;
  seeds.reserve(points.size());
  for (const auto& p : points) seeds.push_back(as_array(p.pos));
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  return seeds;
}

}  // namespace

Kernel::Kernel(double sigma_m) : sigma(sigma_m) {
  if (!(sigma_m > 0.0) || !std::isfinite(sigma_m)) throw ValidationError("kernel sigma must be > 0");
}

std::vector<geo::Point3> PeakSet::positions() const {
  std::vector<geo::Point3> out;
  out.reserve(peaks.size());
  for (const auto& p : peaks) out.push_back(p.pos);
  return out;
}

std::vector<double> PeakSet::amplitudes() const {
  std::vector<double> out;
  out.reserve(peaks.size());
  for (const auto& p : peaks) out.push_back(p.amplitude);
  return out;
}

const PeakSet* ScaleSpace::level(double sigma) const {
  for (std::size_t i = 0; i < sigmas.size() && i < levels.size(); ++i) {
    if (std::abs(sigmas[i] - sigma) <= 1e-6 * sigma) return &levels[i];
  }
  return nullptr;
}

std::vector<WeightedPoint> to_weighted_points(std::span<const ingest::Geotag> tags) {
  std::vector<WeightedPoint> out;
  out.reserve(tags.size());
  for (const auto& g : tags) out.push_back({g.xyz(), g.weight});
  return out;
}

double density(std::span<const WeightedPoint> points, const Kernel& kernel, const geo::Point3& q) {
  const double inv = 1.0 / (2.0 * kernel.sigma * kernel.sigma);
  double sum = 0.0;
  for (const auto& p : points) sum += p.weight * std::exp(-geo::squared_chord_distance(p.pos, q) * inv);
  return sum;
}

PeakSet mean_shift(std::span<const WeightedPoint> points, const Kernel& kernel,
                   std::span<const geo::Point3> seeds, const MeanShiftOptions& options) {
  if (points.empty()) throw ValidationError("mean shift needs at least one point");
  if (seeds.empty()) throw ValidationError("mean shift needs at least one seed");
  const auto kd = make_density(points, kernel.sigma, options.cutoff_sigmas);
  std::vector<Vec3> s;
  s.reserve(seeds.size());
  for (const auto& p : seeds) s.push_back(as_array(p));
  return run_modes(kd, s, kernel.sigma, options, false);
}

std::vector<double> log_sigma_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw ValidationError("sigma grid needs 0 < lo < hi and n >= 2");
  std::vector<double> out(n);
  const double ratio = std::log(hi / lo);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.back() = hi;
  return out;
}

std::vector<double> city_sigma_grid() { return log_sigma_grid(10.0, 10000.0, 19); }
std::vector<double> country_sigma_grid() { return log_sigma_grid(1000.0, 1000000.0, 19); }

std::vector<double> sigma_grid_for(geo::RegionKind kind) {
  return kind == geo::RegionKind::kCity ? city_sigma_grid() : country_sigma_grid();
}

ScaleSpace build_scale_ladder(std::span<const WeightedPoint> points, const std::vector<double>& sigmas,
                              const std::string& region_id, const MeanShiftOptions& options) {
  if (sigmas.empty()) throw ValidationError("empty sigma grid");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0)) throw ValidationError("sigma grid values must be > 0");
    if (i > 0 && !(sigmas[i] > sigmas[i - 1])) throw ValidationError("sigma grid must be strictly increasing");
  }
  ScaleSpace space;
  space.region_id = region_id;
  space.sigmas = sigmas;
  space.levels.resize(sigmas.size());
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    space.levels[i].region_id = region_id;
    space.levels[i].sigma = sigmas[i];
  }
  if (points.empty()) return space;

  std::vector<Vec3> seeds = distinct_positions(points);
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const auto kd = make_density(points, sigmas[i], options.cutoff_sigmas);
    PeakSet level = run_modes(kd, seeds, sigmas[i], options, i > 0);
    level.region_id = region_id;
    seeds.clear();
    for (const auto& p : level.peaks) seeds.push_back(as_array(p.pos));
    space.levels[i] = std::move(level);
    if (seeds.empty()) break;
  }
  return space;
}

PeakSet top_peaks(const PeakSet& ps, std::size_t n) {
  PeakSet out = ps;
  if (out.peaks.size() > n) out.peaks.resize(n);
  return out;
}

PeakSet user_peaks(std::span<const WeightedPoint> points, const Kernel& kernel,
                   const MeanShiftOptions& options) {
  if (points.empty()) return PeakSet{{}, kernel.sigma, {}, 0};
  const auto kd = make_density(points, kernel.sigma, options.cutoff_sigmas);
  return run_modes(kd, distinct_positions(points), kernel.sigma, options, false);
}

}  // namespace geocooc::scalespace
