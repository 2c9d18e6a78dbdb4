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

#include <span>
#include <string>
#include <vector>

#include "geocooc/geo.h"
#include "geocooc/scalespace.h"
#include "geocooc/sparse_matrix.h"

namespace geocooc::cooccur {

// How the co-occurrence exponent treats the 6D distance d: exp(-d^2 / 2s^2) or exp(-d / 2s^2).
enum class MetricMode { kSquared, kLiteral };

std::string to_string(MetricMode m);
MetricMode metric_mode_from_string(const std::string& s);

// Kernel value for a squared 6D (or 3D) distance under the given mode.
double kernel_term(double squared_distance, double sigma, MetricMode mode);

// A point in R^6: a source-region location paired with a target-region location.
struct Pair6 {
  geo::Point3 source;
  geo::Point3 target;
};

double squared_distance(const Pair6& a, const Pair6& b);

struct PairPoint {
  geo::Point3 source;
  geo::Point3 target;
  std::string owner;
  double weight = 1.0;

  Pair6 point() const { return {source, target}; }
};

// Full Cartesian product of one user's peaks in the two regions.
std::vector<PairPoint> user_pair_points(std::span<const geo::Point3> source_peaks,
                                        std::span<const geo::Point3> target_peaks, const std::string& owner,
                                        double weight = 1.0);

// sum over pairs of weight * exp(-D(c, pair) / 2 sigma^2)
double cooccurrence_at(const Pair6& c, std::span<const PairPoint> pairs, double sigma,
                       MetricMode mode = MetricMode::kSquared);

// One training user's peaks in both regions. weight multiplies each of the user's pairs.
struct UserProfile {
  std::string user_id;
  double weight = 1.0;
  std::vector<geo::Point3> source_peaks;
  std::vector<geo::Point3> target_peaks;
};

std::vector<PairPoint> all_pair_points(std::span<const UserProfile> users);

struct CoocOptions {
  MetricMode mode = MetricMode::kSquared;
  bool zero_diagonal = false;  // within-region models: clear (m, m)
  double zero_threshold = 1e-12;
  unsigned threads = 1;
};

struct CoocModel {
  std::string source_region;
  std::string target_region;
  double sigma = 0.0;
  MetricMode mode = MetricMode::kSquared;
  scalespace::PeakSet source;
  scalespace::PeakSet target;
  SparseMatrix values;  // (source peak m, target peak n)
  bool diagonal_zeroed = false;
  bool no_shared_users = false;  // no training user had peaks in both regions
  std::size_t contributing_users = 0;
  std::string dataset_hash;

  double at(std::size_t m, std::size_t n) const { return values.at(m, n); }
};

// Entry (m, n) = cooccurrence_at(<source m, target n>, all users' pairs).
CoocModel build_cooc_model(std::span<const UserProfile> users, const scalespace::PeakSet& source,
                           const scalespace::PeakSet& target, double sigma, const CoocOptions& options = {});

struct Peak6 {
  Pair6 pos;
  double amplitude = 0.0;
};

struct Peak6Set {
  double sigma = 0.0;
  std::vector<Peak6> peaks;  // descending amplitude
  std::size_t non_converged = 0;
};

// Mean shift on the full 6D co-occurrence density, seeded from every pair point.
Peak6Set full_6d_peaks(std::span<const PairPoint> pairs, double sigma,
                       const scalespace::MeanShiftOptions& options = {});

struct ApproxEntry {
  std::size_t m = 0;
  std::size_t n = 0;
  double value = 0.0;
  std::size_t nearest_mode = 0;
  double distance = 0.0;  // 6D, meters
  double mode_amplitude = 0.0;
  double decay = 0.0;  // (value - mode amplitude) / mode amplitude
};

struct ApproxReport {
  std::size_t k_requested = 0;
  std::size_t k_used = 0;
  double match_radius = 0.0;
  std::size_t matched = 0;         // nearest mode within match_radius
  std::size_t unique_matched = 0;  // ... and that mode not claimed by a higher entry
  double median_distance = 0.0;
  double median_decay = 0.0;
  double mean_decay = 0.0;
  double max_decay = 0.0;
  std::string note;
  std::vector<ApproxEntry> entries;
};

// Compares the k largest matrix entries with their nearest full-6D modes. match_radius
// defaults to the model sigma. Requires a squared-metric model.
ApproxReport compare_approx_to_full(const CoocModel& model, const Peak6Set& full, std::size_t k = 50,
                                    double match_radius = 0.0);

}  // namespace geocooc::cooccur
