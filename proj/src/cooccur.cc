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

#include "geocooc/cooccur.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "geocooc/errors.h"
#include "geocooc/kernel_density.h"
#include "geocooc/parallel.h"

namespace geocooc::cooccur {
namespace {

using Vec6 = std::array<double, 6>;

Vec6 as_array(const Pair6& p) {
  return {p.source.x, p.source.y, p.source.z, p.target.x, p.target.y, p.target.z};
}

Pair6 as_pair(const Vec6& v) { return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}}; }

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

// kernel mass of each peak in `peaks` from a user's own peaks; zero entries omitted
std::vector<std::pair<std::uint32_t, double>> peak_affinity(const std::vector<geo::Point3>& peaks,
                                                            const std::vector<geo::Point3>& user,
                                                            double inv_two_sigma2) {
  std::vector<std::pair<std::uint32_t, double>> out;
  for (std::size_t m = 0; m < peaks.size(); ++m) {
    double s = 0.0;
    for (const auto& u : user) s += std::exp(-geo::squared_chord_distance(peaks[m], u) * inv_two_sigma2);
    if (s > 0.0) out.emplace_back(static_cast<std::uint32_t>(m), s);
  }
  return out;
}

void fill_squared(std::span<const UserProfile> users, const std::vector<geo::Point3>& src,
                  const std::vector<geo::Point3>& tgt, double sigma, unsigned threads,
                  std::vector<double>& dense) {
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const std::size_t cols = tgt.size();
  std::vector<std::vector<std::pair<std::uint32_t, double>>> a(users.size());
  std::vector<std::vector<std::pair<std::uint32_t, double>>> b(users.size());
  parallel_for(users.size(), threads, [&](std::size_t u) {
    if (users[u].source_peaks.empty() || users[u].target_peaks.empty()) return;
    a[u] = peak_affinity(src, users[u].source_peaks, inv);
    b[u] = peak_affinity(tgt, users[u].target_peaks, inv);
  });
  // Invert so rows can be filled independently: row m -> (user, a_u(m)).
  std::vector<std::vector<std::pair<std::uint32_t, double>>> by_row(src.size());
  for (std::size_t u = 0; u < users.size(); ++u) {
    for (const auto& [m, v] : a[u]) by_row[m].emplace_back(static_cast<std::uint32_t>(u), v);
  }
  parallel_for(src.size(), threads, [&](std::size_t m) {
    double* row = dense.data() + m * cols;
    for (const auto& [u, av] : by_row[m]) {
      const double scale = users[u].weight * av;
      for (const auto& [n, bv] : b[u]) row[n] += scale * bv;
    }
  });
}

void fill_literal(std::span<const UserProfile> users, const std::vector<geo::Point3>& src,
                  const std::vector<geo::Point3>& tgt, double sigma, unsigned threads,
                  std::vector<double>& dense) {
  const std::size_t cols = tgt.size();
  // Squared target distances per user: [n][j] flattened.
  std::vector<std::vector<double>> dt(users.size());
  for (std::size_t u = 0; u < users.size(); ++u) {
    const auto& tp = users[u].target_peaks;
    dt[u].resize(cols * tp.size());
    for (std::size_t n = 0; n < cols; ++n) {
      for (std::size_t j = 0; j < tp.size(); ++j) dt[u][n * tp.size() + j] = geo::squared_chord_distance(tgt[n], tp[j]);
    }
  }
  parallel_for(src.size(), threads, [&](std::size_t m) {
    double* row = dense.data() + m * cols;
    for (std::size_t u = 0; u < users.size(); ++u) {
      const auto& user = users[u];
      const std::size_t nt = user.target_peaks.size();
      if (user.source_peaks.empty() || nt == 0) continue;
      for (const auto& sp : user.source_peaks) {
        const double ds = geo::squared_chord_distance(src[m], sp);
        for (std::size_t n = 0; n < cols; ++n) {
          double s = 0.0;
          for (std::size_t j = 0; j < nt; ++j) s += kernel_term(ds + dt[u][n * nt + j], sigma, MetricMode::kLiteral);
          row[n] += user.weight * s;
        }
      }
    }
  });
}

}  // namespace

std::string to_string(MetricMode m) { return m == MetricMode::kSquared ? "squared" : "literal"; }

MetricMode metric_mode_from_string(const std::string& s) {
  if (s == "squared") return MetricMode::kSquared;
  if (s == "literal") return MetricMode::kLiteral;
  throw ValidationError("unknown metric mode '" + s + "' (expected squared or literal)");
}

double kernel_term(double squared_distance, double sigma, MetricMode mode) {
  const double d = mode == MetricMode::kSquared ? squared_distance : std::sqrt(squared_distance);
  return std::exp(-d / (2.0 * sigma * sigma));
}

double squared_distance(const Pair6& a, const Pair6& b) {
  return geo::squared_chord_distance(a.source, b.source) + geo::squared_chord_distance(a.target, b.target);
}

std::vector<PairPoint> user_pair_points(std::span<const geo::Point3> source_peaks,
                                        std::span<const geo::Point3> target_peaks, const std::string& owner,
                                        double weight) {
  std::vector<PairPoint> out;
  out.reserve(source_peaks.size() * target_peaks.size());
  for (const auto& s : source_peaks) {
    for (const auto& t : target_peaks) out.push_back({s, t, owner, weight});
  }
  return out;
}

double cooccurrence_at(const Pair6& c, std::span<const PairPoint> pairs, double sigma, MetricMode mode) {
  double sum = 0.0;
  for (const auto& p : pairs) sum += p.weight * kernel_term(squared_distance(c, p.point()), sigma, mode);
  return sum;
}

std::vector<PairPoint> all_pair_points(std::span<const UserProfile> users) {
  std::vector<PairPoint> out;
  for (const auto& u : users) {
    auto p = user_pair_points(u.source_peaks, u.target_peaks, u.user_id, u.weight);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

CoocModel build_cooc_model(std::span<const UserProfile> users, const scalespace::PeakSet& source,
                           const scalespace::PeakSet& target, double sigma, const CoocOptions& options) {
  if (!(sigma > 0.0)) throw ValidationError("co-occurrence sigma must be > 0");
  if (options.zero_diagonal && source.size() != target.size()) {
    throw ValidationError("diagonal zeroing needs identical source and target peak sets");
  }
  const auto src = source.positions();
  const auto tgt = target.positions();
  std::vector<double> dense(src.size() * tgt.size(), 0.0);

  CoocModel model;
  model.source_region = source.region_id;
  model.target_region = target.region_id;
  model.sigma = sigma;
  model.mode = options.mode;
  model.source = source;
  model.target = target;
  model.diagonal_zeroed = options.zero_diagonal;
  for (const auto& u : users) {
    if (!u.source_peaks.empty() && !u.target_peaks.empty()) ++model.contributing_users;
  }
  model.no_shared_users = model.contributing_users == 0;

  if (!model.no_shared_users) {
    if (options.mode == MetricMode::kSquared) {
      fill_squared(users, src, tgt, sigma, options.threads, dense);
    } else {
      fill_literal(users, src, tgt, sigma, options.threads, dense);
    }
  }
  if (options.zero_diagonal) {
    for (std::size_t m = 0; m < src.size(); ++m) dense[m * tgt.size() + m] = 0.0;
  }
  model.values = SparseMatrix::from_dense(src.size(), tgt.size(), dense, options.zero_threshold);
  return model;
}

Peak6Set full_6d_peaks(std::span<const PairPoint> pairs, double sigma, const scalespace::MeanShiftOptions& options) {
  Peak6Set out;
  out.sigma = sigma;
  if (pairs.empty()) return out;
  std::vector<Vec6> pts;
  std::vector<double> weights;
  pts.reserve(pairs.size());
  for (const auto& p : pairs) {
    pts.push_back(as_array(p.point()));
    weights.push_back(p.weight);
  }
  std::vector<Vec6> seeds = pts;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  const KernelDensity<6> kd(std::move(pts), std::move(weights), sigma, options.cutoff_sigmas);
  const auto result = kd.find_modes(seeds, options.search);
  out.non_converged = result.non_converged;
  for (const auto& m : result.modes) out.peaks.push_back({as_pair(m.pos), m.amplitude});
  return out;
}

ApproxReport compare_approx_to_full(const CoocModel& model, const Peak6Set& full, std::size_t k,
                                    double match_radius) {
  if (model.mode != MetricMode::kSquared) {
    throw ConfigError("full 6D comparison is defined for the squared metric only");
  }
  if (full.peaks.empty()) throw ValidationError("no full 6D modes to compare against");
  ApproxReport report;
  report.k_requested = k;
  report.match_radius = match_radius > 0.0 ? match_radius : model.sigma;

  std::vector<Triplet> entries = model.values.triplets();
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  if (entries.size() < k) {
    report.note = "only " + std::to_string(entries.size()) + " nonzero entries available; using all";
  }
  report.k_used = std::min(k, entries.size());

  std::set<std::size_t> claimed;
  std::vector<double> distances;
  std::vector<double> decays;
  double decay_sum = 0.0;
  report.max_decay = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < report.k_used; ++i) {
    const auto& t = entries[i];
    const Pair6 c{model.source.peaks[t.row].pos, model.target.peaks[t.col].pos};
    ApproxEntry e{t.row, t.col, t.value, 0, std::numeric_limits<double>::infinity(), 0.0, 0.0};
    for (std::size_t j = 0; j < full.peaks.size(); ++j) {
      const double d = std::sqrt(squared_distance(c, full.peaks[j].pos));
      if (d < e.distance) {
        e.distance = d;
        e.nearest_mode = j;
      }
    }
    e.mode_amplitude = full.peaks[e.nearest_mode].amplitude;
    e.decay = (e.value - e.mode_amplitude) / e.mode_amplitude;
    if (e.distance <= report.match_radius) {
      ++report.matched;
      if (claimed.insert(e.nearest_mode).second) ++report.unique_matched;
    }
    distances.push_back(e.distance);
    decays.push_back(e.decay);
    decay_sum += e.decay;
    report.max_decay = std::max(report.max_decay, e.decay);
    report.entries.push_back(e);
  }
  report.median_distance = median(distances);
  report.median_decay = median(decays);
  report.mean_decay = report.k_used ? decay_sum / static_cast<double>(report.k_used) : 0.0;
  if (report.k_used == 0) report.max_decay = 0.0;
  return report;
}

}  // namespace geocooc::cooccur
