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

// Unnormalised Gaussian kernel density over weighted points in R^D and mean-shift
// mode search. D = 3 serves the geographic scale space, D = 6 the co-occurrence space.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "geocooc/errors.h"
#include "geocooc/parallel.h"

namespace geocooc {

// Kernel support cut at this many sigmas; exp(-7.5^2 / 2) < 1e-12.
inline constexpr double kDefaultCutoffSigmas = 7.5;

struct ModeSearchOptions {
  double tol_factor = 1e-4;    // convergence: step < tol_factor * sigma
  double merge_factor = 1e-2;  // modes closer than merge_factor * sigma are one mode
  int max_iter = 1000;
  unsigned threads = 1;
};

template <std::size_t D>
struct Mode {
  std::array<double, D> pos{};
  double amplitude = 0.0;
  std::size_t first_seed = 0;  // lowest seed index that converged here
};

template <std::size_t D>
struct ModeSearchResult {
  std::vector<Mode<D>> modes;  // descending amplitude, ties by quantised position
  std::vector<std::optional<std::size_t>> seed_mode;  // seed -> index into modes
  std::size_t non_converged = 0;
  std::size_t iterations = 0;
};

template <std::size_t D>
inline double squared_distance(const std::array<double, D>& a, const std::array<double, D>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < D; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Lexicographic order on positions quantised to millimetres.
template <std::size_t D>
inline bool quantised_less(const std::array<double, D>& a, const std::array<double, D>& b) {
  for (std::size_t i = 0; i < D; ++i) {
    const auto qa = std::llround(a[i] * 1e3);
    const auto qb = std::llround(b[i] * 1e3);
    if (qa != qb) return qa < qb;
  }
  return false;
}

// Uniform hash grid over the first three coordinates.
class GridIndex {
 public:
  using Key = std::array<std::int64_t, 3>;

  GridIndex() = default;
  explicit GridIndex(double cell) : cell_(cell) {}

  Key key(const double* coords) const {
    return {static_cast<std::int64_t>(std::floor(coords[0] / cell_)),
            static_cast<std::int64_t>(std::floor(coords[1] / cell_)),
            static_cast<std::int64_t>(std::floor(coords[2] / cell_))};
  }

  void insert(const double* coords, std::uint32_t id) { cells_[key(coords)].push_back(id); }

  // Visits every id stored in the 27 cells around coords.
  template <typename Fn>
  void for_neighbors(const double* coords, Fn&& fn) const {
    const Key k = key(coords);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find({k[0] + dx, k[1] + dy, k[2] + dz});
          if (it == cells_.end()) continue;
          for (const auto id : it->second) fn(id);
        }
      }
    }
  }

  double cell() const { return cell_; }

 private:
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = 0x9e3779b97f4a7c15ULL;
      for (const auto v : k) {
        h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      }
      return static_cast<std::size_t>(h);
    }
  };

  double cell_ = 1.0;
  std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> cells_;
};

template <std::size_t D>
class KernelDensity {
  static_assert(D >= 3, "grid index keys on the first three coordinates");

 public:
  using Vec = std::array<double, D>;

  // cutoff_sigmas <= 0 disables truncation: every point contributes to every query.
  KernelDensity(std::vector<Vec> points, std::vector<double> weights, double sigma,
                double cutoff_sigmas = kDefaultCutoffSigmas)
      : points_(std::move(points)), weights_(std::move(weights)), sigma_(sigma) {
    if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw ValidationError("kernel sigma must be > 0");
    if (weights_.empty()) weights_.assign(points_.size(), 1.0);
    if (weights_.size() != points_.size()) throw ValidationError("weights and points differ in size");
    inv_two_sigma2_ = 1.0 / (2.0 * sigma_ * sigma_);
    if (cutoff_sigmas > 0.0) {
      cutoff2_ = (cutoff_sigmas * sigma_) * (cutoff_sigmas * sigma_);
      grid_.emplace(cutoff_sigmas * sigma_);
      for (std::size_t i = 0; i < points_.size(); ++i) {
        grid_->insert(points_[i].data(), static_cast<std::uint32_t>(i));
      }
    }
  }

  double sigma() const { return sigma_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<Vec>& points() const { return points_; }
  double total_weight() const {
    double s = 0.0;
    for (const double w : weights_) s += w;
    return s;
  }

  // sum_l alpha_l * exp(-|q - l|^2 / 2 sigma^2)
  double density(const Vec& q) const {
    double sum = 0.0;
    visit(q, [&](std::size_t i, double k) { sum += weights_[i] * k; });
    return sum;
  }

  // One mean-shift update. Returns false when no point carries kernel mass at q.
  bool shift(const Vec& q, Vec& next) const {
    Vec acc{};
    double mass = 0.0;
    visit(q, [&](std::size_t i, double k) {
      const double w = weights_[i] * k;
      mass += w;
      for (std::size_t d = 0; d < D; ++d) acc[d] += w * (points_[i][d] - q[d]);
    });
    if (!(mass > 0.0)) return false;
    for (std::size_t d = 0; d < D; ++d) next[d] = q[d] + acc[d] / mass;
    return true;
  }

  // Iterates each seed to a fixed point, merges nearby results and ranks them by density.
  ModeSearchResult<D> find_modes(const std::vector<Vec>& seeds, const ModeSearchOptions& opt) const {
    const double tol2 = (opt.tol_factor * sigma_) * (opt.tol_factor * sigma_);
    std::vector<std::optional<Vec>> converged(seeds.size());
    std::vector<std::size_t> iters(seeds.size(), 0);
    parallel_for(seeds.size(), opt.threads, [&](std::size_t s) {
      Vec x = seeds[s];
      Vec next{};
      for (int it = 0; it < opt.max_iter; ++it) {
        if (!shift(x, next)) return;
        ++iters[s];
        const double step2 = squared_distance(x, next);
        x = next;
        if (step2 < tol2) {
          converged[s] = x;
          return;
        }
      }
    });

    ModeSearchResult<D> result;
    result.seed_mode.resize(seeds.size());
    const double merge = opt.merge_factor * sigma_;
    const double merge2 = merge * merge;
    GridIndex merge_grid(std::max(merge, 1e-9));
    std::vector<Vec> reps;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      result.iterations += iters[s];
      if (!converged[s]) {
        ++result.non_converged;
        continue;
      }
      const Vec& x = *converged[s];
      std::optional<std::size_t> hit;
      merge_grid.for_neighbors(x.data(), [&](std::uint32_t id) {
        if (!hit && squared_distance(reps[id], x) <= merge2) hit = id;
      });
      if (!hit) {
        hit = reps.size();
        merge_grid.insert(x.data(), static_cast<std::uint32_t>(reps.size()));
        reps.push_back(x);
        result.modes.push_back(Mode<D>{x, 0.0, s});
      }
      result.seed_mode[s] = hit;
    }
    parallel_for(result.modes.size(), opt.threads,
                 [&](std::size_t i) { result.modes[i].amplitude = density(result.modes[i].pos); });

    std::vector<std::size_t> order(result.modes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& ma = result.modes[a];
      const auto& mb = result.modes[b];
      if (ma.amplitude != mb.amplitude) return ma.amplitude > mb.amplitude;
      return quantised_less(ma.pos, mb.pos);
    });
    std::vector<std::size_t> rank_of(order.size());
    std::vector<Mode<D>> sorted;
    sorted.reserve(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
      rank_of[order[r]] = r;
      sorted.push_back(result.modes[order[r]]);
    }
    result.modes = std::move(sorted);
    for (auto& m : result.seed_mode) {
      if (m) m = rank_of[*m];
    }
    return result;
  }

 private:
  template <typename Fn>
  void visit(const Vec& q, Fn&& fn) const {
    if (!grid_) {
      for (std::size_t i = 0; i < points_.size(); ++i) {
        fn(i, std::exp(-squared_distance(points_[i], q) * inv_two_sigma2_));
      }
      return;
    }
    grid_->for_neighbors(q.data(), [&](std::uint32_t i) {
      const double d2 = squared_distance(points_[i], q);
      if (d2 <= cutoff2_) fn(i, std::exp(-d2 * inv_two_sigma2_));
    });
  }

  std::vector<Vec> points_;
  std::vector<double> weights_;
  double sigma_;
  double inv_two_sigma2_ = 0.0;
  double cutoff2_ = 0.0;
  std::optional<GridIndex> grid_;
};

}  // namespace geocooc
