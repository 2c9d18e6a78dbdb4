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

#include "geocooc/rank.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "geocooc/errors.h"
#include "json.hpp"

namespace geocooc::rank {
namespace {

// position[i] = 0-based rank of index i under descending scores, ties by index
std::vector<std::size_t> positions_of(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> pos(scores.size());
  for (std::size_t r = 0; r < order.size(); ++r) pos[order[r]] = r;
  return pos;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::kPrior: return "prior";
    case Method::kDirect: return "direct";
    case Method::kCosine: return "cosine";
    case Method::kRankDiff: return "rankdiff";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  if (s == "prior") return Method::kPrior;
  if (s == "direct" || s == "cc") return Method::kDirect;
  if (s == "cosine") return Method::kCosine;
  if (s == "rankdiff") return Method::kRankDiff;
  throw ValidationError("unknown ranking method '" + s + "' (prior, direct, cosine, rankdiff)");
}

std::vector<Method> methods_from_list(const std::string& comma_separated) {
  std::vector<Method> out;
  std::stringstream ss(comma_separated);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const Method m = method_from_string(item);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw ValidationError("empty method list");
  return out;
}

std::vector<std::size_t> Ranking::order() const {
  std::vector<std::size_t> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.index);
  return out;
}

Ranking rank_scores(Method method, std::span<const double> scores, std::vector<std::size_t> excluded) {
  std::sort(excluded.begin(), excluded.end());
  Ranking r;
  r.method = method;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::binary_search(excluded.begin(), excluded.end(), i)) r.items.push_back({i, scores[i]});
  }
  std::stable_sort(r.items.begin(), r.items.end(),
                   [](const RankedItem& a, const RankedItem& b) { return a.score > b.score; });
  r.excluded = std::move(excluded);
  return r;
}

Ranking prior_rank(const scalespace::PeakSet& target) {
  const auto amps = target.amplitudes();
  return rank_scores(Method::kPrior, amps);
}

std::vector<double> start_weights(const cooccur::CoocModel& model, std::span<const geo::Point3> user_peaks) {
  std::vector<double> w(model.source.size(), 0.0);
  for (std::size_t m = 0; m < w.size(); ++m) {
    for (const auto& u : user_peaks) {
      w[m] += cooccur::kernel_term(geo::squared_chord_distance(model.source.peaks[m].pos, u), model.sigma,
                                   model.mode);
    }
  }
  return w;
}

std::vector<double> start_indicator(const cooccur::CoocModel& model, std::span<const std::size_t> starts) {
  std::vector<double> w(model.source.size(), 0.0);
  for (const auto m : starts) {
    if (m >= w.size()) throw ValidationError("start peak " + std::to_string(m) + " out of range");
    w[m] += 1.0;
  }
  return w;
}

std::vector<double> combined_scores(const cooccur::CoocModel& model, std::span<const double> weights) {
  if (weights.size() != model.source.size()) throw ValidationError("weight vector does not match source peaks");
  std::vector<double> out(model.target.size(), 0.0);
  for (std::size_t m = 0; m < weights.size(); ++m) {
    if (weights[m] != 0.0) model.values.axpy_row(m, weights[m], out);
  }
  return out;
}

std::vector<double> aggregate_multi_start(std::span<const std::size_t> starts, const cooccur::CoocModel& model) {
  if (starts.empty()) throw ValidationError("multi-start aggregation needs at least one start");
  const auto w = start_indicator(model, starts);
  return combined_scores(model, w);
}

Ranking score_cc(std::span<const geo::Point3> user_peaks, const cooccur::CoocModel& model, double sigma) {
  if (std::abs(sigma - model.sigma) > 1e-9 * model.sigma) {
    throw ConfigError("query sigma " + std::to_string(sigma) + " does not match model sigma " +
                      std::to_string(model.sigma));
  }
  if (user_peaks.empty()) throw ValidationError("user has no peaks in the source region");
  const auto w = start_weights(model, user_peaks);
  const auto scores = combined_scores(model, w);
  return rank_scores(Method::kDirect, scores);
}

Ranking cosine_scores(std::span<const double> cc, double source_norm, std::span<const double> target_amplitudes) {
  if (cc.size() != target_amplitudes.size()) throw ValidationError("cosine inputs differ in length");
  std::vector<double> scores(cc.size(), 0.0);
  std::vector<std::size_t> excluded;
  for (std::size_t n = 0; n < cc.size(); ++n) {
    const double denom = source_norm * target_amplitudes[n];
    if (!(denom > 0.0)) {
      excluded.push_back(n);
      continue;
    }
    scores[n] = cc[n] / std::sqrt(denom);
  }
  return rank_scores(Method::kCosine, scores, std::move(excluded));
}

Ranking cosine_scores(const cooccur::CoocModel& model, std::span<const std::size_t> starts) {
  const auto cc = aggregate_multi_start(starts, model);
  double norm = 0.0;
  for (const auto m : starts) norm += model.source.peaks[m].amplitude;
  return cosine_scores(cc, norm, model.target.amplitudes());
}

Ranking rankdiff_scores(std::span<const double> cc, std::span<const double> prior_amplitudes) {
  if (cc.size() != prior_amplitudes.size()) throw ValidationError("rankdiff inputs differ in length");
  const auto r1 = positions_of(prior_amplitudes);
  const auto r2 = positions_of(cc);
  std::vector<double> psi(prior_amplitudes.begin(), prior_amplitudes.end());
  std::sort(psi.begin(), psi.end(), std::greater<>());
  std::vector<double> rd(cc.size());
  for (std::size_t n = 0; n < cc.size(); ++n) rd[n] = psi[r2[n]] - psi[r1[n]];
  return rank_scores(Method::kRankDiff, rd);
}

std::vector<double> start_weights(const cooccur::CoocModel& model, const StartSpec& start) {
  auto w = start_indicator(model, start.peaks);
  if (!start.points.empty()) {
    const auto kw = start_weights(model, std::span<const geo::Point3>(start.points));
    for (std::size_t m = 0; m < w.size(); ++m) w[m] += kw[m];
  }
  return w;
}

Ranking recommend(const cooccur::CoocModel& model, const StartSpec& start, Method method) {
  if (method == Method::kPrior) return prior_rank(model.target);
  if (start.empty()) throw ValidationError("personalised ranking needs at least one start point or peak");
  const auto w = start_weights(model, start);
  const auto cc = combined_scores(model, w);
  switch (method) {
    case Method::kDirect:
      return rank_scores(Method::kDirect, cc);
    case Method::kCosine: {
      double norm = 0.0;
      for (std::size_t m = 0; m < w.size(); ++m) norm += w[m] * model.source.peaks[m].amplitude;
      return cosine_scores(cc, norm, model.target.amplitudes());
    }
    case Method::kRankDiff:
      return rankdiff_scores(cc, model.target.amplitudes());
    case Method::kPrior:
      break;
  }
  return prior_rank(model.target);
}

std::vector<RankingRow> ranking_rows(const Ranking& r, const scalespace::PeakSet& target, std::size_t limit) {
  const auto prior_pos = positions_of(target.amplitudes());
  std::vector<RankingRow> rows;
  for (std::size_t i = 0; i < r.items.size() && i < limit; ++i) {
    const auto n = r.items[i].index;
    rows.push_back({i + 1, n, target.peaks.at(n).latlon(), r.items[i].score, prior_pos[n] + 1});
  }
  return rows;
}

void write_ranking_jsonl(std::ostream& out, const Ranking& r, const scalespace::PeakSet& target,
                         std::size_t limit) {
  for (const auto& row : ranking_rows(r, target, limit)) {
    nlohmann::json j{{"rank", row.rank},   {"peak", row.peak},   {"lat", row.pos.lat},
                     {"lon", row.pos.lon}, {"score", row.score}, {"prior_rank", row.prior_rank},
                     {"method", to_string(r.method)}};
    out << j.dump() << '\n';
  }
}

}  // namespace geocooc::rank
