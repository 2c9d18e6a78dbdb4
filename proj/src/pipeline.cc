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

#include "geocooc/pipeline.h"

#include "geocooc/errors.h"
#include "geocooc/hash.h"
#include "geocooc/metrics.h"
#include "geocooc/parallel.h"

namespace geocooc::pipeline {

scalespace::PeakSet prior_peaks(std::span<const ingest::Geotag> tags, const std::string& region_id, double sigma,
                                std::size_t top_k, const scalespace::MeanShiftOptions& options) {
  const auto points = scalespace::to_weighted_points(tags);
  auto ps = scalespace::top_peaks(scalespace::user_peaks(points, scalespace::Kernel(sigma), options), top_k);
  ps.region_id = region_id;
  return ps;
}

std::vector<ingest::Geotag> region_tags(const ingest::Dataset& d, const geo::Region& region) {
  std::vector<ingest::Geotag> out;
  for (const auto& u : d.users()) {
    for (const auto& g : u.tags) {
      if (region.contains(g.pos)) out.push_back(g);
    }
  }
  return out;
}

double mean_weight(std::span<const ingest::Geotag> tags) {
  if (tags.empty()) return 1.0;
  double s = 0.0;
  for (const auto& g : tags) s += g.weight;
  return s / static_cast<double>(tags.size());
}

std::vector<cooccur::UserProfile> user_profiles(const ingest::Dataset& d, const geo::Region& source,
                                                const geo::Region& target, const ProfileOptions& options) {
  const scalespace::Kernel kernel(options.sigma);
  const bool same = source.id() == target.id();
  const auto& users = d.users();
  std::vector<std::optional<cooccur::UserProfile>> slots(users.size());
  parallel_for(users.size(), options.threads, [&](std::size_t i) {
    const auto& u = users[i];
    const auto s_tags = ingest::tags_in_region(u.tags, source);
    if (s_tags.empty()) return;
    const auto t_tags = same ? s_tags : ingest::tags_in_region(u.tags, target);
    if (t_tags.empty()) return;
    if (options.tourist_windows) {
      if (!eval::tourist_filter(std::span<const ingest::Geotag>(s_tags), *options.tourist_windows)) return;
      if (!same && !eval::tourist_filter(std::span<const ingest::Geotag>(t_tags), *options.tourist_windows)) return;
    }
    cooccur::UserProfile p;
    p.user_id = u.user_id;
    std::vector<ingest::Geotag> both = s_tags;
    if (!same) both.insert(both.end(), t_tags.begin(), t_tags.end());
    p.weight = mean_weight(both);
    p.source_peaks =
        scalespace::user_peaks(scalespace::to_weighted_points(s_tags), kernel, options.mean_shift).positions();
    p.target_peaks = same ? p.source_peaks
                          : scalespace::user_peaks(scalespace::to_weighted_points(t_tags), kernel,
                                                   options.mean_shift)
                                .positions();
    slots[i] = std::move(p);
  });
  std::vector<cooccur::UserProfile> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

cooccur::CoocModel build_pair_model(const ingest::Dataset& train, const geo::Region& source,
                                    const geo::Region& target, const PairModelOptions& options,
                                    const scalespace::PeakSet* source_prior,
                                    const scalespace::PeakSet* target_prior) {
  const bool same = source.id() == target.id();
  scalespace::PeakSet sp;
  scalespace::PeakSet tp;
  if (!source_prior) {
    const auto tags = region_tags(train, source);
    sp = prior_peaks(tags, source.id(), options.sigma, options.top_k, options.mean_shift);
    source_prior = &sp;
  }
  if (!target_prior) {
    if (same) {
      target_prior = source_prior;
    } else {
      const auto tags = region_tags(train, target);
      tp = prior_peaks(tags, target.id(), options.sigma, options.top_k, options.mean_shift);
      target_prior = &tp;
    }
  }
  if (source_prior->empty() || target_prior->empty()) {
    throw ValidationError("no training tags in region " + (source_prior->empty() ? source.id() : target.id()));
  }
  ProfileOptions po;
  po.sigma = options.sigma;
  po.tourist_windows = options.training_tourist_windows;
  po.mean_shift = options.mean_shift;
  po.threads = options.threads;
  const auto profiles = user_profiles(train, source, target, po);
  auto cooc = options.cooc;
  cooc.threads = options.threads;
  if (same) cooc.zero_diagonal = true;
  auto model = cooccur::build_cooc_model(profiles, *source_prior, *target_prior, options.sigma, cooc);
  model.source_region = source.id();
  model.target_region = target.id();
  model.dataset_hash = to_hex(train.content_hash());
  return model;
}

}  // namespace geocooc::pipeline
