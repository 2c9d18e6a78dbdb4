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

#include "geocooc/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "geocooc/errors.h"
#include "geocooc/parallel.h"

namespace geocooc::eval {
namespace {

bool same_sigma(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

double resolve_prune_sigma(double requested, geo::RegionKind kind) {
  return requested > 0.0 ? requested : scalespace::sigma_grid_for(kind).front();
}

void check_model(const cooccur::CoocModel& model, const std::string& source, const std::string& target,
                 double sigma) {
  if (model.source_region != source || model.target_region != target) {
    throw ConfigError("model covers " + model.source_region + " -> " + model.target_region + ", not " + source +
                      " -> " + target);
  }
  if (!same_sigma(model.sigma, sigma)) {
    throw ConfigError("model sigma " + std::to_string(model.sigma) + " differs from evaluation sigma " +
                      std::to_string(sigma));
  }
}

std::size_t peak_count(std::span<const ingest::Geotag> tags, double sigma,
                       const scalespace::MeanShiftOptions& options) {
  return scalespace::user_peaks(scalespace::to_weighted_points(tags), scalespace::Kernel(sigma), options).size();
}

// Popularity of each test location: the least popular target peak within PC, else the
// nearest target peak.
std::vector<double> test_location_amplitudes(const scalespace::PeakSet& target,
                                             const scalespace::PeakSet& test_peaks, double pc) {
  std::vector<double> out;
  const double pc2 = pc * pc;
  for (const auto& tp : test_peaks.peaks) {
    double lowest = std::numeric_limits<double>::infinity();
    double nearest_d2 = std::numeric_limits<double>::infinity();
    double nearest_amp = 0.0;
    for (const auto& p : target.peaks) {
      const double d2 = geo::squared_chord_distance(tp.pos, p.pos);
      if (d2 <= pc2) lowest = std::min(lowest, p.amplitude);
      if (d2 < nearest_d2) {
        nearest_d2 = d2;
        nearest_amp = p.amplitude;
      }
    }
    const double a = std::isfinite(lowest) ? lowest : nearest_amp;
    if (a > 0.0) out.push_back(a);
  }
  return out;
}

enum class Outcome { kNone, kRow, kPruned, kTourist, kSingleDay };

struct Slot {
  Outcome outcome = Outcome::kNone;
  EvalRow row;
};

EvalReport collect(std::vector<Slot>& slots, const EvalConfig& config, std::string label) {
  EvalReport report;
  report.label = std::move(label);
  report.sigma = config.sigma;
  report.pc = config.pc;
  report.p_depth = config.p_depth;
  report.map_depth = config.map_depth;
  report.methods = config.methods;
  for (auto& s : slots) {
    switch (s.outcome) {
      case Outcome::kNone:
        continue;
      case Outcome::kRow:
        report.rows.push_back(std::move(s.row));
        break;
      case Outcome::kPruned:
        ++report.counts.pruned;
        break;
      case Outcome::kTourist:
        ++report.counts.tourist_rejected;
        break;
      case Outcome::kSingleDay:
        ++report.counts.single_day;
        break;
    }
    ++report.counts.candidates;
  }
  summarize(report);
  if (report.rows.empty()) {
    report.empty_reason = report.counts.candidates == 0
                              ? "no test user has tags in both regions"
                              : "no test user passed pruning, day split and tourist filters";
  }
  return report;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

nlohmann::json ratio_json(const BenefitRatio& br) {
  nlohmann::json j{{"improved", br.improved}, {"deteriorated", br.deteriorated}, {"ties", br.ties}};
  const double v = br.value();
  if (std::isfinite(v)) {
    j["value"] = v;
  } else {
    j["value"] = format_ratio(br);
  }
  return j;
}

}  // namespace

const MethodSummary* EvalReport::find(rank::Method m) const {
  for (const auto& s : summary) {
    if (s.method == m) return &s;
  }
  return nullptr;
}

void summarize(EvalReport& report) {
  report.summary.clear();
  report.counts.ndcg_excluded = 0;
  const auto prior_it = std::find(report.methods.begin(), report.methods.end(), rank::Method::kPrior);
  const std::optional<std::size_t> prior_col =
      prior_it == report.methods.end() ? std::nullopt
                                       : std::optional<std::size_t>(prior_it - report.methods.begin());
  for (const auto& row : report.rows) {
    if (!row.metrics.empty() && !row.metrics.front().ndcg) ++report.counts.ndcg_excluded;
  }
  for (std::size_t c = 0; c < report.methods.size(); ++c) {
    MethodSummary s;
    s.method = report.methods[c];
    std::vector<std::pair<double, double>> bp;
    std::vector<std::pair<double, double>> bm;
    std::vector<std::pair<double, double>> bn;
    for (const auto& row : report.rows) {
      const auto& m = row.metrics.at(c);
      s.precision += m.precision;
      s.map += m.map;
      if (m.ndcg) {
        s.ndcg += *m.ndcg;
        ++s.ndcg_rows;
      }
      if (prior_col) {
        const auto& b = row.metrics.at(*prior_col);
        bp.emplace_back(b.precision, m.precision);
        bm.emplace_back(b.map, m.map);
        if (b.ndcg && m.ndcg) bn.emplace_back(*b.ndcg, *m.ndcg);
      }
    }
    if (!report.rows.empty()) {
      s.precision /= static_cast<double>(report.rows.size());
      s.map /= static_cast<double>(report.rows.size());
    }
    if (s.ndcg_rows) s.ndcg /= static_cast<double>(s.ndcg_rows);
    if (prior_col) {
      s.br_precision = benefit_ratio(bp);
      s.br_map = benefit_ratio(bm);
      s.br_ndcg = benefit_ratio(bn);
    }
    report.summary.push_back(s);
  }
}

EvalReport merge_reports(std::span<const EvalReport> reports, const std::string& label) {
  EvalReport out;
  out.label = label;
  if (reports.empty()) return out;
  out.sigma = reports.front().sigma;
  out.pc = reports.front().pc;
  out.p_depth = reports.front().p_depth;
  out.map_depth = reports.front().map_depth;
  out.methods = reports.front().methods;
  for (const auto& r : reports) {
    if (!same_sigma(r.sigma, out.sigma) || !same_sigma(r.pc, out.pc) || r.methods != out.methods) {
      throw ValidationError("cannot merge reports with different sigma, PC or methods");
    }
    out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
    out.counts.candidates += r.counts.candidates;
    out.counts.pruned += r.counts.pruned;
    out.counts.tourist_rejected += r.counts.tourist_rejected;
    out.counts.single_day += r.counts.single_day;
  }
  summarize(out);
  if (out.rows.empty()) out.empty_reason = "no evaluated users in any region pair";
  return out;
}

EvalRow evaluate_user(const cooccur::CoocModel& model, std::span<const geo::Point3> start_peaks,
                      const scalespace::PeakSet& test_peaks, const EvalConfig& config) {
  EvalRow row;
  row.start_peaks = start_peaks.size();
  row.test_peaks = test_peaks.size();
  const std::size_t depth = std::max({config.p_depth, config.map_depth, config.ndcg_depth});
  const auto test_pos = test_peaks.positions();
  const auto test_amp = test_location_amplitudes(model.target, test_peaks, config.pc);
  rank::StartSpec start;
  start.points.assign(start_peaks.begin(), start_peaks.end());
  for (const auto method : config.methods) {
    const auto ranking = rank::recommend(model, start, method);
    std::vector<geo::Point3> ranked;
    ranked.reserve(ranking.items.size());
    for (const auto& it : ranking.items) ranked.push_back(model.target.peaks[it.index].pos);
    const auto match = match_predictions(ranked, test_pos, config.pc, config.strict_disqualify, depth);
    const auto flags = match.correct_flags();
    MethodMetrics m;
    m.precision = precision_at(flags, config.p_depth);
    m.map = map_at(flags, config.map_depth);
    std::vector<NdcgHit> hits;
    for (const auto r : match.retained) {
      const auto& item = match.scanned[r];
      const auto peak = ranking.items[item.input_index].index;
      hits.push_back({item.flag == MatchFlag::kCorrect, model.target.peaks[peak].amplitude, item.user_peak});
    }
    m.ndcg = ndcg_ip(hits, test_amp, config.ndcg_depth);
    row.metrics.push_back(m);
  }
  return row;
}

EvalReport run_between_region_eval(const ingest::Dataset& test, const geo::Region& source,
                                   const geo::Region& target, const cooccur::CoocModel& model,
                                   const EvalConfig& config) {
  check_model(model, source.id(), target.id(), config.sigma);
  if (config.methods.empty()) throw ConfigError("no ranking methods selected");
  const double prune_sigma = resolve_prune_sigma(config.prune_sigma, target.kind());
  const scalespace::Kernel kernel(config.sigma);
  const auto& users = test.users();
  std::vector<Slot> slots(users.size());
  parallel_for(users.size(), config.threads, [&](std::size_t i) {
    const auto& u = users[i];
    const auto s_tags = ingest::tags_in_region(u.tags, source);
    const auto t_tags = ingest::tags_in_region(u.tags, target);
    if (s_tags.empty() || t_tags.empty()) return;
    auto& slot = slots[i];
    if (config.prune_min_peaks > 0 && (peak_count(s_tags, prune_sigma, config.mean_shift) < config.prune_min_peaks ||
                                       peak_count(t_tags, prune_sigma, config.mean_shift) < config.prune_min_peaks)) {
      slot.outcome = Outcome::kPruned;
      return;
    }
    if (config.tourist_windows && (!tourist_filter(std::span<const ingest::Geotag>(s_tags), *config.tourist_windows) ||
                                   !tourist_filter(std::span<const ingest::Geotag>(t_tags), *config.tourist_windows))) {
      slot.outcome = Outcome::kTourist;
      return;
    }
    const auto start =
        scalespace::user_peaks(scalespace::to_weighted_points(s_tags), kernel, config.mean_shift).positions();
    const auto held_out = scalespace::user_peaks(scalespace::to_weighted_points(t_tags), kernel, config.mean_shift);
    slot.row = evaluate_user(model, start, held_out, config);
    slot.row.user_id = u.user_id;
    slot.row.source_region = source.id();
    slot.row.target_region = target.id();
    slot.outcome = Outcome::kRow;
  });
  return collect(slots, config, source.id() + "->" + target.id());
}

EvalReport run_within_city_eval(const ingest::Dataset& test, const geo::Region& city,
                                const cooccur::CoocModel& model, const EvalConfig& config) {
  check_model(model, city.id(), city.id(), config.sigma);
  if (config.methods.empty()) throw ConfigError("no ranking methods selected");
  const scalespace::Kernel kernel(config.sigma);
  const auto& users = test.users();
  std::vector<Slot> slots(users.size());
  parallel_for(users.size(), config.threads, [&](std::size_t i) {
    const auto& u = users[i];
    const auto tags = ingest::tags_in_region(u.tags, city);
    if (tags.empty()) return;
    auto& slot = slots[i];
    const auto split = within_city_split(tags);
    if (!split) {
      slot.outcome = Outcome::kSingleDay;
      return;
    }
    if (config.tourist_windows && !tourist_filter(std::span<const ingest::Geotag>(tags), *config.tourist_windows)) {
      slot.outcome = Outcome::kTourist;
      return;
    }
    const auto start = scalespace::user_peaks(scalespace::to_weighted_points(split->train), kernel, config.mean_shift);
    const auto held_out =
        scalespace::user_peaks(scalespace::to_weighted_points(split->test), kernel, config.mean_shift);
    if (start.size() < config.within_min_peaks || held_out.size() < config.within_min_peaks) {
      slot.outcome = Outcome::kPruned;
      return;
    }
    slot.row = evaluate_user(model, start.positions(), held_out, config);
    slot.row.user_id = u.user_id;
    slot.row.source_region = city.id();
    slot.row.target_region = city.id();
    slot.outcome = Outcome::kRow;
  });
  return collect(slots, config, city.id() + " last day");
}

std::vector<SweepRow> sweep_sigma(const ingest::TrainTestSplit& split, const geo::Region& source,
                                  const geo::Region& target, const std::vector<double>& sigmas,
                                  const std::vector<double>& pcs, const SweepOptions& options,
                                  const scalespace::ScaleSpace* target_ladder) {
  if (sigmas.empty()) throw ValidationError("sigma grid is empty");
  if (pcs.empty()) throw ValidationError("PC list is empty");
  for (const double s : sigmas) scalespace::Kernel{s};
  for (const double pc : pcs) {
    if (!(pc > 0.0)) throw ValidationError("PC threshold must be > 0");
  }
  const double prune_sigma = resolve_prune_sigma(options.prune_sigma, target.kind());

  // Eligible test users and their target-region tags.
  std::vector<std::vector<ingest::Geotag>> held_out;
  for (const auto& u : split.test.users()) {
    const auto s_tags = ingest::tags_in_region(u.tags, source);
    const auto t_tags = ingest::tags_in_region(u.tags, target);
    if (s_tags.empty() || t_tags.empty()) continue;
    if (options.prune_min_peaks > 0 &&
        (peak_count(s_tags, prune_sigma, options.mean_shift) < options.prune_min_peaks ||
         peak_count(t_tags, prune_sigma, options.mean_shift) < options.prune_min_peaks)) {
      continue;
    }
    if (options.tourist_windows &&
        (!tourist_filter(std::span<const ingest::Geotag>(s_tags), *options.tourist_windows) ||
         !tourist_filter(std::span<const ingest::Geotag>(t_tags), *options.tourist_windows))) {
      continue;
    }
    held_out.push_back(t_tags);
  }

  bool have_all = target_ladder != nullptr;
  for (const double s : sigmas) have_all = have_all && target_ladder->level(s) != nullptr;
  scalespace::ScaleSpace built;
  if (!have_all) {
    std::vector<double> grid = sigmas;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(), [](double a, double b) { return same_sigma(a, b); }),
               grid.end());
    std::vector<ingest::Geotag> train_tags;
    for (const auto& u : split.train.users()) {
      const auto t = ingest::tags_in_region(u.tags, target);
      train_tags.insert(train_tags.end(), t.begin(), t.end());
    }
    auto ms = options.mean_shift;
    ms.search.threads = options.threads;
    built = scalespace::build_scale_ladder(scalespace::to_weighted_points(train_tags), grid, target.id(), ms);
    target_ladder = &built;
  }

  std::vector<SweepRow> rows;
  for (const double sigma : sigmas) {
    const auto* level = target_ladder->level(sigma);
    if (!level) throw ValidationError("no prior peaks at sigma " + std::to_string(sigma));
    const auto prior = scalespace::top_peaks(*level, options.top_k);
    const auto ranked = prior.positions();
    std::vector<std::vector<double>> maps(held_out.size(), std::vector<double>(pcs.size(), 0.0));
    const scalespace::Kernel kernel(sigma);
    parallel_for(held_out.size(), options.threads, [&](std::size_t i) {
      const auto peaks =
          scalespace::user_peaks(scalespace::to_weighted_points(held_out[i]), kernel, options.mean_shift).positions();
      for (std::size_t p = 0; p < pcs.size(); ++p) {
        const auto match = match_predictions(ranked, peaks, pcs[p], options.strict_disqualify, options.map_depth);
        maps[i][p] = map_at(match.correct_flags(), options.map_depth);
      }
    });
    for (std::size_t p = 0; p < pcs.size(); ++p) {
      SweepRow row{sigma, pcs[p], 0.0, held_out.size()};
      for (const auto& m : maps) row.mean_map += m[p];
      if (!held_out.empty()) row.mean_map /= static_cast<double>(held_out.size());
      rows.push_back(row);
    }
  }
  return rows;
}

SweepOptimum sweep_optimum(std::span<const SweepRow> rows, double pc) {
  std::vector<const SweepRow*> sel;
  for (const auto& r : rows) {
    if (same_sigma(r.pc, pc)) sel.push_back(&r);
  }
  if (sel.empty()) throw ValidationError("no sweep rows for PC " + std::to_string(pc));
  SweepOptimum best;
  best.mean_map = -1.0;
  for (std::size_t i = 0; i < sel.size(); ++i) {
    if (sel[i]->mean_map > best.mean_map) {
      best.mean_map = sel[i]->mean_map;
      best.sigma = sel[i]->sigma;
      best.index = i;
    }
  }
  best.interior = sel.size() >= 3 && best.mean_map > sel.front()->mean_map && best.mean_map > sel.back()->mean_map;
  return best;
}

std::string format_ratio(const BenefitRatio& br) {
  const double v = br.value();
  if (std::isnan(v)) return "0/0";
  if (std::isinf(v)) return "inf (" + std::to_string(br.improved) + "/0)";
  return format_double(v);
}

void write_report_table(std::ostream& out, const EvalReport& report) {
  out << "# " << report.label << "  sigma=" << report.sigma << " PC=" << report.pc << '\n';
  if (report.rows.empty() && !report.empty_reason.empty()) out << "# empty: " << report.empty_reason << '\n';
  auto cell = [&](const std::string& s) {
    out << s;
    for (std::size_t i = s.size(); i < 14; ++i) out << ' ';
  };
  cell("");
  for (const auto m : report.methods) cell(rank::to_string(m));
  out << '\n';
  const std::string p_label = "P@" + std::to_string(report.p_depth);
  const std::string map_label = "MAP@" + std::to_string(report.map_depth);
  auto metric_row = [&](const std::string& label, auto get) {
    cell(label);
    for (const auto& s : report.summary) cell(format_double(get(s)));
    out << '\n';
  };
  metric_row(p_label, [](const MethodSummary& s) { return s.precision; });
  metric_row(map_label, [](const MethodSummary& s) { return s.map; });
  metric_row("NDCG_IP", [](const MethodSummary& s) { return s.ndcg; });
  auto br_row = [&](const std::string& label, auto get) {
    cell(label);
    for (const auto& s : report.summary) {
      const std::optional<BenefitRatio>& br = get(s);
      cell(br ? format_ratio(*br) : "-");
    }
    out << '\n';
  };
  br_row("BR-" + p_label, [](const MethodSummary& s) -> const std::optional<BenefitRatio>& { return s.br_precision; });
  br_row("BR-" + map_label, [](const MethodSummary& s) -> const std::optional<BenefitRatio>& { return s.br_map; });
  br_row("BR-NDCG_IP", [](const MethodSummary& s) -> const std::optional<BenefitRatio>& { return s.br_ndcg; });
  cell("Recs");
  out << report.recs() << '\n';
  out << "# candidates=" << report.counts.candidates << " pruned=" << report.counts.pruned
      << " tourist_rejected=" << report.counts.tourist_rejected << " single_day=" << report.counts.single_day
      << " ndcg_excluded=" << report.counts.ndcg_excluded << '\n';
}

void write_report_jsonl(std::ostream& out, const EvalReport& report) {
  for (const auto& row : report.rows) {
    nlohmann::json metrics = nlohmann::json::object();
    for (std::size_t c = 0; c < report.methods.size(); ++c) {
      const auto& m = row.metrics[c];
      nlohmann::json j{{"p", m.precision}, {"map", m.map}};
      j["ndcg"] = m.ndcg ? nlohmann::json(*m.ndcg) : nlohmann::json(nullptr);
      metrics[rank::to_string(report.methods[c])] = j;
    }
    out << nlohmann::json{{"type", "row"},
                          {"user", row.user_id},
                          {"source", row.source_region},
                          {"target", row.target_region},
                          {"start_peaks", row.start_peaks},
                          {"test_peaks", row.test_peaks},
                          {"metrics", metrics}}
               .dump()
        << '\n';
  }
  for (const auto& s : report.summary) {
    nlohmann::json j{{"type", "summary"}, {"label", report.label}, {"method", rank::to_string(s.method)},
                     {"sigma", report.sigma}, {"pc", report.pc},      {"p", s.precision},
                     {"map", s.map},         {"ndcg", s.ndcg},       {"ndcg_rows", s.ndcg_rows},
                     {"recs", report.recs()}};
    if (s.br_precision) j["br_p"] = ratio_json(*s.br_precision);
    if (s.br_map) j["br_map"] = ratio_json(*s.br_map);
    if (s.br_ndcg) j["br_ndcg"] = ratio_json(*s.br_ndcg);
    out << j.dump() << '\n';
  }
  if (report.rows.empty()) {
    out << nlohmann::json{{"type", "empty"}, {"label", report.label}, {"reason", report.empty_reason}}.dump() << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "sigma,pc,mean_map,users\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6f,%zu\n", r.sigma, r.pc, r.mean_map, r.users);
    out << buf;
  }
}

}  // namespace geocooc::eval
