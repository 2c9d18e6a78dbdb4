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

#include "geocooc/cli.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "geocooc/cooccur.h"
#include "geocooc/errors.h"
#include "geocooc/eval.h"
#include "geocooc/geo.h"
#include "geocooc/hash.h"
#include "geocooc/ingest.h"
#include "geocooc/persist.h"
#include "geocooc/pipeline.h"
#include "geocooc/rank.h"
#include "geocooc/scalespace.h"
#include "geocooc/server.h"
#include "geocooc/synth.h"

namespace geocooc::cli {
namespace {

using nlohmann::json;

struct Common {
  std::string cache = ".geocooc-cache";
  unsigned threads = 1;
  std::string dataset;
  std::string regions;
};

struct Inputs {
  ingest::Dataset dataset;
  std::vector<geo::Region> regions;
  std::string hash;
  std::string cache;
};

Inputs load_inputs(const Common& c) {
  Inputs in;
  in.dataset = ingest::load_geotags_file(c.dataset);
  in.regions = geo::load_regions_file(c.regions);
  in.hash = to_hex(in.dataset.content_hash());
  in.cache = persist::cache_dir(c.cache);
  return in;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(std::string("bad number in ") + what + ": '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError(std::string(what) + " is empty");
  return out;
}

std::vector<double> parse_grid(const std::string& spec, geo::RegionKind kind) {
  if (spec.empty()) return scalespace::sigma_grid_for(kind);
  if (spec == "city") return scalespace::city_sigma_grid();
  if (spec == "country") return scalespace::country_sigma_grid();
  return parse_list(spec, "--grid");
}

geo::LatLon parse_latlon(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ValidationError("--start expects lat,lon: '" + s + "'");
  const auto v = parse_list(s, "--start");
  if (v.size() != 2) throw ValidationError("--start expects lat,lon: '" + s + "'");
  geo::LatLon ll{v[0], v[1]};
  if (!geo::is_valid(ll)) throw ValidationError("--start out of range: '" + s + "'");
  return ll;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw ValidationError(std::string(what) + " must be > 0");
}

// Prior peaks of a region at sigma from any cached ladder of this dataset.
std::optional<scalespace::PeakSet> cached_level(const Inputs& in, const std::string& region, double sigma) {
  const auto prefix = "scalespace-" + region + "-" + in.hash + "-";
  for (const auto& path : persist::list_cache(in.cache, in.hash).scalespaces) {
    if (std::filesystem::path(path).filename().string().rfind(prefix, 0) != 0) continue;
    const auto ss = persist::load_scalespace_file(path);
    if (const auto* level = ss.level(sigma)) return *level;
  }
  return std::nullopt;
}

std::optional<scalespace::ScaleSpace> cached_ladder(const Inputs& in, const std::string& region,
                                                    const std::vector<double>& sigmas) {
  const auto prefix = "scalespace-" + region + "-" + in.hash + "-";
  for (const auto& path : persist::list_cache(in.cache, in.hash).scalespaces) {
    if (std::filesystem::path(path).filename().string().rfind(prefix, 0) != 0) continue;
    auto ss = persist::load_scalespace_file(path);
    if (std::all_of(sigmas.begin(), sigmas.end(), [&](double s) { return ss.level(s) != nullptr; })) return ss;
  }
  return std::nullopt;
}

std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string hint(const std::string& command, const Common& c) {
  return "run `geocooc " + command + " --dataset " + c.dataset + " --regions " + c.regions + " ...` first";
}

cooccur::CoocModel load_model(const Inputs& in, const Common& c, const std::string& s, const std::string& t,
                              double sigma, cooccur::MetricMode mode) {
  const auto path = persist::cooc_path(in.cache, in.hash, s, t, sigma, mode);
  if (!std::filesystem::exists(path)) {
    throw ConfigError("missing co-occurrence model " + s + " -> " + t + " at sigma " + fmt_num(sigma) + " (" +
                      path + "); " + hint("cooc", c));
  }
  return persist::load_cooc_file(path);
}

std::vector<std::pair<std::string, std::string>> region_pairs(const std::vector<geo::Region>& regions,
                                                              const std::string& source, const std::string& target,
                                                              bool all_pairs) {
  std::vector<std::pair<std::string, std::string>> out;
  if (all_pairs) {
    for (const auto& a : regions) {
      for (const auto& b : regions) {
        if (a.id() != b.id()) out.emplace_back(a.id(), b.id());
      }
    }
    return out;
  }
  if (source.empty() || target.empty()) throw ValidationError("give --source and --target, or --all-pairs");
  geo::find_region(regions, source);
  geo::find_region(regions, target);
  out.emplace_back(source, target);
  return out;
}

std::ostream& open_out(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty()) {
    std::filesystem::create_directories(parent);
  }
  file.open(path);
  if (!file) throw IoError("cannot write " + path);
  return file;
}

json approx_json(const cooccur::ApproxReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"m", e.m},
                       {"n", e.n},
                       {"value", e.value},
                       {"mode", e.nearest_mode},
                       {"distance", e.distance},
                       {"mode_amplitude", e.mode_amplitude},
                       {"decay", e.decay}});
  }
  return {{"k_requested", r.k_requested},
          {"k_used", r.k_used},
          {"match_radius", r.match_radius},
          {"matched", r.matched},
          {"unique_matched", r.unique_matched},
          {"median_distance", r.median_distance},
          {"median_decay", r.median_decay},
          {"mean_decay", r.mean_decay},
          {"max_decay", r.max_decay},
          {"note", r.note},
          {"entries", entries}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"geocooc: location co-occurrence models, recommendations and evaluation"};
  app.require_subcommand(1);
  Common c;
  app.add_option("--cache", c.cache, "Cache directory (GEOCOOC_CACHE overrides)");
  app.add_option("--threads", c.threads, "Worker threads, 0 for all cores");

  auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--dataset", c.dataset, "Geotag file")->required()->check(CLI::ExistingFile);
    sub->add_option("--regions", c.regions, "Region config (JSON)")->required()->check(CLI::ExistingFile);
  };

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse, filter and dedup a raw geotag log");
  std::string ingest_input;
  std::string ingest_out;
  int min_accuracy = 15;
  bool no_dedup = false;
  ingest_cmd->add_option("--input", ingest_input, "Raw geotag file")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--out", ingest_out, "Output dataset (default: in the cache)");
  ingest_cmd->add_option("--min-accuracy", min_accuracy, "Lowest accuracy kept")->check(CLI::Range(1, 16));
  ingest_cmd->add_flag("--no-dedup", no_dedup, "Keep every photo of a batch");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
  std::string fixture;
  std::string synth_config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> users;
  std::string synth_out;
  std::string truth_out;
  std::string regions_out;
  auto* fx = synth_cmd->add_option("--fixture", fixture, "Named fixture")->check(CLI::IsMember(synth::fixture_names()));
  synth_cmd->add_option("--config", synth_config, "Generator config (JSON)")->check(CLI::ExistingFile)->excludes(fx);
  synth_cmd->add_option("--seed", seed, "Override the config seed");
  synth_cmd->add_option("--users", users, "Override the user count");
  synth_cmd->add_option("--out", synth_out, "Dataset path")->required();
  synth_cmd->add_option("--truth", truth_out, "Ground-truth path (default: <out>.truth.tsv)");
  synth_cmd->add_option("--regions-out", regions_out, "Region config path (default: <out>.regions.json)");

  // scalespace
  auto* ss_cmd = app.add_subcommand("scalespace", "Build scale-space ladders of the training users");
  add_inputs(ss_cmd);
  std::vector<std::string> ss_regions;
  std::string grid_spec;
  ss_cmd->add_option("--region", ss_regions, "Region ids (default: all)");
  ss_cmd->add_option("--grid", grid_spec, "city, country or a comma list of sigmas in meters");

  // shared model options
  double sigma = 0.0;
  std::string source;
  std::string target;
  bool all_pairs = false;
  std::string metric_mode = "squared";
  auto add_model_opts = [&](CLI::App* sub, bool pairs) {
    sub->add_option("--sigma", sigma, "Kernel sigma in meters")->required();
    sub->add_option("--source", source, "Source region id");
    sub->add_option("--target", target, "Target region id");
    if (pairs) sub->add_flag("--all-pairs", all_pairs, "Every ordered pair of distinct regions");
    sub->add_option("--metric-mode", metric_mode, "Co-occurrence exponent")
        ->check(CLI::IsMember({"squared", "literal"}));
  };

  // cooc
  auto* cooc_cmd = app.add_subcommand("cooc", "Build co-occurrence models from training users");
  add_inputs(cooc_cmd);
  add_model_opts(cooc_cmd, true);
  std::size_t top_k = 500;
  std::optional<int> tourist_training;
  cooc_cmd->add_option("--top-k", top_k, "Prior peaks kept per region");
  cooc_cmd->add_option("--tourist-training", tourist_training, "Only training users who are n x 14-day tourists")
      ->check(CLI::PositiveNumber);

  // recommend
  auto* rec_cmd = app.add_subcommand("recommend", "Rank target-region peaks for a user or start points");
  add_inputs(rec_cmd);
  add_model_opts(rec_cmd, false);
  std::string method_list = "direct";
  std::string user_id;
  std::vector<std::string> starts;
  std::vector<std::size_t> start_peaks;
  std::size_t limit = 20;
  std::string rec_out;
  rec_cmd->add_option("--method", method_list, "prior, direct (cc), cosine, rankdiff; comma separated");
  rec_cmd->add_option("--user", user_id, "Use this user's source-region peaks");
  rec_cmd->add_option("--start", starts, "Start point lat,lon (repeatable)");
  rec_cmd->add_option("--start-peak", start_peaks, "Start at a source prior peak index (repeatable)");
  rec_cmd->add_option("--limit", limit, "Rows to print");
  rec_cmd->add_option("--out", rec_out, "Output file (line-JSON)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate rankings on the test users");
  add_inputs(eval_cmd);
  add_model_opts(eval_cmd, true);
  double pc = 0.0;
  std::string eval_methods = "prior,direct";
  std::optional<int> tourist;
  bool strict = false;
  std::size_t prune = 5;
  double prune_sigma = 0.0;
  std::string within;
  std::size_t within_min_peaks = 0;
  std::string eval_out;
  eval_cmd->add_option("--pc", pc, "Peak correctness threshold in meters")->required();
  eval_cmd->add_option("--method", eval_methods, "Methods to evaluate; prior is the BR baseline");
  eval_cmd->add_option("--tourist", tourist, "Only users who are n x 14-day tourists")->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--strict-disqualify", strict, "Score disqualified predictions as misses in place");
  eval_cmd->add_option("--prune", prune, "Peaks required at the finest scale in both regions");
  eval_cmd->add_option("--prune-sigma", prune_sigma, "Sigma used for pruning (default: finest ladder value)");
  eval_cmd->add_option("--within", within, "Within-city protocol on this region");
  eval_cmd->add_option("--within-min-peaks", within_min_peaks, "Within-city: peaks required on both sides");
  eval_cmd->add_option("--out", eval_out, "Output prefix for <out>.txt and <out>.jsonl");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Baseline MAP over a sigma grid");
  add_inputs(sweep_cmd);
  std::string pcs_spec;
  std::string sweep_out;
  std::optional<int> sweep_tourist;
  std::size_t sweep_prune = 5;
  sweep_cmd->add_option("--source", source, "Source region id")->required();
  sweep_cmd->add_option("--target", target, "Target region id")->required();
  sweep_cmd->add_option("--grid", grid_spec, "city, country or a comma list (default: by region kind)");
  sweep_cmd->add_option("--pc", pcs_spec, "Comma list of PC values in meters (default: by region kind)");
  sweep_cmd->add_option("--tourist", sweep_tourist, "Only users who are n x 14-day tourists")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--prune", sweep_prune, "Peaks required at the finest scale in both regions");
  sweep_cmd->add_option("--out", sweep_out, "CSV output (default: stdout)");

  // validate-approx
  auto* va_cmd = app.add_subcommand("validate-approx", "Compare a model with full 6D mean shift");
  add_inputs(va_cmd);
  add_model_opts(va_cmd, false);
  std::size_t va_k = 50;
  std::string va_out;
  va_cmd->add_option("--k", va_k, "Largest entries compared");
  va_cmd->add_option("--out", va_out, "JSON report path (default: stdout)");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "HTTP API over cached models");
  std::string listen = "127.0.0.1:8080";
  std::string static_dir;
  std::string cors = "*";
  std::string serve_dataset;
  std::string serve_regions;
  serve_cmd->add_option("--listen", listen, "host:port");
  serve_cmd->add_option("--static", static_dir, "Directory served at /")->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--cors-origin", cors, "Access-Control-Allow-Origin value");
  serve_cmd->add_option("--dataset", serve_dataset, "Only load caches of this dataset")->check(CLI::ExistingFile);
  serve_cmd->add_option("--regions", serve_regions, "Region config, for region kinds")->check(CLI::ExistingFile);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    const auto mode = cooccur::metric_mode_from_string(metric_mode);
    scalespace::MeanShiftOptions ms;
    ms.search.threads = c.threads;

    if (ingest_cmd->parsed()) {
      auto d = ingest::load_geotags_file(ingest_input);
      const auto malformed = d.provenance().malformed_lines;
      d = ingest::filter_accuracy(d, min_accuracy);
      if (!no_dedup) d = ingest::dedup_batches(d);
      std::string path = ingest_out;
      if (path.empty()) path = persist::cache_dir(c.cache) + "/dataset-" + to_hex(d.content_hash()) + ".tsv";
      if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty()) {
        std::filesystem::create_directories(parent);
      }
      ingest::save_geotags_file(path, d);
      out << "wrote " << path << ": " << d.user_count() << " users, " << d.geotag_count() << " geotags ("
          << malformed << " malformed lines skipped)\n";
      return kOk;
    }

    if (synth_cmd->parsed()) {
      if (fixture.empty() == synth_config.empty()) throw ValidationError("give exactly one of --fixture or --config");
      auto cfg = fixture.empty() ? synth::load_config_file(synth_config) : synth::named_fixture(fixture);
      if (seed) cfg.seed = *seed;
      if (users) cfg.users = *users;
      const auto res = synth::generate(cfg);
      ingest::save_geotags_file(synth_out, res.dataset);
      const auto tpath = truth_out.empty() ? synth_out + ".truth.tsv" : truth_out;
      const auto rpath = regions_out.empty() ? synth_out + ".regions.json" : regions_out;
      {
        std::ofstream t(tpath);
        if (!t) throw IoError("cannot write " + tpath);
        synth::write_ground_truth(t, res.truth);
      }
      {
        std::ofstream r(rpath);
        if (!r) throw IoError("cannot write " + rpath);
        geo::save_regions(r, res.regions);
      }
      out << "wrote " << synth_out << " (" << res.dataset.user_count() << " users, " << res.dataset.geotag_count()
          << " geotags), " << tpath << ", " << rpath << '\n';
      return kOk;
    }

    if (ss_cmd->parsed()) {
      const auto in = load_inputs(c);
      const auto split = ingest::split_train_test(in.dataset);
      std::vector<const geo::Region*> todo;
      if (ss_regions.empty()) {
        for (const auto& r : in.regions) todo.push_back(&r);
      } else {
        for (const auto& id : ss_regions) todo.push_back(&geo::find_region(in.regions, id));
      }
      for (const auto* r : todo) {
        const auto grid = parse_grid(grid_spec, r->kind());
        const auto tags = pipeline::region_tags(split.train, *r);
        const auto ss = scalespace::build_scale_ladder(scalespace::to_weighted_points(tags), grid, r->id(), ms);
        const auto path = persist::scalespace_path(in.cache, in.hash, r->id(), grid);
        persist::save_scalespace_file(path, ss, in.hash);
        out << r->id() << ": " << tags.size() << " training geotags, " << ss.levels.size() << " levels";
        if (!ss.levels.empty()) {
          out << ", peaks " << ss.levels.front().size() << " at " << ss.sigmas.front() << " m .. "
              << ss.levels.back().size() << " at " << ss.sigmas.back() << " m";
        }
        out << " -> " << path << '\n';
      }
      return kOk;
    }

    if (cooc_cmd->parsed()) {
      require_positive(sigma, "--sigma");
      const auto in = load_inputs(c);
      const auto split = ingest::split_train_test(in.dataset);
      for (const auto& [s, t] : region_pairs(in.regions, source, target, all_pairs)) {
        const auto sp = cached_level(in, s, sigma);
        const auto tp = s == t ? sp : cached_level(in, t, sigma);
        if (!sp || !tp) {
          throw ConfigError("no scale-space cache with sigma " + fmt_num(sigma) + " for region " +
                            (!sp ? s : t) + "; " + hint("scalespace", c));
        }
        pipeline::PairModelOptions po;
        po.sigma = sigma;
        po.top_k = top_k;
        po.training_tourist_windows = tourist_training;
        po.mean_shift = ms;
        po.cooc.mode = mode;
        po.threads = c.threads;
        const auto spk = scalespace::top_peaks(*sp, top_k);
        const auto tpk = scalespace::top_peaks(*tp, top_k);
        auto model = pipeline::build_pair_model(split.train, geo::find_region(in.regions, s),
                                                geo::find_region(in.regions, t), po, &spk, &tpk);
        model.dataset_hash = in.hash;
        const auto path = persist::cooc_path(in.cache, in.hash, s, t, sigma, mode);
        persist::save_cooc_file(path, model);
        out << s << " -> " << t << ": " << model.source.size() << " x " << model.target.size() << " peaks, "
            << model.values.nnz() << " non-zero entries, " << model.contributing_users << " users"
            << (model.no_shared_users ? " (no shared users)" : "") << " -> " << path << '\n';
      }
      return kOk;
    }

    if (rec_cmd->parsed()) {
      require_positive(sigma, "--sigma");
      const auto in = load_inputs(c);
      const auto pairs = region_pairs(in.regions, source, target, false);
      const auto model = load_model(in, c, source, target, sigma, mode);
      rank::StartSpec start;
      for (const auto& s : starts) start.points.push_back(geo::to_cartesian(parse_latlon(s)));
      start.peaks = start_peaks;
      if (!user_id.empty()) {
        const auto* u = in.dataset.find(user_id);
        if (!u) throw ValidationError("unknown user '" + user_id + "'");
        const auto tags = ingest::tags_in_region(u->tags, geo::find_region(in.regions, source));
        const auto peaks =
            scalespace::user_peaks(scalespace::to_weighted_points(tags), scalespace::Kernel(sigma), ms).positions();
        start.points.insert(start.points.end(), peaks.begin(), peaks.end());
      }
      std::ofstream file;
      auto& os = open_out(rec_out, file, out);
      for (const auto m : rank::methods_from_list(method_list)) {
        if (m != rank::Method::kPrior && start.empty()) {
          throw ValidationError("no start: give --user, --start or --start-peak");
        }
        rank::write_ranking_jsonl(os, rank::recommend(model, start, m), model.target, limit);
      }
      return kOk;
    }

    if (eval_cmd->parsed()) {
      require_positive(sigma, "--sigma");
      require_positive(pc, "--pc");
      const auto in = load_inputs(c);
      const auto split = ingest::split_train_test(in.dataset);
      eval::EvalConfig cfg;
      cfg.sigma = sigma;
      cfg.pc = pc;
      cfg.methods = rank::methods_from_list(eval_methods);
      cfg.tourist_windows = tourist;
      cfg.strict_disqualify = strict;
      cfg.prune_min_peaks = prune;
      cfg.prune_sigma = prune_sigma;
      cfg.within_min_peaks = within_min_peaks;
      cfg.mean_shift = ms;
      cfg.threads = c.threads;
      std::vector<eval::EvalReport> reports;
      if (!within.empty()) {
        const auto& city = geo::find_region(in.regions, within);
        const auto model = load_model(in, c, within, within, sigma, mode);
        reports.push_back(eval::run_within_city_eval(split.test, city, model, cfg));
      } else {
        const auto pairs = region_pairs(in.regions, source, target, all_pairs);
        // Check every dependency before the first evaluation.
        std::vector<cooccur::CoocModel> models;
        for (const auto& [s, t] : pairs) models.push_back(load_model(in, c, s, t, sigma, mode));
        for (std::size_t i = 0; i < pairs.size(); ++i) {
          reports.push_back(eval::run_between_region_eval(split.test, geo::find_region(in.regions, pairs[i].first),
                                                          geo::find_region(in.regions, pairs[i].second), models[i],
                                                          cfg));
        }
      }
      auto report = reports.size() == 1 ? reports.front() : eval::merge_reports(reports, "all pairs");
      eval::write_report_table(out, report);
      if (!eval_out.empty()) {
        std::ofstream t;
        std::ofstream j;
        eval::write_report_table(open_out(eval_out + ".txt", t, out), report);
        eval::write_report_jsonl(open_out(eval_out + ".jsonl", j, out), report);
      }
      return kOk;
    }

    if (sweep_cmd->parsed()) {
      const auto in = load_inputs(c);
      const auto& s = geo::find_region(in.regions, source);
      const auto& t = geo::find_region(in.regions, target);
      const auto grid = parse_grid(grid_spec, t.kind());
      const auto pcs = pcs_spec.empty() ? (t.kind() == geo::RegionKind::kCity ? std::vector<double>{25, 50, 100, 200}
                                                                               : std::vector<double>{5000, 10000, 20000})
                                        : parse_list(pcs_spec, "--pc");
      const auto ladder = cached_ladder(in, target, grid);
      if (!ladder) throw ConfigError("no scale-space cache for region " + target + " covering the grid; " +
                                     hint("scalespace", c));
      eval::SweepOptions so;
      so.prune_min_peaks = sweep_prune;
      so.tourist_windows = sweep_tourist;
      so.mean_shift = ms;
      so.threads = c.threads;
      const auto split = ingest::split_train_test(in.dataset);
      const auto rows = eval::sweep_sigma(split, s, t, grid, pcs, so, &*ladder);
      std::ofstream file;
      eval::write_sweep_csv(open_out(sweep_out, file, out), rows);
      return kOk;
    }

    if (va_cmd->parsed()) {
      require_positive(sigma, "--sigma");
      const auto in = load_inputs(c);
      const auto pairs = region_pairs(in.regions, source, target, false);
      const auto model = load_model(in, c, source, target, sigma, mode);
      if (model.mode != cooccur::MetricMode::kSquared) {
        throw ConfigError("the full 6D comparison needs a squared-metric model");
      }
      const auto split = ingest::split_train_test(in.dataset);
      pipeline::ProfileOptions po;
      po.sigma = sigma;
      po.mean_shift = ms;
      po.threads = c.threads;
      const auto profiles = pipeline::user_profiles(split.train, geo::find_region(in.regions, source),
                                                    geo::find_region(in.regions, target), po);
      const auto full = cooccur::full_6d_peaks(cooccur::all_pair_points(profiles), sigma, ms);
      const auto report = cooccur::compare_approx_to_full(model, full, va_k);
      std::ofstream file;
      open_out(va_out, file, out) << approx_json(report).dump(2) << '\n';
      if (!va_out.empty()) {
        out << report.matched << "/" << report.k_used << " matched, median distance " << report.median_distance
            << " m, mean decay " << 100 * report.mean_decay << "%\n";
      }
      return kOk;
    }

    if (serve_cmd->parsed()) {
      server::ServeOptions so;
      server::parse_listen(listen, so);
      so.static_dir = static_dir;
      so.cors_origin = cors;
      so.threads = std::max(1u, resolve_threads(c.threads));
      const auto hash = serve_dataset.empty() ? std::string{}
                                              : to_hex(ingest::load_geotags_file(serve_dataset).content_hash());
      auto registry = server::ModelRegistry::load_cache(persist::cache_dir(c.cache), hash);
      if (!serve_regions.empty()) {
        for (const auto& r : geo::load_regions_file(serve_regions)) registry.set_region_kind(r.id(), r.kind());
      }
      if (registry.models().empty() && registry.scalespace_count() == 0) {
        throw ConfigError("no cached models in " + persist::cache_dir(c.cache) +
                          "; run `geocooc scalespace` and `geocooc cooc` first");
      }
      err << "serving " << registry.models().size() << " models and " << registry.scalespace_count()
          << " scale-spaces on " << so.host << ':' << so.port << '\n';
      if (!server::serve(registry, so)) {
        err << "error: cannot listen on " << listen << '\n';
        return kRuntimeError;
      }
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace geocooc::cli
