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

#include "geocooc/persist.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "geocooc/errors.h"
#include "geocooc/hash.h"

namespace geocooc::persist {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json peak_json(const scalespace::Peak& p) {
  return json::array({p.pos.x, p.pos.y, p.pos.z, p.amplitude,
                      p.parent ? static_cast<long long>(*p.parent) : -1LL});
}

scalespace::Peak peak_from_json(const json& j) {
  scalespace::Peak p;
  p.pos = {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
  p.amplitude = j.at(3).get<double>();
  const auto parent = j.at(4).get<long long>();
  if (parent >= 0) p.parent = static_cast<std::size_t>(parent);
  return p;
}

void write_peaks(std::ostream& out, const char* name, const scalespace::PeakSet& ps) {
  out << name << ' ' << ps.region_id << ' ' << g17(ps.sigma) << ' ' << ps.non_converged << ' ' << ps.size() << '\n';
  for (const auto& p : ps.peaks) {
    out << g17(p.pos.x) << ' ' << g17(p.pos.y) << ' ' << g17(p.pos.z) << ' ' << g17(p.amplitude) << ' '
        << (p.parent ? static_cast<long long>(*p.parent) : -1LL) << '\n';
  }
}

std::string expect_line(std::istream& in, const std::string& what) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("cooc model: unexpected end of file, expected " + what);
  return line;
}

template <typename T>
T field(std::istream& in, const std::string& key) {
  std::istringstream ls(expect_line(in, key));
  std::string k;
  T v{};
  if (!(ls >> k >> v) || k != key) throw FormatError("cooc model: expected field '" + key + "'");
  return v;
}

scalespace::PeakSet read_peaks(std::istream& in, const std::string& name) {
  std::istringstream hs(expect_line(in, name));
  std::string k;
  scalespace::PeakSet ps;
  std::size_t n = 0;
  if (!(hs >> k >> ps.region_id >> ps.sigma >> ps.non_converged >> n) || k != name) {
    throw FormatError("cooc model: bad '" + name + "' header");
  }
  ps.peaks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::istringstream ls(expect_line(in, "peak"));
    scalespace::Peak p;
    long long parent = -1;
    if (!(ls >> p.pos.x >> p.pos.y >> p.pos.z >> p.amplitude >> parent)) throw FormatError("cooc model: bad peak line");
    if (parent >= 0) p.parent = static_cast<std::size_t>(parent);
    ps.peaks.push_back(p);
  }
  return ps;
}

std::string sigma_tag(double sigma) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", sigma);
  return buf;
}

}  // namespace

std::string cache_dir(const std::string& fallback) {
  if (const char* env = std::getenv("GEOCOOC_CACHE"); env && *env) return env;
  return fallback;
}

void write_scalespace(std::ostream& out, const scalespace::ScaleSpace& ss, const std::string& dataset_hash) {
  out << json{{"format", "geocooc-scalespace"},
              {"version", kScaleSpaceVersion},
              {"dataset_hash", dataset_hash},
              {"region", ss.region_id},
              {"grid", ss.sigmas}}
             .dump()
      << '\n';
  for (const auto& level : ss.levels) {
    json peaks = json::array();
    for (const auto& p : level.peaks) peaks.push_back(peak_json(p));
    out << json{{"sigma", level.sigma}, {"non_converged", level.non_converged}, {"peaks", peaks}}.dump() << '\n';
  }
}

scalespace::ScaleSpace read_scalespace(std::istream& in, std::string* dataset_hash) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("scale-space cache is empty");
  scalespace::ScaleSpace ss;
  try {
    const auto h = json::parse(line);
    if (h.at("format") != "geocooc-scalespace") throw FormatError("not a scale-space cache");
    if (h.at("version").get<int>() != kScaleSpaceVersion) throw FormatError("unsupported scale-space cache version");
    ss.region_id = h.at("region").get<std::string>();
    ss.sigmas = h.at("grid").get<std::vector<double>>();
    if (dataset_hash) *dataset_hash = h.at("dataset_hash").get<std::string>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = json::parse(line);
      scalespace::PeakSet ps;
      ps.region_id = ss.region_id;
      ps.sigma = j.at("sigma").get<double>();
      ps.non_converged = j.at("non_converged").get<std::size_t>();
      for (const auto& p : j.at("peaks")) ps.peaks.push_back(peak_from_json(p));
      ss.levels.push_back(std::move(ps));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("scale-space cache: ") + e.what());
  }
  if (ss.levels.size() != ss.sigmas.size()) throw FormatError("scale-space cache: level count differs from grid");
  return ss;
}

void write_cooc_model(std::ostream& out, const cooccur::CoocModel& m) {
  out << "geocooc-cooc " << kCoocVersion << '\n';
  out << "source " << m.source_region << '\n';
  out << "target " << m.target_region << '\n';
  out << "sigma " << g17(m.sigma) << '\n';
  out << "mode " << cooccur::to_string(m.mode) << '\n';
  out << "dataset_hash " << (m.dataset_hash.empty() ? "-" : m.dataset_hash) << '\n';
  out << "diagonal_zeroed " << (m.diagonal_zeroed ? 1 : 0) << '\n';
  out << "no_shared_users " << (m.no_shared_users ? 1 : 0) << '\n';
  out << "contributing_users " << m.contributing_users << '\n';
  write_peaks(out, "source_peaks", m.source);
  write_peaks(out, "target_peaks", m.target);
  out << "entries " << m.values.nnz() << '\n';
  m.values.for_each([&](std::size_t r, std::size_t c, double v) { out << r << ' ' << c << ' ' << g17(v) << '\n'; });
}

cooccur::CoocModel read_cooc_model(std::istream& in) {
  cooccur::CoocModel m;
  {
    std::istringstream ls(expect_line(in, "header"));
    std::string magic;
    int version = 0;
    if (!(ls >> magic >> version) || magic != "geocooc-cooc") throw FormatError("not a co-occurrence model file");
    if (version != kCoocVersion) throw FormatError("unsupported co-occurrence model version");
  }
  m.source_region = field<std::string>(in, "source");
  m.target_region = field<std::string>(in, "target");
  m.sigma = field<double>(in, "sigma");
  m.mode = cooccur::metric_mode_from_string(field<std::string>(in, "mode"));
  m.dataset_hash = field<std::string>(in, "dataset_hash");
  if (m.dataset_hash == "-") m.dataset_hash.clear();
  m.diagonal_zeroed = field<int>(in, "diagonal_zeroed") != 0;
  m.no_shared_users = field<int>(in, "no_shared_users") != 0;
  m.contributing_users = field<std::size_t>(in, "contributing_users");
  m.source = read_peaks(in, "source_peaks");
  m.target = read_peaks(in, "target_peaks");
  const auto n = field<std::size_t>(in, "entries");
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::istringstream ls(expect_line(in, "entry"));
    Triplet tr;
    if (!(ls >> tr.row >> tr.col >> tr.value)) throw FormatError("cooc model: bad entry line");
    if (tr.row >= m.source.size() || tr.col >= m.target.size()) throw FormatError("cooc model: entry out of range");
    t.push_back(tr);
  }
  m.values = SparseMatrix::from_triplets(m.source.size(), m.target.size(), std::move(t));
  return m;
}

void save_scalespace_file(const std::string& path, const scalespace::ScaleSpace& ss,
                          const std::string& dataset_hash) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_scalespace(out, ss, dataset_hash);
  if (!out) throw IoError("write failed: " + path);
}

scalespace::ScaleSpace load_scalespace_file(const std::string& path, std::string* dataset_hash) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_scalespace(in, dataset_hash);
}

void save_cooc_file(const std::string& path, const cooccur::CoocModel& model) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_cooc_model(out, model);
  if (!out) throw IoError("write failed: " + path);
}

cooccur::CoocModel load_cooc_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_cooc_model(in);
}

std::string scalespace_path(const std::string& dir, const std::string& dataset_hash, const std::string& region,
                            const std::vector<double>& grid) {
  Fnv1a h;
  h.add(std::string_view(dataset_hash)).add(std::string_view(region));
  for (const double s : grid) h.add(s);
  return (fs::path(dir) / ("scalespace-" + region + "-" + dataset_hash + "-" + to_hex(h.value()) + ".jsonl")).string();
}

std::string cooc_path(const std::string& dir, const std::string& dataset_hash, const std::string& source,
                      const std::string& target, double sigma, cooccur::MetricMode mode) {
  return (fs::path(dir) / ("cooc-" + source + "-" + target + "-s" + sigma_tag(sigma) + "-" + cooccur::to_string(mode) +
                           "-" + dataset_hash + ".txt"))
      .string();
}

CacheListing list_cache(const std::string& dir, const std::string& dataset_hash) {
  CacheListing out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto name = e.path().filename().string();
    if (!dataset_hash.empty() && name.find("-" + dataset_hash) == std::string::npos) continue;
    if (name.starts_with("scalespace-")) out.scalespaces.push_back(e.path().string());
    if (name.starts_with("cooc-")) out.cooc_models.push_back(e.path().string());
  }
  std::sort(out.scalespaces.begin(), out.scalespaces.end());
  std::sort(out.cooc_models.begin(), out.cooc_models.end());
  return out;
}

}  // namespace geocooc::persist
