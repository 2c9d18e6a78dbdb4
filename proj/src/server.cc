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

#include "geocooc/server.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "geocooc/errors.h"
#include "geocooc/persist.h"
#include "geocooc/rank.h"

namespace geocooc::server {
namespace {

using nlohmann::json;

bool same_sigma(double a, double b) { return std::abs(a - b) <= 1e-6 * std::max(std::abs(a), std::abs(b)); }

Response json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

Response error(int status, const std::string& message, json extra = json::object()) {
  extra["error"] = message;
  return json_response(status, extra);
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::size_t> parse_size(const std::string& s) {
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) return std::nullopt;
  return v;
}

json sigma_list(const std::vector<double>& v) { return json(v); }

Response get_health(const ModelRegistry& reg) {
  return json_response(200, {{"status", "ok"},
                             {"regions", reg.region_ids().size()},
                             {"scalespaces", reg.scalespace_count()},
                             {"models", reg.models().size()}});
}

Response get_regions(const ModelRegistry& reg) {
  json regions = json::array();
  for (const auto& id : reg.region_ids()) {
    json r{{"id", id}, {"sigmas", sigma_list(reg.sigmas(id))}};
    const auto k = reg.kind(id);
    r["kind"] = k ? geo::to_string(*k) : "unknown";
    regions.push_back(r);
  }
  json pairs = json::array();
  for (const auto& m : reg.models()) {
    pairs.push_back({{"source", m.source_region},
                     {"target", m.target_region},
                     {"sigma", m.sigma},
                     {"mode", cooccur::to_string(m.mode)}});
  }
  return json_response(200, {{"regions", regions}, {"pairs", pairs}});
}

Response get_peaks(const ModelRegistry& reg, const std::string& region, const Request& req) {
  const auto ids = reg.region_ids();
  if (std::find(ids.begin(), ids.end(), region) == ids.end()) {
    return error(404, "unknown region '" + region + "'", {{"available_regions", ids}});
  }
  const auto available = reg.sigmas(region);
  double sigma = 0.0;
  if (const auto it = req.query.find("sigma"); it != req.query.end()) {
    const auto v = parse_double(it->second);
    if (!v || !(*v > 0.0)) return error(400, "sigma must be a positive number");
    sigma = *v;
  } else if (available.size() == 1) {
    sigma = available.front();
  } else {
    return error(400, "sigma is required", {{"available_sigmas", available}});
  }
  std::size_t limit = 500;
  if (const auto it = req.query.find("limit"); it != req.query.end()) {
    const auto v = parse_size(it->second);
    if (!v) return error(400, "limit must be a non-negative integer");
    limit = std::min<std::size_t>(*v, 500);
  }
  const auto* ps = reg.peaks(region, sigma);
  if (!ps) return error(404, "no peaks for region '" + region + "' at that sigma", {{"available_sigmas", available}});
  json peaks = json::array();
  for (std::size_t i = 0; i < ps->size() && i < limit; ++i) {
    const auto ll = ps->peaks[i].latlon();
    peaks.push_back(
        {{"peak", i}, {"lat", ll.lat}, {"lon", ll.lon}, {"amplitude", ps->peaks[i].amplitude}, {"prior_rank", i + 1}});
  }
  return json_response(200, {{"region", region}, {"sigma", ps->sigma}, {"peaks", peaks}});
}

Response post_recommend(const ModelRegistry& reg, const Request& req) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::exception&) {
    return error(400, "body is not valid JSON");
  }
  if (!body.is_object()) return error(400, "body must be a JSON object");
  try {
    const auto source = body.at("source").get<std::string>();
    const auto target = body.at("target").get<std::string>();
    const double sigma = body.at("sigma").get<double>();
    const auto method = rank::method_from_string(body.value("method", std::string("direct")));
    const std::size_t limit = body.value("limit", std::size_t{20});
    rank::StartSpec start;
    if (body.contains("points")) {
      for (const auto& p : body.at("points")) {
        geo::LatLon ll;
        if (p.is_array()) {
          ll = {p.at(0).get<double>(), p.at(1).get<double>()};
        } else {
          ll = {p.at("lat").get<double>(), p.at("lon").get<double>()};
        }
        start.points.push_back(geo::to_cartesian(ll));
      }
    }
    if (body.contains("peaks")) start.peaks = body.at("peaks").get<std::vector<std::size_t>>();
    const auto* model = reg.model(source, target, sigma);
    if (!model) {
      json options = json::array();
      for (const auto& m : reg.models()) {
        options.push_back({{"source", m.source_region}, {"target", m.target_region}, {"sigma", m.sigma}});
      }
      return error(404, "no model for " + source + " -> " + target + " at that sigma", {{"available", options}});
    }
    for (const auto p : start.peaks) {
      if (p >= model->source.size()) return error(400, "start peak " + std::to_string(p) + " out of range");
    }
    if (method != rank::Method::kPrior && start.empty()) return error(400, "no start points or peaks given");
    const auto ranking = rank::recommend(*model, start, method);
    json items = json::array();
    for (const auto& row : rank::ranking_rows(ranking, model->target, limit)) {
      items.push_back({{"rank", row.rank},
                       {"peak", row.peak},
                       {"lat", row.pos.lat},
                       {"lon", row.pos.lon},
                       {"score", row.score},
                       {"prior_rank", row.prior_rank}});
    }
    return json_response(200, {{"source", source},
                               {"target", target},
                               {"sigma", model->sigma},
                               {"method", rank::to_string(method)},
                               {"items", items}});
  } catch (const json::exception& e) {
    return error(400, std::string("malformed request: ") + e.what());
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  } catch (const ConfigError& e) {
    return error(400, e.what());
  }
}

}  // namespace

void ModelRegistry::add_scalespace(scalespace::ScaleSpace ss) { scalespaces_.push_back(std::move(ss)); }
void ModelRegistry::add_model(cooccur::CoocModel model) { models_.push_back(std::move(model)); }
void ModelRegistry::set_region_kind(const std::string& region, geo::RegionKind kind) { kinds_[region] = kind; }

ModelRegistry ModelRegistry::load_cache(const std::string& dir, const std::string& dataset_hash) {
  ModelRegistry reg;
  const auto listing = persist::list_cache(dir, dataset_hash);
  for (const auto& p : listing.scalespaces) reg.add_scalespace(persist::load_scalespace_file(p));
  for (const auto& p : listing.cooc_models) reg.add_model(persist::load_cooc_file(p));
  return reg;
}

std::vector<std::string> ModelRegistry::region_ids() const {
  std::set<std::string> ids;
  for (const auto& s : scalespaces_) ids.insert(s.region_id);
  for (const auto& m : models_) {
    ids.insert(m.source_region);
    ids.insert(m.target_region);
  }
  return {ids.begin(), ids.end()};
}

std::vector<double> ModelRegistry::sigmas(const std::string& region) const {
  std::vector<double> out;
  auto add = [&](double s) {
    if (std::none_of(out.begin(), out.end(), [&](double o) { return same_sigma(o, s); })) out.push_back(s);
  };
  for (const auto& s : scalespaces_) {
    if (s.region_id == region) {
      for (const double v : s.sigmas) add(v);
    }
  }
  for (const auto& m : models_) {
    if (m.source_region == region || m.target_region == region) add(m.sigma);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<geo::RegionKind> ModelRegistry::kind(const std::string& region) const {
  if (const auto it = kinds_.find(region); it != kinds_.end()) return it->second;
  return std::nullopt;
}

const scalespace::PeakSet* ModelRegistry::peaks(const std::string& region, double sigma) const {
  for (const auto& s : scalespaces_) {
    if (s.region_id != region) continue;
    if (const auto* level = s.level(sigma)) return level;
  }
  for (const auto& m : models_) {
    if (!same_sigma(m.sigma, sigma)) continue;
    if (m.source_region == region) return &m.source;
    if (m.target_region == region) return &m.target;
  }
  return nullptr;
}

const cooccur::CoocModel* ModelRegistry::model(const std::string& source, const std::string& target,
                                               double sigma) const {
  for (const auto& m : models_) {
    if (m.source_region == source && m.target_region == target && same_sigma(m.sigma, sigma)) return &m;
  }
  return nullptr;
}

Response handle(const ModelRegistry& registry, const Request& req) {
  static const std::string kPeaksPrefix = "/api/regions/";
  if (req.method == "OPTIONS") return {204, "", "text/plain"};
  if (req.path == "/api/health" && req.method == "GET") return get_health(registry);
  if (req.path == "/api/regions" && req.method == "GET") return get_regions(registry);
  if (req.path == "/api/recommend") {
    if (req.method != "POST") return error(405, "use POST");
    return post_recommend(registry, req);
  }
  if (req.path.starts_with(kPeaksPrefix) && req.path.ends_with("/peaks") && req.method == "GET") {
    const auto id = req.path.substr(kPeaksPrefix.size(), req.path.size() - kPeaksPrefix.size() - 6);
    if (!id.empty() && id.find('/') == std::string::npos) return get_peaks(registry, id, req);
  }
  return error(404, "no such endpoint",
               {{"endpoints", {"GET /api/health", "GET /api/regions", "GET /api/regions/{id}/peaks?sigma=&limit=",
                               "POST /api/recommend"}}});
}

void parse_listen(const std::string& spec, ServeOptions& options) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos) throw ConfigError("--listen expects host:port");
  const auto host = spec.substr(0, colon);
  const auto port = spec.substr(colon + 1);
  int p = 0;
  const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), p);
  if (ec != std::errc() || ptr != port.data() + port.size() || p < 0 || p > 65535) {
    throw ConfigError("invalid port in --listen: " + spec);
  }
  options.host = host.empty() ? "0.0.0.0" : host;
  options.port = p;
}

bool serve(const ModelRegistry& registry, const ServeOptions& options) {
  httplib::Server srv;
  srv.new_task_queue = [n = options.threads] { return new httplib::ThreadPool(std::max(1u, n)); };
  srv.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  auto bridge = [&registry](const httplib::Request& hreq, httplib::Response& hres) {
    Request req;
    req.method = hreq.method;
    req.path = hreq.path;
    for (const auto& [k, v] : hreq.params) req.query.emplace(k, v);
    req.body = hreq.body;
    const auto res = handle(registry, req);
    hres.status = res.status;
    hres.set_content(res.body, res.content_type);
  };
  srv.Get(R"(/api/.*)", bridge);
  srv.Post(R"(/api/.*)", bridge);
  srv.Options(R"(/api/.*)", bridge);
  if (!options.static_dir.empty() && !srv.set_mount_point("/", options.static_dir)) {
    throw ConfigError("static directory not found: " + options.static_dir);
  }
  return srv.listen(options.host, options.port);
}

}  // namespace geocooc::server
