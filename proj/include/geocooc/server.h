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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geocooc/cooccur.h"
#include "geocooc/geo.h"
#include "geocooc/scalespace.h"

namespace geocooc::server {

// Read-only models keyed by region and sigma. Filled once before serving.
class ModelRegistry {
 public:
  void add_scalespace(scalespace::ScaleSpace ss);
  void add_model(cooccur::CoocModel model);
  void set_region_kind(const std::string& region, geo::RegionKind kind);

  // Every scale-space and co-occurrence file in `dir`, limited to one dataset when the
  // hash is non-empty.
  static ModelRegistry load_cache(const std::string& dir, const std::string& dataset_hash = {});

  std::vector<std::string> region_ids() const;
  std::vector<double> sigmas(const std::string& region) const;
  std::optional<geo::RegionKind> kind(const std::string& region) const;

  // Peaks of the region at sigma: the scale-space level, else a model's peak set.
  const scalespace::PeakSet* peaks(const std::string& region, double sigma) const;
  const cooccur::CoocModel* model(const std::string& source, const std::string& target, double sigma) const;
  const std::vector<cooccur::CoocModel>& models() const { return models_; }
  std::size_t scalespace_count() const { return scalespaces_.size(); }

 private:
  std::vector<scalespace::ScaleSpace> scalespaces_;
  std::vector<cooccur::CoocModel> models_;
  std::map<std::string, geo::RegionKind> kinds_;
};

struct Request {
  std::string method;  // GET, POST, OPTIONS
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Routes the API: /api/health, /api/regions, /api/regions/{id}/peaks, /api/recommend.
// Everything else under /api answers 404; other paths are left to the static route.
Response handle(const ModelRegistry& registry, const Request& request);

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;          // mounted at / when non-empty
  std::string cors_origin = "*";
  unsigned threads = 8;
};

// "host:port" or ":port"; throws ConfigError.
void parse_listen(const std::string& spec, ServeOptions& options);

// Blocks until the server stops. Returns false if the socket could not be bound.
bool serve(const ModelRegistry& registry, const ServeOptions& options);

}  // namespace geocooc::server
