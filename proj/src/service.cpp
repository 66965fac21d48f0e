// Copyright 2026 The Gradecraft Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gradecraft/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <thread>

#include "gradecraft/error.hpp"
#include "gradecraft/whatif.hpp"

namespace gradecraft {
namespace {

using Json = nlohmann::ordered_json;

ApiResponse ok(const Json& body) { return {200, body.dump()}; }

ApiResponse fail(int status, const std::string& message, const std::string& token = {}) {
  Json body;
  body["error"] = message;
  if (!token.empty()) body["token"] = token;
  return {status, body.dump()};
}

struct RouteRequest {
  Route route;
  std::string model_id;
  const ModelArtifact* artifact;
  bool with_whatif;
};

// Parses {"edition", "holds", "model"?, "whatif"?}. On failure returns the
// error response instead.
std::variant<RouteRequest, ApiResponse> parse_route_request(const ModelRegistry& registry,
                                                            const std::string& body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    return fail(400, std::string("request body is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) return fail(400, "request body must be a JSON object");
  if (!j.contains("edition") || !j["edition"].is_string()) {
    return fail(400, "missing string field 'edition'");
  }
  if (!j.contains("holds") || !j["holds"].is_array()) {
    return fail(400, "missing array field 'holds'");
  }
  const std::string edition_text = j["edition"].get<std::string>();
  Edition edition;
  try {
    edition = parse_edition(edition_text);
  } catch (const ParseError& e) {
    return fail(400, e.what(), e.token());
  } catch (const Error& e) {
    return fail(400, e.what(), edition_text);
  }
  std::vector<HoldPosition> holds;
  for (const auto& h : j["holds"]) {
    if (!h.is_string()) return fail(400, "every hold must be a string such as \"A5\"");
    const std::string token = h.get<std::string>();
    try {
      holds.push_back(parse_position(token));
    } catch (const ParseError& e) {
      return fail(400, e.what(), e.token());
    }
  }
  if (holds.empty()) return fail(400, "a route needs at least one hold");

  std::string id;
  if (j.contains("model") && !j["model"].is_null()) {
    if (!j["model"].is_string()) return fail(400, "'model' must be a string");
    id = j["model"].get<std::string>();
  } else {
    const auto* entry = registry.default_entry();
    if (entry == nullptr) return fail(404, "no models are loaded");
    id = entry->id;
  }
  const ModelArtifact* artifact = registry.find(id);
  if (artifact == nullptr) return fail(404, "unknown model '" + id + "'", id);
  const bool with_whatif =
      j.contains("whatif") && j["whatif"].is_boolean() && j["whatif"].get<bool>();
  return RouteRequest{Route(edition, holds), id, artifact, with_whatif};
}

Json whatif_json(const WhatIfResult& result) {
  Json out = Json::array();
  for (const WhatIfDelta& d : result.deltas) {
    out.push_back(Json{{"position", d.position.to_string()},
                       {"action", d.removal ? "remove" : "add"},
                       {"delta", d.delta}});
  }
  return out;
}

}  // namespace

ModelRegistry ModelRegistry::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DatasetError("model directory " + dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == kArtifactExtension) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw DatasetError("model directory " + dir.string() + " holds no " + kArtifactExtension +
                       " artifacts");
  }
  ModelRegistry registry;
  for (const auto& f : files) registry.add(f.stem().string(), load_model(f));
  return registry;
}

void ModelRegistry::add(std::string id, ModelArtifact artifact) {
  if (find(id) != nullptr) throw InvalidArgument("duplicate model id '" + id + "'");
  auto pos = std::lower_bound(entries_.begin(), entries_.end(), id,
                              [](const Entry& e, const std::string& key) { return e.id < key; });
  entries_.insert(pos, Entry{std::move(id),
                             std::make_shared<const ModelArtifact>(std::move(artifact))});
}

const ModelArtifact* ModelRegistry::find(const std::string& id) const {
  for (const Entry& e : entries_) {
    if (e.id == id) return e.artifact.get();
  }
  return nullptr;
}

const ModelRegistry::Entry* ModelRegistry::default_entry() const {
  return entries_.empty() ? nullptr : &entries_.front();
}

Service::Service(ModelRegistry registry, Exec exec) : registry_(std::move(registry)), exec_(exec) {}

ApiResponse Service::editions() const {
  Json out = Json::array();
  for (const Edition e : kAllEditions) out.push_back(edition_name(e));
  return ok(out);
}

ApiResponse Service::holds(const std::string& edition) const {
  Edition ed;
  try {
    ed = parse_edition(edition);
  } catch (const Error& e) {
    return fail(404, e.what(), edition);
  }
  Json out = Json::array();
  for (const HoldPosition& p : board_holds(ed)) out.push_back(p.to_string());
  return ok(out);
}

ApiResponse Service::models() const {
  Json out = Json::array();
  for (const auto& e : registry_.entries()) {
    Json item;
    item["id"] = e.id;
    const Json meta = artifact_metadata(*e.artifact);
    for (const auto& [key, value] : meta.items()) item[key] = value;
    out.push_back(std::move(item));
  }
  return ok(out);
}

ApiResponse Service::predict(const std::string& body) const {
  auto parsed = parse_route_request(registry_, body);
  if (auto* err = std::get_if<ApiResponse>(&parsed)) return *err;
  const auto& req = std::get<RouteRequest>(parsed);
  try {
    Json out;
    out["model"] = req.model_id;
    out["edition"] = edition_name(req.route.edition());
    double grade;
    if (req.with_whatif) {
      const WhatIfResult w = gradecraft::whatif(req.route, req.artifact->model, exec_);
      grade = w.base;
      out["whatif"] = whatif_json(w);
    } else {
      grade = req.artifact->model.predict(std::vector<Route>{req.route}, exec_).front();
    }
    const int rounded = round_to_ordinal(grade);
    out["grade"] = grade;
    out["rounded"] = rounded;
    out["label"] = grade_to_label(rounded);
    return ok(out);
  } catch (const std::exception& e) {
    return fail(500, e.what());
  }
}

ApiResponse Service::whatif(const std::string& body) const {
  auto parsed = parse_route_request(registry_, body);
  if (auto* err = std::get_if<ApiResponse>(&parsed)) return *err;
  const auto& req = std::get<RouteRequest>(parsed);
  try {
    const WhatIfResult w = gradecraft::whatif(req.route, req.artifact->model, exec_);
    Json out;
    out["model"] = req.model_id;
    out["edition"] = edition_name(req.route.edition());
    out["base"] = w.base;
    out["deltas"] = whatif_json(w);
    return ok(out);
  } catch (const std::exception& e) {
    return fail(500, e.what());
  }
}

ApiResponse Service::heatmap(const std::string& model_id) const {
  const ModelArtifact* artifact = registry_.find(model_id);
  if (artifact == nullptr) return fail(404, "unknown model '" + model_id + "'", model_id);
  if (!artifact->model.has_hold_weights()) {
    return fail(409, "model '" + model_id + "' (" + artifact->model.tag() +
                         ") has no per-hold weights; heatmaps need a linear model");
  }
  try {
    const auto grid = classical::export_hold_weights(*artifact->model.regressor());
    Json rows = Json::array();
    for (const auto& row : grid.grid) rows.push_back(row);
    Json out;
    out["model"] = model_id;
    out["rows"] = kRows;
    out["columns"] = kColumns;
    out["grid"] = std::move(rows);  // grid[row][col], row 0 at the bottom
    out["min"] = grid.min;
    out["mean"] = grid.mean;
    out["max"] = grid.max;
    return ok(out);
  } catch (const UnsupportedExportError& e) {
    return fail(409, e.what());
  }
}

struct HttpServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

HttpServer::HttpServer(const Service& service, const std::string& host, int port,
                       const std::optional<std::filesystem::path>& static_dir)
    : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  // httplib's default enables SO_REUSEPORT, which lets a second server bind
  // a busy port silently. SO_REUSEADDR alone still allows quick restarts.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  auto reply = [](httplib::Response& res, const ApiResponse& api) {
    res.status = api.status;
    res.set_content(api.body, "application/json");
  };
  srv.Get("/api/editions", [&service, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, service.editions());
  });
  srv.Get(R"(/api/holds/([^/]+))",
          [&service, reply](const httplib::Request& req, httplib::Response& res) {
            reply(res, service.holds(req.matches[1]));
          });
  srv.Get("/api/models", [&service, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, service.models());
  });
  srv.Post("/api/predict", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.predict(req.body));
  });
  srv.Post("/api/whatif", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.whatif(req.body));
  });
  srv.Get(R"(/api/heatmap/([^/]+))",
          [&service, reply](const httplib::Request& req, httplib::Response& res) {
            reply(res, service.heatmap(req.matches[1]));
          });
  if (static_dir) {
    if (!srv.set_mount_point("/", static_dir->string())) {
      throw IoError("static directory " + static_dir->string() + " does not exist");
    }
  }
  if (port == 0) {
    impl_->port = srv.bind_to_any_port(host);
    if (impl_->port <= 0) throw IoError("cannot bind " + host);
  } else {
    if (!srv.bind_to_port(host, port)) {
      throw IoError("cannot bind " + host + ":" + std::to_string(port) + " (port busy?)");
    }
    impl_->port = port;
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  srv.wait_until_ready();
}

HttpServer::~HttpServer() {
  stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int HttpServer::port() const noexcept { return impl_->port; }

void HttpServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace gradecraft
