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

// Read-only HTTP API over a fixed set of model artifacts.
//
//   GET  /api/editions            ["2016", "2017", "2019"]
//   GET  /api/holds/{edition}     positions bolted on that board
//   GET  /api/models              artifact metadata with an "id" field
//   POST /api/predict             {"edition", "holds", "model"?, "whatif"?}
//   POST /api/whatif              {"edition", "holds", "model"?}
//   GET  /api/heatmap/{id}        18x11 hold weights, linear models only
//
// Handlers are plain functions from request data to (status, JSON body) so
// they can be exercised without a socket.

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gradecraft/artifact.hpp"

namespace gradecraft {

/// Models keyed by id, immutable once built.
class ModelRegistry {
 public:
  struct Entry {
    std::string id;
    std::shared_ptr<const ModelArtifact> artifact;
  };

  /// Loads every *.gcm file in `dir`; ids are file stems. Throws
  /// DatasetError when the directory holds no artifacts.
  static ModelRegistry load_dir(const std::filesystem::path& dir);

  /// Ids must be unique; throws InvalidArgument otherwise.
  void add(std::string id, ModelArtifact artifact);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const ModelArtifact* find(const std::string& id) const;
  /// First id in ascending order; used when a request names no model.
  const Entry* default_entry() const;

 private:
  std::vector<Entry> entries_;  // ascending by id
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

class Service {
 public:
  explicit Service(ModelRegistry registry, Exec exec = Exec::serial);

  const ModelRegistry& registry() const noexcept { return registry_; }

  ApiResponse editions() const;
  ApiResponse holds(const std::string& edition) const;
  ApiResponse models() const;
  ApiResponse predict(const std::string& body) const;
  ApiResponse whatif(const std::string& body) const;
  ApiResponse heatmap(const std::string& model_id) const;

 private:
  ModelRegistry registry_;
  Exec exec_;
};

/// A listening HTTP server on a background thread.
class HttpServer {
 public:
  /// Binds host:port (port 0 picks a free port) and starts serving.
  /// `static_dir`, when given, is mounted at "/". Throws IoError when the
  /// port cannot be bound.
  HttpServer(const Service& service, const std::string& host, int port,
             const std::optional<std::filesystem::path>& static_dir = std::nullopt);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  int port() const noexcept;
  /// Blocks until stop() is called from another thread or a signal.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gradecraft
