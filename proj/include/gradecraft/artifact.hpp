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

// Model files.
//
// Layout, all integers little-endian:
//   "GCMA"                      magic
//   u32  header length
//   ...  header, UTF-8 JSON
//   u64  payload count
//   f64  payload[count]
//   u32  CRC-32 of every preceding byte
//
// The header carries metadata and the integer structure of the model
// (tree topology, layer widths); every real-valued parameter lives in the
// payload so that a load reproduces predictions bit for bit.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradecraft/metrics.hpp"
#include "gradecraft/model.hpp"

namespace gradecraft {

inline constexpr int kArtifactSchemaVersion = 1;
inline constexpr const char* kArtifactExtension = ".gcm";

struct ModelArtifact {
  explicit ModelArtifact(GradeModel m) : model(std::move(m)) {}

  int schema_version = kArtifactSchemaVersion;
  std::string created;  // caller-supplied timestamp, kept verbatim
  nlohmann::ordered_json hyperparameters = nlohmann::ordered_json::object();
  std::optional<MetricsReport> metrics;
  GradeModel model;
};

/// Hyperparameters actually used by `model`, for the artifact header.
nlohmann::ordered_json describe_hyperparameters(const GradeModel& model,
                                                const TrainOptions& options);

std::vector<std::uint8_t> serialize_model(const ModelArtifact& artifact);
/// Throws ChecksumError for truncated or corrupted bytes,
/// UnsupportedVersionError for an unknown schema_version and DatasetError
/// when the structure and payload disagree.
ModelArtifact deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

/// Header fields without the model structure: tag, editions, seed,
/// created, hyperparameters and metrics.
nlohmann::ordered_json artifact_metadata(const ModelArtifact& artifact);

}  // namespace gradecraft
