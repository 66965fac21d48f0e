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

// Route dataset files, ascent filtering, the benchmark/train split and
// synthetic datasets with a planted linear grade rule.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gradecraft/board.hpp"

namespace gradecraft {

struct RawRouteRecord {
  Edition edition = Edition::MB2016;
  std::string name;
  std::vector<std::string> holds;
  std::string grade_label;
  std::int64_t ascents = 0;
  bool is_benchmark = false;

  bool operator==(const RawRouteRecord&) const = default;
};

struct LabeledRoute {
  Route route;
  FontGrade grade;
  std::int64_t ascents;
  std::string name;
};

struct DatasetSplit {
  Edition edition = Edition::MB2016;
  std::vector<LabeledRoute> train;
  std::vector<LabeledRoute> test;
  /// Set when no benchmark records were present; synthetic sets may
  /// legitimately have none.
  bool no_benchmarks = false;
};

struct GradeCounts {
  std::int64_t train = 0;
  std::int64_t test = 0;
  bool operator==(const GradeCounts&) const = default;
};

struct DatasetStats {
  Edition edition = Edition::MB2016;
  std::map<int, GradeCounts> per_grade_counts;  // keyed by grade ordinal
  std::int64_t total_routes = 0;
  std::int64_t total_benchmarks = 0;
};

/// Reads the JSON dataset format. Every hold and grade token is validated;
/// the first bad record aborts the load with a DatasetError naming it.
std::vector<RawRouteRecord> load_dataset(const std::filesystem::path& path, Edition edition);
std::vector<RawRouteRecord> parse_dataset_json(const std::string& text, Edition edition,
                                               const std::string& source = "<memory>");

void save_dataset(const std::filesystem::path& path, Edition edition,
                  const std::vector<RawRouteRecord>& records);
std::string dataset_to_json(Edition edition, const std::vector<RawRouteRecord>& records);

std::vector<RawRouteRecord> filter_min_ascents(const std::vector<RawRouteRecord>& records,
                                               std::int64_t min_ascents = 5);

/// Benchmarks become the test set, everything else the training set.
DatasetSplit split_benchmarks(const std::vector<RawRouteRecord>& records);

DatasetStats compute_stats(const DatasetSplit& split);

struct SyntheticSpec {
  Edition edition = Edition::MB2017;
  std::array<double, kCells> planted_weights{};
  double bias = 0.0;
  double noise_sd = 0.0;
  int n_routes = 100;
  int min_holds = 3;
  int max_holds = 12;
  double benchmark_fraction = 0.1;
  std::uint64_t seed = 0;
  /// Draw holds only from cells bolted on `edition`.
  bool restrict_to_layout = false;
};

/// Deterministic for a fixed spec. grade = clamp(round(w.x + bias + noise), 0, 14);
/// ascents are log-uniform in [5, 500].
std::vector<RawRouteRecord> generate_synthetic(const SyntheticSpec& spec);

/// Conventional file name inside a data directory: moonboard_<year>.json.
std::filesystem::path dataset_file(const std::filesystem::path& data_dir, Edition edition);

/// Loads, filters (>= 5 ascents) and splits one edition from a data directory.
DatasetSplit load_split(const std::filesystem::path& data_dir, Edition edition,
                        std::int64_t min_ascents = 5);

/// Data root from GRADECRAFT_DATA_DIR, if set.
std::optional<std::filesystem::path> default_data_dir();

}  // namespace gradecraft
