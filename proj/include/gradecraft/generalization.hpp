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

// Cross-edition experiments: train on some editions, score on the
// benchmark sets of all of them.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradecraft/metrics.hpp"

namespace gradecraft {

struct GeneralizationCell {
  std::string model;  // model tag
  Edition test_edition = Edition::MB2016;
  bool in_distribution = false;
  std::optional<MetricsReport> report;  // empty when the cell failed
  std::string error;
};

struct GeneralizationMatrix {
  std::vector<Edition> train_editions;
  std::vector<std::string> models;
  std::vector<GeneralizationCell> cells;
  std::map<std::string, nn::TrainReport> train_reports;  // neural models only
  std::vector<std::string> warnings;

  const GeneralizationCell* find(const std::string& model, Edition test) const;
  /// Mean MAE over the model's in-distribution cells.
  std::optional<double> in_distribution_mae(const std::string& model) const;
};

struct GeneralizationConfig {
  std::vector<std::string> models;
  // Editions whose benchmark sets are scored; all three by default.
  std::vector<Edition> test_editions{kAllEditions.begin(), kAllEditions.end()};
  TrainOptions options;
};

/// Trains each model once on the union of the training editions' train
/// splits, early-stopping networks on the union of their benchmark sets,
/// then scores the benchmarks of every training and test edition. A
/// failure in one cell is recorded and the run continues. Throws DatasetError when a training
/// edition has no loaded split, InvalidArgument when `train_editions` is
/// empty.
GeneralizationMatrix generalization_run(std::span<const Edition> train_editions,
                                        const std::map<Edition, DatasetSplit>& datasets,
                                        const GeneralizationConfig& config);

nlohmann::ordered_json generalization_to_json(const GeneralizationMatrix& matrix);

}  // namespace gradecraft
